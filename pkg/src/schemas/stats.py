"""
Pydantic schemas for knowledge-base statistics
"""
from typing import Dict, List

from pydantic import BaseModel, Field


class LanguageStats(BaseModel):
    """Vocabulary and triple counts of one language"""
    entities: int = Field(default=0, ge=0)
    relations: int = Field(default=0, ge=0)
    triples: int = Field(default=0, ge=0)


class GraphStats(BaseModel):
    """
    Counts of a MultilingualKB

    Keys: language code; "a-b" for canonical pairs; "src->tgt" for ILL directions.
    """
    languages: Dict[str, LanguageStats] = Field(default_factory=dict)
    alignments: Dict[str, int] = Field(default_factory=dict)
    ills: Dict[str, int] = Field(default_factory=dict)

    def to_tsv_lines(self) -> List[str]:
        """`kind<TAB>key<TAB>count` lines"""
        lines = []
        for code in sorted(self.languages):
            stats = self.languages[code]
            lines.append(f"entities\t{code}\t{stats.entities}")
            lines.append(f"relations\t{code}\t{stats.relations}")
            lines.append(f"triples\t{code}\t{stats.triples}")
        for key in sorted(self.alignments):
            lines.append(f"aligned\t{key}\t{self.alignments[key]}")
        for key in sorted(self.ills):
            lines.append(f"ills\t{key}\t{self.ills[key]}")
        return lines
