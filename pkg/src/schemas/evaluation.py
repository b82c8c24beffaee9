"""
Pydantic schemas for Evaluation

This module provides result records for:
- Ranking tasks (entity matching, tail / relation prediction): RankReport
- Precision-recall data: PrPoint
- Triple completion: CompletionQuery, CompletionCandidate
- TWA verification: LabeledCase, CvReport

Each record knows how to render itself as the TSV lines the CLI writes.
"""
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.exceptions import ValidationError
from src.models.enums import CorruptionKind, Slot
from src.models.graph import Triple


# ============================================================================
# RANKING
# ============================================================================

class RankReport(BaseModel):
    """
    Ranks of gold answers and their aggregates

    hits_at_10 = 100 * |{rank <= 10}| / |ranks|
    mean_rank  = arithmetic mean of ranks
    """
    ranks: List[int]
    hits_at_10: float
    hits_at_1: float
    mean_rank: float
    queries: List[Tuple[str, str]] = Field(
        default_factory=list,
        description="(source label, gold label) per rank, for TSV output"
    )

    @classmethod
    def from_ranks(cls, ranks, queries: Optional[List[Tuple[str, str]]] = None) -> "RankReport":
        ranks = [int(r) for r in ranks]
        if not ranks:
            raise ValidationError("Cannot aggregate an empty rank list", error_code="EMPTY_RANKS")
        n = len(ranks)
        return cls(
            ranks=ranks,
            hits_at_10=100.0 * sum(1 for r in ranks if r <= 10) / n,
            hits_at_1=100.0 * sum(1 for r in ranks if r <= 1) / n,
            mean_rank=sum(ranks) / n,
            queries=list(queries or []),
        )

    def to_tsv_lines(self, with_hits_at_1: bool = False) -> List[str]:
        lines = []
        for i, rank in enumerate(self.ranks):
            source, gold = self.queries[i] if i < len(self.queries) else (str(i), "")
            lines.append(f"{source}\t{gold}\t{rank}")
        lines.append(f"HITS@10\t{self.hits_at_10:.2f}")
        if with_hits_at_1:
            lines.append(f"HITS@1\t{self.hits_at_1:.2f}")
        lines.append(f"MEAN\t{self.mean_rank:.2f}")
        return lines


class PrPoint(BaseModel):
    """One point of a thresholded top-1 precision-recall curve"""
    threshold: float
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    predicted: int = Field(..., ge=0)
    correct: int = Field(..., ge=0)

    def to_tsv(self) -> str:
        return f"{self.threshold:.6g}\t{self.precision:.4f}\t{self.recall:.4f}"


# ============================================================================
# TRIPLE COMPLETION
# ============================================================================

class CompletionQuery(BaseModel):
    """Source-language triple with exactly one unknown element (None)"""
    head: Optional[str] = None
    relation: Optional[str] = None
    tail: Optional[str] = None

    @model_validator(mode="after")
    def exactly_one_unknown(self) -> "CompletionQuery":
        unknown = [v for v in (self.head, self.relation, self.tail) if v is None]
        if len(unknown) != 1:
            raise ValueError(f"Completion query needs exactly one unknown slot, got {len(unknown)}")
        return self

    @property
    def missing(self) -> Slot:
        if self.head is None:
            return Slot.HEAD
        if self.relation is None:
            return Slot.RELATION
        return Slot.TAIL


class CompletionCandidate(BaseModel):
    """Ranked answer of a completion query in the target language"""
    rank: int = Field(..., ge=1)
    index: int = Field(..., ge=0)
    label: str
    score: float = Field(..., ge=0)

    def to_tsv(self) -> str:
        return f"{self.rank}\t{self.label}\t{self.score:.6f}"


# ============================================================================
# TRIPLE-WISE ALIGNMENT VERIFICATION
# ============================================================================

class LabeledCase(BaseModel):
    """
    Candidate aligned pair with its verdict

    corruption is None for genuine alignments.
    """
    model_config = ConfigDict(frozen=True)

    source: Triple
    target: Triple
    label: bool
    corruption: Optional[CorruptionKind] = None

    @model_validator(mode="after")
    def corruption_only_on_negatives(self) -> "LabeledCase":
        if self.label and self.corruption is not None:
            raise ValueError("Positive cases carry no corruption kind")
        return self

    @property
    def pair(self) -> Tuple[Triple, Triple]:
        return (self.source, self.target)


class CvReport(BaseModel):
    """
    k-fold cross-validation result of the threshold classifier

    std_dev is the population standard deviation of fold_accuracies.
    """
    fold_accuracies: List[float]
    thresholds: List[float]
    mean: float
    std_dev: float
    corruption_accuracy: Dict[str, float] = Field(
        default_factory=dict,
        description="Held-out accuracy per corruption kind, plus 'positive'"
    )

    @classmethod
    def from_folds(cls, accuracies: List[float], thresholds: List[float],
                   corruption_accuracy: Optional[Dict[str, float]] = None) -> "CvReport":
        values = np.asarray(accuracies, dtype=np.float64)
        return cls(
            fold_accuracies=[float(a) for a in accuracies],
            thresholds=[float(t) for t in thresholds],
            mean=float(np.mean(values)),
            std_dev=float(np.std(values)),
            corruption_accuracy=dict(corruption_accuracy or {}),
        )

    @model_validator(mode="after")
    def consistent_aggregates(self) -> "CvReport":
        if len(self.fold_accuracies) != len(self.thresholds):
            raise ValueError("One threshold per fold is required")
        if self.fold_accuracies:
            values = np.asarray(self.fold_accuracies, dtype=np.float64)
            if not math.isclose(self.mean, float(np.mean(values)), abs_tol=1e-12) or \
                    not math.isclose(self.std_dev, float(np.std(values)), abs_tol=1e-12):
                raise ValueError("mean/std_dev disagree with fold_accuracies")
        return self

    def to_tsv_lines(self) -> List[str]:
        lines = [f"{i + 1}\t{sigma:.6f}\t{acc:.4f}"
                 for i, (sigma, acc) in enumerate(zip(self.thresholds, self.fold_accuracies))]
        lines.append(f"MEAN\t{self.mean:.4f}")
        lines.append(f"STD\t{self.std_dev:.4f}")
        return lines
