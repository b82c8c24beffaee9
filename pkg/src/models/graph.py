"""
Knowledge Graph Models
Per-language graphs, alignment sets and inter-lingual links

All containers are frozen after construction; loaders in
src.services.kg_loader builds them, everything else only reads them.
"""
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from src.core.exceptions import ValidationError, UnknownLanguageError


LanguageId = str
LanguagePair = Tuple[LanguageId, LanguageId]


class Triple(NamedTuple):
    """(head entity index, relation index, tail entity index)"""
    head: int
    relation: int
    tail: int


AlignedPair = Tuple[Triple, Triple]


def canonical_pair(first: LanguageId, second: LanguageId) -> LanguagePair:
    """Unordered language pair in its stored order (smaller code first)"""
    if first == second:
        raise ValidationError(
            message=f"A language pair needs two different languages, got '{first}' twice",
            error_code="SAME_LANGUAGE_PAIR",
            details={"language": first}
        )
    return (first, second) if first < second else (second, first)


def _check_language(code: LanguageId) -> None:
    if not isinstance(code, str) or not code:
        raise ValidationError(
            message="Language code must be a non-empty string",
            error_code="INVALID_LANGUAGE",
            details={"language": code}
        )


@dataclass(frozen=True)
class KnowledgeGraph:
    """
    One language's graph

    entities / relations are in first-appearance order; triples are
    deduplicated index triples.
    """
    language: LanguageId
    entities: Tuple[str, ...]
    relations: Tuple[str, ...]
    triples: Tuple[Triple, ...]
    _entity_index: Dict[str, int] = field(init=False, repr=False, compare=False)
    _relation_index: Dict[str, int] = field(init=False, repr=False, compare=False)
    _triple_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_language(self.language)
        entity_index = {label: i for i, label in enumerate(self.entities)}
        relation_index = {label: i for i, label in enumerate(self.relations)}
        if len(entity_index) != len(self.entities):
            raise ValidationError("Entity labels must be unique", error_code="DUPLICATE_LABEL",
                                  details={"language": self.language, "kind": "entity"})
        if len(relation_index) != len(self.relations):
            raise ValidationError("Relation labels must be unique", error_code="DUPLICATE_LABEL",
                                  details={"language": self.language, "kind": "relation"})
        n_e, n_r = len(self.entities), len(self.relations)
        for triple in self.triples:
            if not (0 <= triple.head < n_e and 0 <= triple.tail < n_e and 0 <= triple.relation < n_r):
                raise ValidationError(
                    message=f"Triple {tuple(triple)} is outside the vocabulary bounds",
                    error_code="TRIPLE_OUT_OF_BOUNDS",
                    details={"language": self.language, "triple": tuple(triple)}
                )
        triple_set = frozenset(self.triples)
        if len(triple_set) != len(self.triples):
            raise ValidationError("Triple list must be deduplicated", error_code="DUPLICATE_TRIPLE",
                                  details={"language": self.language})
        object.__setattr__(self, "_entity_index", entity_index)
        object.__setattr__(self, "_relation_index", relation_index)
        object.__setattr__(self, "_triple_set", triple_set)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def entity_id(self, label: str) -> Optional[int]:
        return self._entity_index.get(label)

    def relation_id(self, label: str) -> Optional[int]:
        return self._relation_index.get(label)

    def contains(self, triple: Triple) -> bool:
        return triple in self._triple_set

    def label_triple(self, triple: Triple) -> Tuple[str, str, str]:
        return (self.entities[triple.head], self.relations[triple.relation], self.entities[triple.tail])

    def with_triples(self, triples: Tuple[Triple, ...]) -> "KnowledgeGraph":
        """Same vocabularies, different triple set"""
        return KnowledgeGraph(self.language, self.entities, self.relations, tuple(triples))


@dataclass(frozen=True)
class AlignmentSet:
    """
    Aligned triple pairs between two languages

    `pair` is canonical (smaller code first) and each stored pair is
    (triple in pair[0], triple in pair[1]).
    """
    pair: LanguagePair
    pairs: Tuple[AlignedPair, ...]

    def __post_init__(self):
        if tuple(self.pair) != canonical_pair(*self.pair):
            raise ValidationError(
                message=f"Alignment pair {self.pair} is not in canonical order",
                error_code="NON_CANONICAL_PAIR",
                details={"pair": list(self.pair)}
            )
        if len(set(self.pairs)) != len(self.pairs):
            raise ValidationError("Alignment set contains duplicate pairs", error_code="DUPLICATE_ALIGNMENT",
                                  details={"pair": list(self.pair)})

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def is_empty(self) -> bool:
        return not self.pairs


@dataclass(frozen=True)
class IllSet:
    """Inter-lingual entity links in one direction (source -> target)"""
    source: LanguageId
    target: LanguageId
    links: Tuple[Tuple[int, int], ...]
    skipped: int = 0

    def __post_init__(self):
        sources = [s for s, _ in self.links]
        if len(set(sources)) != len(sources):
            raise ValidationError("A source entity may appear in at most one link",
                                  error_code="DUPLICATE_ILL_SOURCE",
                                  details={"direction": [self.source, self.target]})

    @property
    def direction(self) -> LanguagePair:
        return (self.source, self.target)

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class MultilingualKB:
    """Graphs, alignment sets per canonical pair and ILL sets"""
    graphs: Dict[LanguageId, KnowledgeGraph]
    alignments: Dict[LanguagePair, AlignmentSet] = field(default_factory=dict)
    ills: List[IllSet] = field(default_factory=list)

    def __post_init__(self):
        for code, graph in self.graphs.items():
            if graph.language != code:
                raise ValidationError(f"Graph registered as '{code}' is for '{graph.language}'",
                                      error_code="LANGUAGE_MISMATCH")
        for key, alignment in self.alignments.items():
            if tuple(key) != tuple(alignment.pair):
                raise ValidationError(f"Alignment registered as {key} is for {alignment.pair}",
                                      error_code="PAIR_MISMATCH")
            for code in alignment.pair:
                if code not in self.graphs:
                    raise UnknownLanguageError(code)
            first, second = (self.graphs[c] for c in alignment.pair)
            for source, target in alignment.pairs:
                _check_bounds(first, source)
                _check_bounds(second, target)
        for ill in self.ills:
            for code in ill.direction:
                if code not in self.graphs:
                    raise UnknownLanguageError(code)
            src, tgt = self.graphs[ill.source], self.graphs[ill.target]
            for s, t in ill.links:
                if not (0 <= s < src.num_entities and 0 <= t < tgt.num_entities):
                    raise ValidationError(f"ILL link {(s, t)} is outside the vocabulary bounds",
                                          error_code="ILL_OUT_OF_BOUNDS")

    @property
    def languages(self) -> List[LanguageId]:
        """Language codes in sorted order"""
        return sorted(self.graphs)

    def graph(self, language: LanguageId) -> KnowledgeGraph:
        if language not in self.graphs:
            raise UnknownLanguageError(language)
        return self.graphs[language]

    def alignment(self, first: LanguageId, second: LanguageId) -> Optional[AlignmentSet]:
        return self.alignments.get(canonical_pair(first, second))

    def aligned_pairs(self) -> List[LanguagePair]:
        """Canonical pairs with a non-empty alignment set, sorted"""
        return sorted(key for key, alignment in self.alignments.items() if not alignment.is_empty)


def _check_bounds(graph: KnowledgeGraph, triple: Triple) -> None:
    if not (0 <= triple.head < graph.num_entities and 0 <= triple.tail < graph.num_entities
            and 0 <= triple.relation < graph.num_relations):
        raise ValidationError(
            message=f"Aligned triple {tuple(triple)} is outside the '{graph.language}' vocabulary",
            error_code="TRIPLE_OUT_OF_BOUNDS",
            details={"language": graph.language, "triple": tuple(triple)}
        )
