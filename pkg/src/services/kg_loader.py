"""
Knowledge Graph Loader Service
Ingestion, validation and indexing of multilingual knowledge graphs

Input formats (UTF-8, LF line endings, labels never contain tabs/newlines):
- Triple file:    head<TAB>relation<TAB>tail
- Alignment file: h<TAB>r<TAB>t<TAB>h'<TAB>r'<TAB>t'  (first language, then second)
- ILL file:       source entity<TAB>target entity

Key workflows:
1. Graph loading: vocabularies in first-appearance order, duplicates collapsed and counted
2. Alignment loading: every label must resolve, pairs stored in canonical language order
3. ILL loading: unresolvable links skipped and counted (coverage gaps are expected)
4. Protocol splits: monolingual test hold-out, TWA positive isolation, alignment restriction
"""
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from src.core.exceptions import EmptyInputError, ResolutionError, UnknownLanguageError, ValidationError
from src.core.logging import get_logger, log_load
from src.models.graph import (
    AlignedPair, AlignmentSet, IllSet, KnowledgeGraph, LanguageId, MultilingualKB, Triple, canonical_pair
)
from src.schemas.stats import GraphStats, LanguageStats
from src.utils.tsv import iter_fields, write_lines

logger = get_logger(__name__)

PathLike = Union[str, Path]


class LoadStats(BaseModel):
    """What a loader dropped on the way in"""
    lines: int = 0
    duplicates: int = 0
    skipped: int = 0


class GraphLoaderService:
    """
    Service class for knowledge-base ingestion

    All methods are static; loaded containers are immutable.
    """

    # ========================================================================
    # LOADING
    # ========================================================================

    @staticmethod
    def load_graph_with_stats(path: PathLike, language: LanguageId) -> Tuple[KnowledgeGraph, LoadStats]:
        """
        Load a triple file

        Raises:
            MissingInputError: file does not exist
            ParseError: a line does not have exactly 3 fields
            EmptyInputError: no triples in the file
        """
        entities: Dict[str, int] = {}
        relations: Dict[str, int] = {}
        triples: Dict[Triple, None] = {}
        stats = LoadStats()

        for _, (head, relation, tail) in iter_fields(path, arity=3):
            stats.lines += 1
            h = entities.setdefault(head, len(entities))
            r = relations.setdefault(relation, len(relations))
            t = entities.setdefault(tail, len(entities))
            triple = Triple(h, r, t)
            if triple in triples:
                stats.duplicates += 1
                continue
            triples[triple] = None

        if not triples:
            raise EmptyInputError(f"Triple file {path}")

        graph = KnowledgeGraph(language, tuple(entities), tuple(relations), tuple(triples))
        log_load("graph", str(path), language=language, entities=graph.num_entities,
                 relations=graph.num_relations, triples=len(graph.triples), duplicates=stats.duplicates)
        return graph, stats

    @staticmethod
    def load_graph(path: PathLike, language: LanguageId) -> KnowledgeGraph:
        """Load a triple file (duplicate count goes to the log)"""
        graph, _ = GraphLoaderService.load_graph_with_stats(path, language)
        return graph

    @staticmethod
    def load_alignment(
        path: PathLike,
        pair: Tuple[LanguageId, LanguageId],
        graphs: Dict[LanguageId, KnowledgeGraph]
    ) -> AlignmentSet:
        """
        Load aligned triple pairs; the file lists pair[0]'s triple first

        An empty file is a legal, empty alignment set. Repeated lines are
        collapsed.

        Raises:
            ParseError: a line does not have exactly 6 fields
            ResolutionError: a label is missing from its graph (names label and line)
        """
        first, second = pair
        for code in (first, second):
            if code not in graphs:
                raise UnknownLanguageError(code)
        key = canonical_pair(first, second)
        swap = key[0] != first
        seen: Dict[AlignedPair, None] = {}
        duplicates = 0

        for number, fields in iter_fields(path, arity=6):
            left = _resolve_triple(graphs[first], fields[:3], str(path), number)
            right = _resolve_triple(graphs[second], fields[3:], str(path), number)
            aligned = (right, left) if swap else (left, right)
            if aligned in seen:
                duplicates += 1
                continue
            seen[aligned] = None

        alignment = AlignmentSet(key, tuple(seen))
        log_load("alignment", str(path), pair=f"{key[0]}-{key[1]}", pairs=len(alignment), duplicates=duplicates)
        return alignment

    @staticmethod
    def load_ills_with_stats(
        path: PathLike,
        direction: Tuple[LanguageId, LanguageId],
        graphs: Dict[LanguageId, KnowledgeGraph]
    ) -> Tuple[IllSet, LoadStats]:
        """
        Load entity ILLs; unresolvable or repeated-source lines are skipped and counted

        Raises:
            ParseError: a line does not have exactly 2 fields
        """
        source, target = direction
        for code in (source, target):
            if code not in graphs:
                raise UnknownLanguageError(code)
        src_graph, tgt_graph = graphs[source], graphs[target]
        links: Dict[int, int] = {}
        stats = LoadStats()

        for _, (src_label, tgt_label) in iter_fields(path, arity=2):
            stats.lines += 1
            s = src_graph.entity_id(src_label)
            t = tgt_graph.entity_id(tgt_label)
            if s is None or t is None:
                stats.skipped += 1
                continue
            if s in links:
                stats.duplicates += 1
                continue
            links[s] = t

        ill = IllSet(source, target, tuple(links.items()), skipped=stats.skipped + stats.duplicates)
        log_load("ills", str(path), direction=f"{source}->{target}", links=len(ill),
                 skipped=stats.skipped, duplicates=stats.duplicates)
        return ill, stats

    @staticmethod
    def load_ills(
        path: PathLike,
        direction: Tuple[LanguageId, LanguageId],
        graphs: Dict[LanguageId, KnowledgeGraph]
    ) -> IllSet:
        ill, _ = GraphLoaderService.load_ills_with_stats(path, direction, graphs)
        return ill

    @staticmethod
    def load_test_triples(path: PathLike, graph: KnowledgeGraph) -> List[Triple]:
        """
        Resolve a triple file against an existing vocabulary (monolingual test sets)

        Raises:
            ResolutionError: a label is not in the graph's vocabulary
        """
        resolved: Dict[Triple, None] = {}
        for number, fields in iter_fields(path, arity=3):
            resolved.setdefault(_resolve_triple(graph, fields, str(path), number), None)
        if not resolved:
            raise EmptyInputError(f"Test triple file {path}")
        return list(resolved)

    @staticmethod
    def load_kb(
        languages: Sequence[Tuple[LanguageId, PathLike]],
        alignments: Sequence[Tuple[LanguageId, LanguageId, PathLike]] = (),
        ills: Sequence[Tuple[LanguageId, LanguageId, PathLike]] = ()
    ) -> MultilingualKB:
        """Assemble a MultilingualKB from file declarations"""
        graphs: Dict[LanguageId, KnowledgeGraph] = {}
        for code, path in languages:
            if code in graphs:
                raise ValidationError(f"Language '{code}' declared twice", error_code="DUPLICATE_LANGUAGE",
                                      details={"language": code})
            graphs[code] = GraphLoaderService.load_graph(path, code)

        alignment_sets: Dict[Tuple[LanguageId, LanguageId], AlignmentSet] = {}
        for first, second, path in alignments:
            loaded = GraphLoaderService.load_alignment(path, (first, second), graphs)
            if loaded.pair in alignment_sets:
                merged = dict.fromkeys(alignment_sets[loaded.pair].pairs)
                merged.update(dict.fromkeys(loaded.pairs))
                loaded = AlignmentSet(loaded.pair, tuple(merged))
            alignment_sets[loaded.pair] = loaded

        ill_sets = [GraphLoaderService.load_ills(path, (source, target), graphs)
                    for source, target, path in ills]
        return MultilingualKB(graphs=graphs, alignments=alignment_sets, ills=ill_sets)

    # ========================================================================
    # WRITING
    # ========================================================================

    @staticmethod
    def write_graph(graph: KnowledgeGraph, path: PathLike) -> None:
        """Write triples back in the input format (reloading yields an identical graph)"""
        write_lines(("\t".join(graph.label_triple(t)) for t in graph.triples), path)

    @staticmethod
    def write_triples(graph: KnowledgeGraph, triples: Iterable[Triple], path: PathLike) -> None:
        write_lines(("\t".join(graph.label_triple(t)) for t in triples), path)

    @staticmethod
    def write_alignment(pairs: Iterable[AlignedPair], first: KnowledgeGraph, second: KnowledgeGraph,
                        path: PathLike) -> None:
        """6-field alignment lines, `first` graph's triple first"""
        write_lines(
            ("\t".join(first.label_triple(a) + second.label_triple(b)) for a, b in pairs),
            path
        )

    # ========================================================================
    # STATISTICS
    # ========================================================================

    @staticmethod
    def graph_stats(kb: MultilingualKB) -> GraphStats:
        """Per language, per pair and per ILL direction counts"""
        return GraphStats(
            languages={
                code: LanguageStats(entities=g.num_entities, relations=g.num_relations, triples=len(g.triples))
                for code, g in kb.graphs.items()
            },
            alignments={f"{a}-{b}": len(s) for (a, b), s in kb.alignments.items()},
            ills={f"{ill.source}->{ill.target}": len(ill) for ill in kb.ills},
        )

    # ========================================================================
    # PROTOCOL SPLITS
    # ========================================================================

    @staticmethod
    def split_triples(graph: KnowledgeGraph, test_fraction: float,
                      rng: np.random.Generator) -> Tuple[KnowledgeGraph, List[Triple]]:
        """
        Hold out round(test_fraction * n) random triples as a test set

        Vocabularies stay whole so held-out triples remain resolvable.
        """
        if not 0.0 <= test_fraction < 1.0:
            raise ValidationError("test_fraction must be in [0, 1)", error_code="INVALID_FRACTION",
                                  details={"test_fraction": test_fraction})
        n_test = int(round(test_fraction * len(graph.triples)))
        if n_test == 0:
            return graph, []
        chosen = set(rng.choice(len(graph.triples), size=n_test, replace=False).tolist())
        train = tuple(t for i, t in enumerate(graph.triples) if i not in chosen)
        test = [t for i, t in enumerate(graph.triples) if i in chosen]
        return graph.with_triples(train), test

    @staticmethod
    def restrict_alignment(alignment: AlignmentSet, graphs: Dict[LanguageId, KnowledgeGraph]) -> AlignmentSet:
        """Keep aligned pairs whose both triples are still in the (training) graphs"""
        first, second = (graphs[c] for c in alignment.pair)
        kept = tuple((a, b) for a, b in alignment.pairs if first.contains(a) and second.contains(b))
        return AlignmentSet(alignment.pair, kept)

    @staticmethod
    def hold_out_alignment(alignment: AlignmentSet, fraction: float,
                           rng: np.random.Generator) -> Tuple[AlignmentSet, List[AlignedPair]]:
        """
        Isolate ceil(fraction * n) random aligned pairs (TWA positives)

        The returned training set excludes the isolated pairs.
        """
        if not 0.0 <= fraction < 1.0:
            raise ValidationError("Hold-out fraction must be in [0, 1)", error_code="INVALID_FRACTION",
                                  details={"fraction": fraction})
        n_held = int(math.ceil(fraction * len(alignment)))
        if n_held == 0:
            return alignment, []
        chosen = set(rng.choice(len(alignment), size=n_held, replace=False).tolist())
        train = tuple(p for i, p in enumerate(alignment.pairs) if i not in chosen)
        held = [p for i, p in enumerate(alignment.pairs) if i in chosen]
        return AlignmentSet(alignment.pair, train), held


def _resolve_triple(graph: KnowledgeGraph, labels: Sequence[str], path: str, line: int) -> Triple:
    head, relation, tail = labels
    h = graph.entity_id(head)
    if h is None:
        raise ResolutionError(head, graph.language, path, line)
    r = graph.relation_id(relation)
    if r is None:
        raise ResolutionError(relation, graph.language, path, line)
    t = graph.entity_id(tail)
    if t is None:
        raise ResolutionError(tail, graph.language, path, line)
    return Triple(h, r, t)
