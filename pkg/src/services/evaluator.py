"""
Evaluator Service
Ranking-based evaluation over a trained model

Tasks:
1. Cross-lingual entity matching: kNN from tau(e) over all target entities
2. Precision-recall data: thresholded top-1 matching
3. Monolingual tail / relation prediction (raw ranking, no filtering)
4. Cross-lingual triple completion
5. PCA projection for plotting

Ranks are 1-based; ties in distance are broken by ascending row index.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from src.core.exceptions import DegenerateDataError, EmptyInputError, ResolutionError, ValidationError
from src.core.logging import get_logger
from src.models.embedding import EmbeddingSpace, Model
from src.models.enums import NormOrder, Slot
from src.models.graph import IllSet, LanguageId, Triple
from src.schemas.evaluation import CompletionCandidate, CompletionQuery, PrPoint, RankReport
from src.services.alignment_model import AlignmentModel

logger = get_logger(__name__)


def _label(labels: Tuple[str, ...], index: int) -> str:
    return labels[index] if index < len(labels) else str(index)


def _map(fn: Callable, items: Sequence, threads: int) -> List:
    """Order-preserving map, optionally on a thread pool"""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


class EvaluatorService:
    """
    Service class for evaluation tasks

    Every operation is read-only over the model.
    """

    # ========================================================================
    # RANKING PRIMITIVES
    # ========================================================================

    @staticmethod
    def distances(query: np.ndarray, candidates: np.ndarray, norm: NormOrder) -> np.ndarray:
        """||candidate - query|| for every row of candidates"""
        diff = candidates - query
        if norm is NormOrder.L1:
            return np.sum(np.abs(diff), axis=1)
        return np.sqrt(np.sum(diff * diff, axis=1))

    @staticmethod
    def rank_target(query: np.ndarray, candidates: np.ndarray, target: int, norm: NormOrder) -> int:
        """
        1-based rank of row `target` by ascending distance to query

        Rows at the same distance as the target count ahead of it only
        when their index is lower.
        """
        if not 0 <= target < len(candidates):
            raise ValidationError(f"Target row {target} is outside 0..{len(candidates) - 1}",
                                  error_code="TARGET_OUT_OF_RANGE")
        dist = EvaluatorService.distances(np.asarray(query, dtype=np.float64), candidates, norm)
        gold = dist[target]
        return int(np.count_nonzero(dist < gold) + np.count_nonzero(dist[:target] == gold)) + 1

    @staticmethod
    def ranked_indices(scores: np.ndarray) -> np.ndarray:
        """Candidate indices by ascending score, ties by ascending index"""
        return np.argsort(scores, kind="stable")

    # ========================================================================
    # CROSS-LINGUAL ENTITY MATCHING
    # ========================================================================

    @staticmethod
    def _ill_queries(model: Model, ill: IllSet, limit: Optional[int]) -> Tuple[List[Tuple[int, int]], np.ndarray]:
        links = list(ill.links if limit is None else ill.links[:limit])
        if not links:
            raise EmptyInputError(f"ILL set {ill.source}->{ill.target}")
        src = model.space(ill.source)
        model.space(ill.target)
        sources = src.entity_vecs[[s for s, _ in links]]
        return links, AlignmentModel.transit_entity(model, ill.source, ill.target, sources)

    @staticmethod
    def entity_matching(model: Model, ill: IllSet, norm: NormOrder,
                        limit: Optional[int] = None, threads: int = 1) -> RankReport:
        """
        Rank each gold target among ALL target-language entities by distance to tau(e)

        Raises:
            EmptyInputError: no links (after `limit`)
            UnknownPairError: the model has no transition for the languages
        """
        links, queries = EvaluatorService._ill_queries(model, ill, limit)
        src, tgt = model.space(ill.source), model.space(ill.target)

        def rank(i: int) -> int:
            return EvaluatorService.rank_target(queries[i], tgt.entity_vecs, links[i][1], norm)

        ranks = _map(rank, range(len(links)), threads)
        report = RankReport.from_ranks(
            ranks,
            [(_label(src.entity_labels, s), _label(tgt.entity_labels, t)) for s, t in links]
        )
        logger.info("Entity matching evaluated",
                    extra={"direction": f"{ill.source}->{ill.target}", "queries": len(ranks),
                           "hits_at_10": report.hits_at_10, "mean_rank": report.mean_rank})
        return report

    @staticmethod
    def nearest_neighbors(model: Model, ill: IllSet, norm: NormOrder,
                          limit: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(nearest distance, nearest index, gold index) per link"""
        links, queries = EvaluatorService._ill_queries(model, ill, limit)
        tgt = model.space(ill.target)
        nearest_dist = np.empty(len(links))
        nearest_idx = np.empty(len(links), dtype=np.int64)
        for i, query in enumerate(queries):
            dist = EvaluatorService.distances(query, tgt.entity_vecs, norm)
            j = int(np.argmin(dist))
            nearest_dist[i], nearest_idx[i] = dist[j], j
        return nearest_dist, nearest_idx, np.asarray([t for _, t in links], dtype=np.int64)

    @staticmethod
    def pr_points(nearest_dist: np.ndarray, correct: np.ndarray, thresholds: Sequence[float]) -> List[PrPoint]:
        """
        Thresholded top-1 precision / recall

        A link is predicted when its nearest distance < sigma; precision is
        1.0 when nothing is predicted.
        """
        if len(thresholds) == 0:
            raise ValidationError("At least one threshold is required", error_code="NO_THRESHOLDS")
        if any(b < a for a, b in zip(thresholds, thresholds[1:])):
            raise ValidationError("Thresholds must be sorted ascending", error_code="UNSORTED_THRESHOLDS")
        total = len(nearest_dist)
        points = []
        for sigma in thresholds:
            predicted = nearest_dist < sigma
            n_predicted = int(np.count_nonzero(predicted))
            n_correct = int(np.count_nonzero(predicted & correct))
            points.append(PrPoint(
                threshold=float(sigma),
                precision=n_correct / n_predicted if n_predicted else 1.0,
                recall=n_correct / total,
                predicted=n_predicted,
                correct=n_correct,
            ))
        return points

    @staticmethod
    def pr_curve(model: Model, ill: IllSet, norm: NormOrder, thresholds: Sequence[float],
                 limit: Optional[int] = None) -> List[PrPoint]:
        """Precision-recall points of entity matching, one per threshold"""
        if len(thresholds) == 0:
            raise ValidationError("At least one threshold is required", error_code="NO_THRESHOLDS")
        nearest_dist, nearest_idx, gold = EvaluatorService.nearest_neighbors(model, ill, norm, limit)
        return EvaluatorService.pr_points(nearest_dist, nearest_idx == gold, list(thresholds))

    @staticmethod
    def threshold_grid(nearest_dist: np.ndarray, steps: int) -> List[float]:
        """`steps` evenly spaced thresholds from 0 to just above the largest nearest distance"""
        if steps < 1:
            raise ValidationError("steps must be positive", error_code="INVALID_STEPS")
        top = float(np.max(nearest_dist)) if len(nearest_dist) else 0.0
        return np.linspace(0.0, np.nextafter(top, np.inf), steps + 1)[1:].tolist()

    # ========================================================================
    # MONOLINGUAL PREDICTION
    # ========================================================================

    @staticmethod
    def _monolingual(space: EmbeddingSpace, test: Sequence[Triple], norm: NormOrder, slot: Slot,
                     threads: int) -> RankReport:
        if not test:
            raise EmptyInputError(f"Test triple set for '{space.language}'")

        def rank(triple: Triple) -> int:
            h, r, t = triple
            if slot is Slot.TAIL:
                return EvaluatorService.rank_target(space.entity_vecs[h] + space.relation_vecs[r],
                                                    space.entity_vecs, t, norm)
            return EvaluatorService.rank_target(space.entity_vecs[t] - space.entity_vecs[h],
                                                space.relation_vecs, r, norm)

        ranks = _map(rank, list(test), threads)
        if slot is Slot.TAIL:
            queries = [(f"{_label(space.entity_labels, h)} {_label(space.relation_labels, r)}",
                        _label(space.entity_labels, t)) for h, r, t in test]
        else:
            queries = [(f"{_label(space.entity_labels, h)} {_label(space.entity_labels, t)}",
                        _label(space.relation_labels, r)) for h, r, t in test]
        return RankReport.from_ranks(ranks, queries)

    @staticmethod
    def tail_prediction(model: Model, test: Sequence[Triple], language: LanguageId, norm: NormOrder,
                        threads: int = 1) -> RankReport:
        """Rank gold t among all entities by distance to h + r"""
        report = EvaluatorService._monolingual(model.space(language), test, norm, Slot.TAIL, threads)
        logger.info("Tail prediction evaluated",
                    extra={"language": language, "queries": len(report.ranks), "hits_at_10": report.hits_at_10})
        return report

    @staticmethod
    def relation_prediction(model: Model, test: Sequence[Triple], language: LanguageId, norm: NormOrder,
                            threads: int = 1) -> RankReport:
        """Rank gold r among all relations by distance to t - h"""
        report = EvaluatorService._monolingual(model.space(language), test, norm, Slot.RELATION, threads)
        logger.info("Relation prediction evaluated",
                    extra={"language": language, "queries": len(report.ranks), "hits_at_10": report.hits_at_10})
        return report

    # ========================================================================
    # CROSS-LINGUAL TRIPLE COMPLETION
    # ========================================================================

    @staticmethod
    def complete_triple(
        model: Model,
        query: CompletionQuery,
        source: LanguageId,
        target: LanguageId,
        norm: NormOrder,
        top_n: int
    ) -> List[CompletionCandidate]:
        """
        Fill the unknown slot of a source-language triple with target-language candidates

        Known elements are carried over with tau:
            ?t  ||tau(h) + tau(r) - t'||  over target entities
            ?h  ||h' + tau(r) - tau(t)||  over target entities
            ?r  ||tau(h) + r' - tau(t)||  over target relations

        Raises:
            ValidationError: top_n < 1, or the model has no vocabulary
            ResolutionError: a known label is not in the source vocabulary
        """
        if top_n < 1:
            raise ValidationError("top_n must be at least 1", error_code="INVALID_TOP_N")
        src, tgt = model.space(source), model.space(target)
        if not src.entity_labels or not tgt.entity_labels:
            raise ValidationError("Triple completion needs a model saved with its vocabularies",
                                  error_code="NO_VOCABULARY")
        vocabulary = src.vocabulary_graph()

        def entity(label: str) -> np.ndarray:
            index = vocabulary.entity_id(label)
            if index is None:
                raise ResolutionError(label, source)
            return AlignmentModel.transit_entity(model, source, target, src.entity_vecs[index])

        def relation(label: str) -> np.ndarray:
            index = vocabulary.relation_id(label)
            if index is None:
                raise ResolutionError(label, source)
            return AlignmentModel.transit_relation(model, source, target, src.relation_vecs[index])

        missing = query.missing
        if missing is Slot.TAIL:
            query_vec, candidates, labels = entity(query.head) + relation(query.relation), tgt.entity_vecs, tgt.entity_labels
        elif missing is Slot.HEAD:
            query_vec, candidates, labels = entity(query.tail) - relation(query.relation), tgt.entity_vecs, tgt.entity_labels
        else:
            query_vec, candidates, labels = entity(query.tail) - entity(query.head), tgt.relation_vecs, tgt.relation_labels

        scores = EvaluatorService.distances(query_vec, candidates, norm)
        order = EvaluatorService.ranked_indices(scores)[:top_n]
        return [
            CompletionCandidate(rank=i + 1, index=int(j), label=_label(labels, int(j)), score=float(scores[j]))
            for i, j in enumerate(order)
        ]

    # ========================================================================
    # PCA
    # ========================================================================

    @staticmethod
    def pca_project(vectors: np.ndarray, out_dim: int = 2) -> np.ndarray:
        """
        Project rows onto the top `out_dim` principal components

        Components come from the eigendecomposition of the sample covariance,
        by descending eigenvalue; each component's first nonzero coordinate
        is made positive.

        Raises:
            ValidationError: out_dim outside 1..k or fewer rows than out_dim
            DegenerateDataError: all rows identical
        """
        data = np.asarray(vectors, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError("PCA input must be a matrix", error_code="BAD_SHAPE")
        m, k = data.shape
        if not 1 <= out_dim <= k or m < out_dim:
            raise ValidationError(
                message=f"Cannot project {m}x{k} data onto {out_dim} components",
                error_code="INVALID_PCA_DIMENSION",
                details={"rows": m, "k": k, "out_dim": out_dim}
            )
        centered = data - data.mean(axis=0)
        if not np.any(centered):
            raise DegenerateDataError("all rows are identical")
        covariance = centered.T @ centered / max(m - 1, 1)
        eigenvalues, eigenvectors = eigh(covariance)
        order = np.argsort(-eigenvalues, kind="stable")[:out_dim]
        components = eigenvectors[:, order]
        for j in range(out_dim):
            column = components[:, j]
            nonzero = np.flatnonzero(np.abs(column) > 1e-12)
            if len(nonzero) and column[nonzero[0]] < 0:
                components[:, j] = -column
        return centered @ components

    @staticmethod
    def pca_export(model: Model, language: LanguageId, labels: Optional[Sequence[str]] = None,
                   out_dim: int = 2) -> List[tuple]:
        """
        Label-indexed PCA rows of a language's entities

        `labels` selects and orders entities; all entities when omitted.
        """
        space = model.space(language)
        if labels:
            vocabulary = space.vocabulary_graph()
            indices = []
            for label in labels:
                index = vocabulary.entity_id(label)
                if index is None:
                    raise ResolutionError(label, language)
                indices.append(index)
            names = list(labels)
        else:
            indices = list(range(space.num_entities))
            names = [_label(space.entity_labels, i) for i in indices]
        projected = EvaluatorService.pca_project(space.entity_vecs[indices], out_dim)
        return [(name, *(float(x) for x in row)) for name, row in zip(names, projected)]
