"""
TWA Verifier Service
Triple-wise alignment verification with a distance-threshold classifier

Key workflows:
1. Case generation: held-out aligned pairs as positives, plus
   (i) one single-element corruption per positive and
   (ii) whole-triple substitutions for ceil(50%) of the positives
2. Scoring: f_d(T, T') = ||tau(h) - h'||_2 + ||tau(r) - r'||_2 + ||tau(t) - t'||_2
3. Classifier: f_d < sigma means genuine; sigma maximizes training accuracy
4. k-fold cross-validation with per-corruption-kind accuracy
"""
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from sklearn.metrics import accuracy_score
from sklearn.model_selection import KFold

from src.config.settings import settings
from src.core.exceptions import InsufficientCasesError, ValidationError, VocabularyTooSmallError
from src.core.logging import get_logger
from src.models.embedding import Model
from src.models.enums import CorruptionKind
from src.models.graph import AlignedPair, KnowledgeGraph, LanguagePair, MultilingualKB, Triple
from src.schemas.evaluation import CvReport, LabeledCase
from src.services.alignment_model import AlignmentModel
from src.utils.seeding import Stream, derive_rng

logger = get_logger(__name__)

# Slot order of type (i) corruptions: source h, r, t then target h, r, t
_ELEMENT_KINDS = (
    CorruptionKind.SOURCE_HEAD, CorruptionKind.SOURCE_RELATION, CorruptionKind.SOURCE_TAIL,
    CorruptionKind.TARGET_HEAD, CorruptionKind.TARGET_RELATION, CorruptionKind.TARGET_TAIL,
)

POSITIVE = "positive"


def _check_vocabulary(graph: KnowledgeGraph) -> None:
    for kind, size in (("entities", graph.num_entities), ("relations", graph.num_relations),
                       ("triples", len(graph.triples))):
        if size < 2:
            raise VocabularyTooSmallError(graph.language, kind, size)


def _different(rng: np.random.Generator, size: int, current: int) -> int:
    """Uniform index in 0..size-1 other than `current`"""
    drawn = int(rng.integers(size - 1))
    return drawn + 1 if drawn >= current else drawn


def _replace(triple: Triple, position: int, value: int) -> Triple:
    values = list(triple)
    values[position] = value
    return Triple(*values)


class TwaVerifierService:
    """Service class for triple-wise alignment verification"""

    # ========================================================================
    # CASE GENERATION
    # ========================================================================

    @staticmethod
    def generate_negatives(
        positives: Sequence[AlignedPair],
        kb: MultilingualKB,
        pair: LanguagePair,
        seed: int
    ) -> List[LabeledCase]:
        """
        Positives plus corrupted negatives at a 1 : 1 : 0.5 mix

        `positives` hold (triple in pair[0], triple in pair[1]). Output order:
        positives, then type (i) negatives (one per positive, in positive
        order), then ceil(n / 2) type (ii) negatives. A corruption equal to
        any positive is re-drawn.

        Raises:
            InsufficientCasesError: no positives, or re-sampling exhausted
            VocabularyTooSmallError: fewer than 2 entities, relations or triples
        """
        if not positives:
            raise InsufficientCasesError("no positive aligned pairs to corrupt")
        graphs = (kb.graph(pair[0]), kb.graph(pair[1]))
        for graph in graphs:
            _check_vocabulary(graph)

        rng = derive_rng(seed, Stream.NEGATIVES)
        positive_set: Set[AlignedPair] = set(map(tuple, positives))
        max_attempts = settings.negative_max_attempts

        def draw(make) -> Tuple[AlignedPair, CorruptionKind]:
            for _ in range(max_attempts):
                candidate, kind = make()
                if candidate not in positive_set:
                    return candidate, kind
            raise InsufficientCasesError("could not draw a corruption distinct from every positive",
                                         attempts=max_attempts)

        def element_corruption(positive: AlignedPair):
            def make():
                slot = int(rng.integers(6))
                side, position = divmod(slot, 3)
                graph = graphs[side]
                size = graph.num_relations if position == 1 else graph.num_entities
                triples = list(positive)
                triples[side] = _replace(triples[side], position,
                                         _different(rng, size, triples[side][position]))
                return (triples[0], triples[1]), _ELEMENT_KINDS[slot]
            return make

        def triple_substitution(positive: AlignedPair):
            def make():
                side = int(rng.integers(2))
                pool = graphs[side].triples
                replacement = pool[int(rng.integers(len(pool)))]
                while replacement == positive[side]:
                    replacement = pool[int(rng.integers(len(pool)))]
                triples = list(positive)
                triples[side] = replacement
                kind = CorruptionKind.SOURCE_TRIPLE if side == 0 else CorruptionKind.TARGET_TRIPLE
                return (triples[0], triples[1]), kind
            return make

        cases = [LabeledCase(source=s, target=t, label=True) for s, t in positives]
        for positive in positives:
            (s, t), kind = draw(element_corruption(positive))
            cases.append(LabeledCase(source=s, target=t, label=False, corruption=kind))

        n_substituted = math.ceil(len(positives) / 2)
        for index in rng.choice(len(positives), size=n_substituted, replace=False):
            (s, t), kind = draw(triple_substitution(positives[int(index)]))
            cases.append(LabeledCase(source=s, target=t, label=False, corruption=kind))

        logger.info("TWA cases generated",
                    extra={"pair": f"{pair[0]}-{pair[1]}", "positives": len(positives),
                           "element_negatives": len(positives), "triple_negatives": n_substituted})
        return cases

    # ========================================================================
    # SCORING
    # ========================================================================

    @staticmethod
    def dissimilarity(model: Model, pair: AlignedPair, direction: LanguagePair) -> float:
        """
        f_d of (T in direction[0], T' in direction[1]); always L2

        No symmetry is implied: swapping the pair only gives the same value
        for identity transitions.
        """
        return float(TwaVerifierService._dissimilarities(model, [pair], direction)[0])

    @staticmethod
    def _dissimilarities(model: Model, pairs: Sequence[AlignedPair], direction: LanguagePair) -> np.ndarray:
        source, target = direction
        src, tgt = model.space(source), model.space(target)
        left = np.asarray([p[0] for p in pairs], dtype=np.int64).reshape(-1, 3)
        right = np.asarray([p[1] for p in pairs], dtype=np.int64).reshape(-1, 3)

        def residual(moved: np.ndarray, fixed: np.ndarray) -> np.ndarray:
            diff = moved - fixed
            return np.sqrt(np.sum(diff * diff, axis=1))

        heads = AlignmentModel.transit_entity(model, source, target, src.entity_vecs[left[:, 0]])
        relations = AlignmentModel.transit_relation(model, source, target, src.relation_vecs[left[:, 1]])
        tails = AlignmentModel.transit_entity(model, source, target, src.entity_vecs[left[:, 2]])
        return (residual(heads, tgt.entity_vecs[right[:, 0]])
                + residual(relations, tgt.relation_vecs[right[:, 1]])
                + residual(tails, tgt.entity_vecs[right[:, 2]]))

    @staticmethod
    def score_cases(model: Model, cases: Sequence[LabeledCase], direction: LanguagePair) -> np.ndarray:
        """f_d of every case, computed once and shared by all folds"""
        if not cases:
            return np.zeros(0)
        return TwaVerifierService._dissimilarities(model, [c.pair for c in cases], direction)

    # ========================================================================
    # THRESHOLD CLASSIFIER
    # ========================================================================

    @staticmethod
    def candidate_thresholds(scores: Sequence[float]) -> np.ndarray:
        """min - 1, midpoints between consecutive distinct scores, max + 1 (ascending)"""
        distinct = np.unique(np.asarray(scores, dtype=np.float64))
        return np.concatenate([[distinct[0] - 1.0], (distinct[:-1] + distinct[1:]) / 2.0, [distinct[-1] + 1.0]])

    @staticmethod
    def threshold_accuracy(scores: Sequence[float], labels: Sequence[bool], sigma: float) -> float:
        """Fraction of cases where (score < sigma) equals the label"""
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels, dtype=bool)
        return float(accuracy_score(labels, scores < sigma))

    @staticmethod
    def fit_threshold(scores: Sequence[float], labels: Sequence[bool]) -> float:
        """
        sigma maximizing training accuracy of (score < sigma -> positive)

        Sweeps every candidate threshold; ties go to the smallest sigma.

        Raises:
            InsufficientCasesError: labels are all positive or all negative
        """
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels, dtype=bool)
        if len(scores) != len(labels):
            raise ValidationError("scores and labels differ in length", error_code="LENGTH_MISMATCH")
        if labels.all() or not labels.any():
            raise InsufficientCasesError("threshold fitting needs both positive and negative cases")

        distinct = np.unique(scores)
        candidates = TwaVerifierService.candidate_thresholds(distinct)
        n_negative = int(np.count_nonzero(~labels))
        # Candidate j > 0 predicts positive exactly for scores <= distinct[j - 1]
        positives_below = np.searchsorted(np.sort(scores[labels]), distinct, side="right")
        negatives_below = np.searchsorted(np.sort(scores[~labels]), distinct, side="right")
        correct = np.concatenate([[n_negative], positives_below + n_negative - negatives_below])
        return float(candidates[int(np.argmax(correct))])

    # ========================================================================
    # CROSS-VALIDATION
    # ========================================================================

    @staticmethod
    def fold_assignment(labels: np.ndarray, folds: int, seed: int) -> List[np.ndarray]:
        """
        Seeded split into `folds` near-equal folds

        Re-shuffles (next attempt counter) until every training split holds
        both labels.
        """
        n = len(labels)
        for attempt in range(settings.cv_max_reshuffles):
            state = int(derive_rng(seed, Stream.CROSS_VALIDATION, attempt).integers(2 ** 32))
            splitter = KFold(n_splits=folds, shuffle=True, random_state=state)
            parts = [held for _, held in splitter.split(np.zeros(n))]
            balanced = True
            for held in parts:
                train = np.ones(n, dtype=bool)
                train[held] = False
                if labels[train].all() or not labels[train].any():
                    balanced = False
                    break
            if balanced:
                return parts
        raise InsufficientCasesError("no fold assignment gives every training split both labels",
                                     attempts=settings.cv_max_reshuffles)

    @staticmethod
    def cross_validate_scores(
        scores: Sequence[float],
        labels: Sequence[bool],
        folds: int = 10,
        seed: int = 0,
        kinds: Optional[Sequence[Optional[CorruptionKind]]] = None
    ) -> CvReport:
        """
        k-fold CV of the threshold classifier over precomputed scores

        Raises:
            ValidationError: folds < 2
            InsufficientCasesError: fewer cases than folds, or no usable split
        """
        if folds < 2:
            raise ValidationError("Cross-validation needs at least 2 folds", error_code="INVALID_FOLDS",
                                  details={"folds": folds})
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels, dtype=bool)
        if len(scores) < folds:
            raise InsufficientCasesError("fewer cases than folds", cases=len(scores), folds=folds)

        parts = TwaVerifierService.fold_assignment(labels, folds, seed)
        hits = np.zeros(len(scores), dtype=bool)
        accuracies: List[float] = []
        thresholds: List[float] = []
        for held in parts:
            train = np.ones(len(scores), dtype=bool)
            train[held] = False
            sigma = TwaVerifierService.fit_threshold(scores[train], labels[train])
            predicted = scores[held] < sigma
            hits[held] = predicted == labels[held]
            thresholds.append(sigma)
            accuracies.append(float(accuracy_score(labels[held], predicted)))

        by_kind: Dict[str, List[bool]] = defaultdict(list)
        if kinds is not None:
            for kind, hit in zip(kinds, hits):
                by_kind[POSITIVE if kind is None else kind.value].append(bool(hit))
        report = CvReport.from_folds(
            accuracies, thresholds,
            {kind: sum(values) / len(values) for kind, values in sorted(by_kind.items())}
        )
        logger.info("Cross-validation finished",
                    extra={"folds": folds, "cases": len(scores), "mean": report.mean, "std_dev": report.std_dev})
        return report

    @staticmethod
    def cross_validate(
        cases: Sequence[LabeledCase],
        model: Model,
        direction: LanguagePair,
        folds: int = 10,
        seed: int = 0
    ) -> CvReport:
        """Score the cases under the model, then run k-fold CV of the threshold classifier"""
        if len(cases) < folds:
            raise InsufficientCasesError("fewer cases than folds", cases=len(cases), folds=folds)
        scores = TwaVerifierService.score_cases(model, cases, direction)
        return TwaVerifierService.cross_validate_scores(
            scores, [c.label for c in cases], folds, seed, [c.corruption for c in cases]
        )
