"""
Unit Tests for Evaluator Service
Tests ranking, entity matching, PR data, monolingual prediction, completion and PCA

Test Coverage:
- rank_target: worked example + tie-break by index + brute-force sort oracle
- RankReport aggregates (Hits@10, Mean)
- entity_matching: identical spaces give Hits@10 = 100, Mean = 1; empty ILL error
- pr_points / pr_curve: saturation, empty prediction, hand example, monotonicity
- tail / relation prediction: exact composition + exhaustive oracle
- complete_triple: exhaustive oracle on a 4-entity fixture, query validation
- pca_project: low-rank data, orthogonal ordered columns, degenerate data
"""
import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from src.core.exceptions import DegenerateDataError, EmptyInputError, ResolutionError, ValidationError
from src.models.embedding import EmbeddingSpace, Model, TransitionParams
from src.models.enums import NormOrder, Variant
from src.models.graph import IllSet, Triple
from src.schemas.evaluation import CompletionQuery, RankReport
from src.services.evaluator import EvaluatorService


# ============================================================================
# FIXTURES
# ============================================================================

def oracle_rank(query, candidates, target, norm):
    dist = [float(np.sum(np.abs(c - query))) if norm is NormOrder.L1 else float(np.sqrt(np.sum((c - query) ** 2)))
            for c in candidates]
    order = sorted(range(len(candidates)), key=lambda i: (dist[i], i))
    return order.index(target) + 1


def identity_model(en_entities, fr_entities, en_relations=None, fr_relations=None, variant=Variant.VAR1,
                   en_labels=(), fr_labels=(), en_rel_labels=(), fr_rel_labels=()):
    en_entities = np.asarray(en_entities, dtype=np.float64)
    fr_entities = np.asarray(fr_entities, dtype=np.float64)
    k = en_entities.shape[1]
    en_relations = np.zeros((1, k)) if en_relations is None else np.asarray(en_relations, dtype=np.float64)
    fr_relations = np.zeros((1, k)) if fr_relations is None else np.asarray(fr_relations, dtype=np.float64)
    spaces = {
        "en": EmbeddingSpace("en", en_entities, en_relations, tuple(en_labels), tuple(en_rel_labels)),
        "fr": EmbeddingSpace("fr", fr_entities, fr_relations, tuple(fr_labels), tuple(fr_rel_labels)),
    }
    return Model(variant=variant, k=k, spaces=spaces,
                 transitions={("en", "fr"): TransitionParams(direction=("en", "fr"), variant=variant)})


@pytest.fixture
def completion_model():
    """
    4 entities in a 2-D plane, identity transitions

    en: Italy (0,0), Rome (1,0), France (0,1), Paris (1,1); capital = (1,0)
    fr: same coordinates, relations capitale (1,0) and voisin (0,1)
    """
    points = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    return identity_model(
        points, points,
        en_relations=[[1.0, 0.0]], fr_relations=[[1.0, 0.0], [0.0, 1.0]],
        en_labels=("Italy", "Rome", "France", "Paris"),
        fr_labels=("Italie", "Rome", "France", "Paris"),
        en_rel_labels=("capital",), fr_rel_labels=("capitale", "voisin"),
    )


# ============================================================================
# RANKING PRIMITIVES
# ============================================================================

def test_rank_target_worked_example():
    query = np.array([0.9, 0.5])
    candidates = np.array([[1.0, 0.0], [0.0, 1.0], [0.8, 0.6]])

    ranks = [EvaluatorService.rank_target(query, candidates, t, NormOrder.L2) for t in range(3)]

    assert ranks == [2, 3, 1]


def test_rank_target_exact_match_is_first():
    candidates = np.array([[0.0, 1.0], [2.0, 3.0], [5.0, 5.0]])

    assert EvaluatorService.rank_target(candidates[1], candidates, 1, NormOrder.L1) == 1


def test_rank_target_ties_broken_by_index():
    candidates = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    query = np.zeros(2)

    assert EvaluatorService.rank_target(query, candidates, 0, NormOrder.L2) == 1
    assert EvaluatorService.rank_target(query, candidates, 1, NormOrder.L2) == 2
    assert EvaluatorService.rank_target(query, candidates, 2, NormOrder.L2) == 3


@pytest.mark.parametrize("norm", list(NormOrder))
def test_rank_target_matches_sort_oracle(norm):
    rng = np.random.default_rng(0)
    for n in (1, 2, 7, 50, 300, 1000):
        # Rounded coordinates produce exact ties
        candidates = np.round(rng.normal(size=(n, 3)), 1)
        query = np.round(rng.normal(size=3), 1)
        for target in rng.integers(n, size=5):
            assert EvaluatorService.rank_target(query, candidates, int(target), norm) == \
                oracle_rank(query, candidates, int(target), norm)


def test_rank_report_aggregates():
    report = RankReport.from_ranks([1, 5, 11, 200])

    assert report.hits_at_10 == 50.0
    assert report.mean_rank == 54.25
    assert report.hits_at_1 == 25.0
    assert report.to_tsv_lines()[-2:] == ["HITS@10\t50.00", "MEAN\t54.25"]
    assert report.to_tsv_lines(with_hits_at_1=True)[-3:] == ["HITS@10\t50.00", "HITS@1\t25.00", "MEAN\t54.25"]


# ============================================================================
# ENTITY MATCHING
# ============================================================================

def test_entity_matching_identical_spaces_perfect_scores():
    rng = np.random.default_rng(1)
    vectors = rng.normal(size=(20, 4))
    model = identity_model(vectors, vectors.copy())
    ill = IllSet("en", "fr", tuple((i, i) for i in range(20)))

    report = EvaluatorService.entity_matching(model, ill, NormOrder.L2)

    assert report.hits_at_10 == 100.0
    assert report.mean_rank == 1.0
    assert report.ranks == [1] * 20


def test_entity_matching_aggregates_match_raw_ranks():
    rng = np.random.default_rng(2)
    model = identity_model(rng.normal(size=(30, 3)), rng.normal(size=(30, 3)))
    ill = IllSet("en", "fr", tuple((i, (i * 7) % 30) for i in range(30)))

    report = EvaluatorService.entity_matching(model, ill, NormOrder.L1, threads=3)

    assert report.hits_at_10 == 100.0 * sum(r <= 10 for r in report.ranks) / 30
    assert report.mean_rank == sum(report.ranks) / 30


def test_entity_matching_limit_and_empty_ill():
    model = identity_model(np.eye(3), np.eye(3))
    ill = IllSet("en", "fr", ((0, 0), (1, 1), (2, 2)))

    assert len(EvaluatorService.entity_matching(model, ill, NormOrder.L2, limit=2).ranks) == 2
    with pytest.raises(EmptyInputError):
        EvaluatorService.entity_matching(model, IllSet("en", "fr", ()), NormOrder.L2)


# ============================================================================
# PRECISION-RECALL
# ============================================================================

def test_pr_points_hand_example():
    """Nearest distances 0.1 (correct) and 0.5 (wrong), sigma 0.3"""
    points = EvaluatorService.pr_points(np.array([0.1, 0.5]), np.array([True, False]), [0.3])

    assert points[0].precision == 1.0
    assert points[0].recall == 0.5


def test_pr_points_empty_prediction_and_saturation():
    correct = np.array([True, False, True])

    low, high = EvaluatorService.pr_points(np.array([0.2, 0.4, 0.6]), correct, [0.0, 1e9])

    assert (low.predicted, low.precision, low.recall) == (0, 1.0, 0.0)
    assert high.recall == pytest.approx(2 / 3)
    assert high.precision == high.recall


def test_pr_curve_is_monotone_in_threshold():
    rng = np.random.default_rng(3)
    model = identity_model(rng.normal(size=(25, 3)), rng.normal(size=(25, 3)))
    ill = IllSet("en", "fr", tuple((i, i) for i in range(25)))

    points = EvaluatorService.pr_curve(model, ill, NormOrder.L2, np.linspace(0.0, 5.0, 40).tolist())

    recalls = [p.recall for p in points]
    predicted = [p.predicted for p in points]
    assert recalls == sorted(recalls)
    assert predicted == sorted(predicted)


def test_pr_curve_requires_sorted_thresholds():
    model = identity_model(np.eye(2), np.eye(2))
    ill = IllSet("en", "fr", ((0, 0),))

    with pytest.raises(ValidationError):
        EvaluatorService.pr_curve(model, ill, NormOrder.L2, [])
    with pytest.raises(ValidationError):
        EvaluatorService.pr_curve(model, ill, NormOrder.L2, [0.5, 0.1])


# ============================================================================
# MONOLINGUAL PREDICTION
# ============================================================================

def test_tail_and_relation_prediction_exact_composition(completion_model):
    test = [Triple(0, 0, 1), Triple(2, 0, 3)]

    tail = EvaluatorService.tail_prediction(completion_model, test, "en", NormOrder.L2)
    relation = EvaluatorService.relation_prediction(completion_model, test, "fr", NormOrder.L2)

    assert tail.ranks == [1, 1]
    assert relation.ranks == [1, 1]
    assert tail.queries[0] == ("Italy capital", "Rome")


def test_tail_prediction_matches_exhaustive_oracle():
    rng = np.random.default_rng(4)
    entities, relations = rng.normal(size=(3, 5)), rng.normal(size=(2, 5))
    model = identity_model(entities, entities, relations, relations)
    triple = Triple(2, 1, 0)

    report = EvaluatorService.tail_prediction(model, [triple], "en", NormOrder.L1)

    assert report.ranks == [oracle_rank(entities[2] + relations[1], entities, 0, NormOrder.L1)]


def test_relation_prediction_matches_exhaustive_oracle():
    rng = np.random.default_rng(5)
    entities, relations = rng.normal(size=(4, 3)), rng.normal(size=(6, 3))
    model = identity_model(entities, entities, relations, relations)

    report = EvaluatorService.relation_prediction(model, [Triple(1, 4, 3)], "en", NormOrder.L2)

    assert report.ranks == [oracle_rank(entities[3] - entities[1], relations, 4, NormOrder.L2)]


def test_monolingual_prediction_empty_test_set_raises(completion_model):
    with pytest.raises(EmptyInputError):
        EvaluatorService.tail_prediction(completion_model, [], "en", NormOrder.L2)


# ============================================================================
# TRIPLE COMPLETION
# ============================================================================

def test_complete_missing_tail_ranks_exact_answer_first(completion_model):
    query = CompletionQuery(head="Italy", relation="capital")

    candidates = EvaluatorService.complete_triple(completion_model, query, "en", "fr", NormOrder.L2, 4)

    assert candidates[0].label == "Rome"
    assert candidates[0].score == 0.0
    assert [c.rank for c in candidates] == [1, 2, 3, 4]


def test_complete_missing_relation_matches_exhaustive_scoring(completion_model):
    query = CompletionQuery(head="France", tail="Paris")

    candidates = EvaluatorService.complete_triple(completion_model, query, "en", "fr", NormOrder.L2, 2)

    fr = completion_model.space("fr")
    query_vec = fr.entity_vecs[3] - fr.entity_vecs[2]
    scores = [float(np.linalg.norm(r - query_vec)) for r in fr.relation_vecs]
    expected = sorted(range(2), key=lambda i: (scores[i], i))
    assert [c.index for c in candidates] == expected
    assert candidates[0].label == "capitale"


def test_complete_missing_head_matches_exhaustive_scoring(completion_model):
    query = CompletionQuery(relation="capital", tail="Paris")

    candidates = EvaluatorService.complete_triple(completion_model, query, "en", "fr", NormOrder.L1, 4)

    fr = completion_model.space("fr")
    query_vec = fr.entity_vecs[3] - np.array([1.0, 0.0])
    scores = [float(np.sum(np.abs(e - query_vec))) for e in fr.entity_vecs]
    assert [c.index for c in candidates] == sorted(range(4), key=lambda i: (scores[i], i))
    assert candidates[0].label == "France"


def test_completion_query_needs_exactly_one_unknown():
    with pytest.raises(PydanticValidationError):
        CompletionQuery(head="Italy", relation="capital", tail="Rome")
    with pytest.raises(PydanticValidationError):
        CompletionQuery(head="Italy")


def test_complete_unknown_label_raises(completion_model):
    with pytest.raises(ResolutionError):
        EvaluatorService.complete_triple(completion_model, CompletionQuery(head="Spain", relation="capital"),
                                         "en", "fr", NormOrder.L2, 3)


# ============================================================================
# PCA
# ============================================================================

def test_pca_preserves_pairwise_distances_of_planar_data():
    rng = np.random.default_rng(6)
    plane = rng.normal(size=(8, 2))
    basis, _ = np.linalg.qr(rng.normal(size=(6, 2)))
    embedded = plane @ basis.T + rng.normal(size=6)

    projected = EvaluatorService.pca_project(embedded, 2)

    def pairwise(x):
        return np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2)
    np.testing.assert_allclose(pairwise(projected), pairwise(plane), atol=1e-9)


def test_pca_columns_orthogonal_and_ordered():
    rng = np.random.default_rng(7)
    data = rng.normal(size=(10, 5)) * np.array([5.0, 3.0, 1.0, 0.5, 0.1])

    projected = EvaluatorService.pca_project(data, 3)

    gram = projected.T @ projected
    np.testing.assert_allclose(gram - np.diag(np.diag(gram)), 0.0, atol=1e-9)
    variances = np.diag(gram)
    assert list(variances) == sorted(variances, reverse=True)


def test_pca_rank2_reconstruction_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(8)
    data = rng.normal(size=(10, 5))
    centered = data - data.mean(axis=0)
    eigenvalues = np.linalg.eigvalsh(centered.T @ centered)

    projected = EvaluatorService.pca_project(data, 2)

    reconstruction_error = np.sum(centered ** 2) - np.sum(projected ** 2)
    assert reconstruction_error == pytest.approx(float(np.sum(eigenvalues[:-2])), abs=1e-8)


def test_pca_collinear_second_component_vanishes():
    data = np.outer(np.arange(6.0), [1.0, 2.0, -1.0])

    projected = EvaluatorService.pca_project(data, 2)

    np.testing.assert_allclose(projected[:, 1], 0.0, atol=1e-9)


def test_pca_sign_convention():
    data = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [6.0, 1e-3]])

    projected = EvaluatorService.pca_project(data, 1)

    assert projected[-1, 0] > 0


def test_pca_degenerate_and_invalid_inputs():
    with pytest.raises(DegenerateDataError):
        EvaluatorService.pca_project(np.ones((4, 3)), 2)
    with pytest.raises(ValidationError):
        EvaluatorService.pca_project(np.ones((1, 3)), 2)
    with pytest.raises(ValidationError):
        EvaluatorService.pca_project(np.eye(3), 4)


def test_pca_export_by_label(completion_model):
    rows = EvaluatorService.pca_export(completion_model, "en", ["Rome", "Paris", "Italy"])

    assert [row[0] for row in rows] == ["Rome", "Paris", "Italy"]
    assert all(len(row) == 3 for row in rows)
