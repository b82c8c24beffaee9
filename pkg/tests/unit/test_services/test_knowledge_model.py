"""
Unit Tests for Knowledge Model Service
Tests the TransE score and its gradient

Test Coverage:
- triple_score: exact composition + hand-computed L1 / L2 values
- triple_grad: central finite differences (L2) at k in {2, 8, 32}
- L1 subgradient: sign vector, zero on zero coordinates
- batch_scores agrees with triple_score
"""
import numpy as np
import pytest

from src.models.embedding import EmbeddingSpace
from src.models.enums import NormOrder
from src.models.graph import Triple
from src.services.knowledge_model import KnowledgeModel, norm_grad


# ============================================================================
# FIXTURES
# ============================================================================

def space_of(entities, relations):
    return EmbeddingSpace("en", np.asarray(entities, dtype=np.float64), np.asarray(relations, dtype=np.float64))


def central_difference(f, x, step=1e-6):
    grad = np.zeros_like(x)
    for i in range(len(x)):
        plus, minus = x.copy(), x.copy()
        plus[i] += step
        minus[i] -= step
        grad[i] = (f(plus) - f(minus)) / (2 * step)
    return grad


def relative_error(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)


# ============================================================================
# SCORES
# ============================================================================

def test_score_zero_for_exact_translation():
    space = space_of([[1.0, 0.0], [0.0, 1.0]], [[-1.0, 1.0]])

    assert KnowledgeModel.triple_score(space, Triple(0, 0, 1), NormOrder.L2) == 0.0


def test_score_hand_computed_l1_and_l2():
    """h + r - t = (3, -4)"""
    space = space_of([[1.0, 0.0], [0.0, 2.0]], [[2.0, -2.0]])
    triple = Triple(0, 0, 1)

    assert KnowledgeModel.triple_score(space, triple, NormOrder.L2) == pytest.approx(5.0)
    assert KnowledgeModel.triple_score(space, triple, NormOrder.L1) == pytest.approx(7.0)


def test_batch_scores_match_single_scores():
    rng = np.random.default_rng(0)
    space = space_of(rng.normal(size=(6, 4)), rng.normal(size=(3, 4)))
    triples = np.array([[0, 1, 2], [3, 0, 5], [4, 2, 4]])

    for norm in NormOrder:
        batch = KnowledgeModel.batch_scores(space, triples, norm)
        single = [KnowledgeModel.triple_score(space, Triple(*t), norm) for t in triples.tolist()]
        np.testing.assert_allclose(batch, single, rtol=1e-12)


# ============================================================================
# GRADIENTS
# ============================================================================

@pytest.mark.parametrize("k", [2, 8, 32])
def test_l2_gradient_matches_finite_differences(k):
    rng = np.random.default_rng(k)
    for _ in range(100):
        h, r, t = rng.normal(size=(3, k))

        grad = KnowledgeModel.grad_vectors(h, r, t, NormOrder.L2)

        numeric_h = central_difference(lambda x: KnowledgeModel.score_vectors(x, r, t, NormOrder.L2), h)
        numeric_r = central_difference(lambda x: KnowledgeModel.score_vectors(h, x, t, NormOrder.L2), r)
        numeric_t = central_difference(lambda x: KnowledgeModel.score_vectors(h, r, x, NormOrder.L2), t)
        assert relative_error(grad.d_h, numeric_h) < 1e-4
        assert relative_error(grad.d_r, numeric_r) < 1e-4
        assert relative_error(grad.d_t, numeric_t) < 1e-4


def test_gradient_relation_d_h_equals_d_r_equals_minus_d_t():
    rng = np.random.default_rng(1)
    h, r, t = rng.normal(size=(3, 5))

    grad = KnowledgeModel.grad_vectors(h, r, t, NormOrder.L2)

    np.testing.assert_array_equal(grad.d_h, grad.d_r)
    np.testing.assert_array_equal(grad.d_h, -grad.d_t)


def test_l1_subgradient_is_sign_with_zero_on_ties():
    d = np.array([2.0, -0.5, 0.0])

    np.testing.assert_array_equal(norm_grad(d, NormOrder.L1), [1.0, -1.0, 0.0])


def test_l2_gradient_at_zero_residual_is_zero():
    np.testing.assert_array_equal(norm_grad(np.zeros(3), NormOrder.L2), np.zeros(3))
