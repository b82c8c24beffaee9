"""
Knowledge Model Service
TransE score ||h + r - t|| and its (sub)gradient for monolingual triples

All arithmetic is float64.
"""
from dataclasses import dataclass

import numpy as np

from src.models.embedding import EmbeddingSpace
from src.models.enums import NormOrder
from src.models.graph import Triple


@dataclass(frozen=True)
class TripleGrad:
    """Partial derivatives of ||h + r - t|| (d_h = d_r = -d_t)"""
    d_h: np.ndarray
    d_r: np.ndarray
    d_t: np.ndarray


def norm_of(d: np.ndarray, norm: NormOrder) -> float:
    """||d||_1 or ||d||_2"""
    if norm is NormOrder.L1:
        return float(np.sum(np.abs(d)))
    return float(np.sqrt(np.dot(d, d)))


def norm_grad(d: np.ndarray, norm: NormOrder) -> np.ndarray:
    """
    (Sub)gradient of ||d|| with respect to d

    L2: d / ||d||_2, zero at d = 0
    L1: sign(d), zero on zero coordinates
    """
    if norm is NormOrder.L1:
        return np.sign(d)
    length = np.sqrt(np.dot(d, d))
    if length == 0.0:
        return np.zeros_like(d)
    return d / length


class KnowledgeModel:
    """
    TransE scoring over one language's space

    Pure functions over read-only space data.
    """

    @staticmethod
    def residual(h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
        return h + r - t

    @staticmethod
    def score_vectors(h: np.ndarray, r: np.ndarray, t: np.ndarray, norm: NormOrder) -> float:
        return norm_of(h + r - t, norm)

    @staticmethod
    def grad_vectors(h: np.ndarray, r: np.ndarray, t: np.ndarray, norm: NormOrder) -> TripleGrad:
        g = norm_grad(h + r - t, norm)
        return TripleGrad(d_h=g, d_r=g.copy(), d_t=-g)

    @staticmethod
    def triple_score(space: EmbeddingSpace, triple: Triple, norm: NormOrder) -> float:
        """||h + r - t|| under the given norm"""
        h, r, t = triple
        return KnowledgeModel.score_vectors(
            space.entity_vecs[h], space.relation_vecs[r], space.entity_vecs[t], norm
        )

    @staticmethod
    def triple_grad(space: EmbeddingSpace, triple: Triple, norm: NormOrder) -> TripleGrad:
        """Gradient of triple_score with respect to h, r and t"""
        h, r, t = triple
        return KnowledgeModel.grad_vectors(
            space.entity_vecs[h], space.relation_vecs[r], space.entity_vecs[t], norm
        )

    @staticmethod
    def batch_scores(space: EmbeddingSpace, triples: np.ndarray, norm: NormOrder) -> np.ndarray:
        """Scores of an (n, 3) index array"""
        if len(triples) == 0:
            return np.zeros(0)
        d = (space.entity_vecs[triples[:, 0]] + space.relation_vecs[triples[:, 1]]
             - space.entity_vecs[triples[:, 2]])
        if norm is NormOrder.L1:
            return np.sum(np.abs(d), axis=1)
        return np.sqrt(np.sum(d * d, axis=1))
