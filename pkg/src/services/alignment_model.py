"""
Alignment Model Service
Cross-lingual alignment scores S_a1..S_a5, their gradients and the transitions tau

Variants:
    Var1  ||h - h'|| + ||t - t'||
    Var2  ||h - h'|| + ||r - r'|| + ||t - t'||
    Var3  ||h + v_e - h'|| + ||r + v_r - r'|| + ||t + v_e - t'||
    Var4  ||M_e h - h'|| + ||M_e t - t'||
    Var5  ||M_e h - h'|| + ||M_r r - r'|| + ||M_e t - t'||

Transitions (forward = stored canonical direction):
    Var1/Var2  tau(x) = x
    Var3       tau(e) = e + v_e, reverse e - v_e (v_ji = -v_ij); relations use v_r
    Var4/Var5  tau(e) = M_e e, reverse M_e^{-1} e via a cached LU factorization;
               relations use M_e (Var4) or M_r (Var5)
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import lu_solve

from src.models.embedding import Model, TransitionParams
from src.models.enums import NormOrder, Variant
from src.models.graph import AlignedPair, LanguageId, LanguagePair
from src.services.knowledge_model import norm_grad, norm_of


@dataclass(frozen=True)
class AlignedPairScoreCtx:
    """Vectors of one aligned pair: source triple (h, r, t) and target triple (h2, r2, t2)"""
    h: np.ndarray
    r: np.ndarray
    t: np.ndarray
    h2: np.ndarray
    r2: np.ndarray
    t2: np.ndarray
    transition: TransitionParams


@dataclass(frozen=True)
class AlignmentGrad:
    """
    Gradient of an alignment score

    Triple-vector gradients are always present (zero when a term is absent);
    transition gradients only for the parameters the variant owns.
    """
    d_h: np.ndarray
    d_r: np.ndarray
    d_t: np.ndarray
    d_h2: np.ndarray
    d_r2: np.ndarray
    d_t2: np.ndarray
    d_v_e: Optional[np.ndarray] = None
    d_v_r: Optional[np.ndarray] = None
    d_M_e: Optional[np.ndarray] = None
    d_M_r: Optional[np.ndarray] = None

    def parameter_grad(self, name: str) -> Optional[np.ndarray]:
        return getattr(self, f"d_{name}")


class AlignmentModel:
    """
    Scores, gradients and transitions of the alignment model

    Pure functions over read-only parameters; the only shared state is the
    LU cache inside TransitionParams, which is lock-protected.
    """

    # ========================================================================
    # TRANSITIONS
    # ========================================================================

    @staticmethod
    def _apply(transition: TransitionParams, forward: bool, x: np.ndarray,
               vector: Optional[np.ndarray], matrix_name: Optional[str]) -> np.ndarray:
        """Shared body of transit_entity / transit_relation for 1-D or row-stacked 2-D x"""
        variant = transition.variant
        if variant in (Variant.VAR1, Variant.VAR2):
            return np.array(x, dtype=np.float64, copy=True)
        if variant is Variant.VAR3:
            return x + vector if forward else x - vector
        matrix = getattr(transition, matrix_name)
        if forward:
            return x @ matrix.T if x.ndim == 2 else matrix @ x
        factor = transition.lu(matrix_name)
        if x.ndim == 2:
            return lu_solve(factor, x.T).T
        return lu_solve(factor, x)

    @staticmethod
    def transit_entity(model: Model, source: LanguageId, target: LanguageId, e: np.ndarray) -> np.ndarray:
        """
        tau_{source -> target} of entity vector(s) e (shape (k,) or (n, k))

        Raises:
            UnknownPairError: no transition between the languages
            SingularTransitionError: reverse direction of a singular matrix
        """
        transition, forward = model.transition(source, target)
        return AlignmentModel._apply(transition, forward, np.asarray(e, dtype=np.float64),
                                     transition.v_e, "M_e")

    @staticmethod
    def transit_relation(model: Model, source: LanguageId, target: LanguageId, r: np.ndarray) -> np.ndarray:
        """tau_{source -> target} of relation vector(s) r; Var4 reuses M_e"""
        transition, forward = model.transition(source, target)
        matrix_name = "M_r" if transition.variant is Variant.VAR5 else "M_e"
        return AlignmentModel._apply(transition, forward, np.asarray(r, dtype=np.float64),
                                     transition.v_r, matrix_name)

    # ========================================================================
    # SCORES
    # ========================================================================

    @staticmethod
    def residuals(ctx: AlignedPairScoreCtx, variant: Variant) -> Tuple[np.ndarray, Optional[np.ndarray], np.ndarray]:
        """(head, relation, tail) residuals; relation is None for Var1/Var4"""
        tr = ctx.transition
        if variant is Variant.VAR1:
            return ctx.h - ctx.h2, None, ctx.t - ctx.t2
        if variant is Variant.VAR2:
            return ctx.h - ctx.h2, ctx.r - ctx.r2, ctx.t - ctx.t2
        if variant is Variant.VAR3:
            return ctx.h + tr.v_e - ctx.h2, ctx.r + tr.v_r - ctx.r2, ctx.t + tr.v_e - ctx.t2
        if variant is Variant.VAR4:
            return tr.M_e @ ctx.h - ctx.h2, None, tr.M_e @ ctx.t - ctx.t2
        return tr.M_e @ ctx.h - ctx.h2, tr.M_r @ ctx.r - ctx.r2, tr.M_e @ ctx.t - ctx.t2

    @staticmethod
    def score_ctx(ctx: AlignedPairScoreCtx, variant: Variant, norm: NormOrder) -> float:
        d_h, d_r, d_t = AlignmentModel.residuals(ctx, variant)
        score = norm_of(d_h, norm) + norm_of(d_t, norm)
        if d_r is not None:
            score += norm_of(d_r, norm)
        return score

    @staticmethod
    def grad_ctx(ctx: AlignedPairScoreCtx, variant: Variant, norm: NormOrder) -> AlignmentGrad:
        """
        Exact (sub)gradients of the variant's score

        With g_x the norm gradient of residual x:
            Var1-3  d_x = g_x, d_x' = -g_x; Var3 also d_v_e = g_h + g_t, d_v_r = g_r
            Var4/5  d_x = M^T g_x, d_x' = -g_x, d_M_e = g_h h^T + g_t t^T, d_M_r = g_r r^T
        """
        d_h, d_r, d_t = AlignmentModel.residuals(ctx, variant)
        g_h = norm_grad(d_h, norm)
        g_t = norm_grad(d_t, norm)
        g_r = norm_grad(d_r, norm) if d_r is not None else np.zeros_like(ctx.r)
        tr = ctx.transition

        if variant in (Variant.VAR1, Variant.VAR2, Variant.VAR3):
            grad = dict(d_h=g_h, d_r=g_r, d_t=g_t, d_h2=-g_h, d_r2=-g_r, d_t2=-g_t)
            if variant is Variant.VAR3:
                grad.update(d_v_e=g_h + g_t, d_v_r=g_r.copy())
            return AlignmentGrad(**grad)

        m_e = tr.M_e
        grad = dict(
            d_h=m_e.T @ g_h,
            d_t=m_e.T @ g_t,
            d_h2=-g_h,
            d_t2=-g_t,
            d_M_e=np.outer(g_h, ctx.h) + np.outer(g_t, ctx.t),
        )
        if variant is Variant.VAR5:
            grad.update(d_r=tr.M_r.T @ g_r, d_r2=-g_r, d_M_r=np.outer(g_r, ctx.r))
        else:
            grad.update(d_r=np.zeros_like(ctx.r), d_r2=np.zeros_like(ctx.r2))
        return AlignmentGrad(**grad)

    @staticmethod
    def context(model: Model, pair: LanguagePair, aligned: AlignedPair) -> AlignedPairScoreCtx:
        """
        Gather vectors for an aligned pair

        `aligned` is (triple in pair[0], triple in pair[1]); a pair given
        against the stored direction is turned around.
        """
        transition, forward = model.transition(pair[0], pair[1])
        source_triple, target_triple = aligned if forward else (aligned[1], aligned[0])
        first, second = transition.direction
        src, tgt = model.space(first), model.space(second)
        return AlignedPairScoreCtx(
            h=src.entity_vecs[source_triple[0]],
            r=src.relation_vecs[source_triple[1]],
            t=src.entity_vecs[source_triple[2]],
            h2=tgt.entity_vecs[target_triple[0]],
            r2=tgt.relation_vecs[target_triple[1]],
            t2=tgt.entity_vecs[target_triple[2]],
            transition=transition,
        )

    @staticmethod
    def alignment_score(model: Model, pair: LanguagePair, aligned: AlignedPair, norm: NormOrder,
                        variant: Optional[Variant] = None) -> float:
        """S_a of one aligned pair under the model's (or the given) variant"""
        ctx = AlignmentModel.context(model, pair, aligned)
        return AlignmentModel.score_ctx(ctx, variant or model.variant, norm)

    @staticmethod
    def alignment_grad(model: Model, pair: LanguagePair, aligned: AlignedPair, norm: NormOrder,
                       variant: Optional[Variant] = None) -> AlignmentGrad:
        """Gradient of alignment_score; triple gradients refer to the stored direction"""
        ctx = AlignmentModel.context(model, pair, aligned)
        return AlignmentModel.grad_ctx(ctx, variant or model.variant, norm)
