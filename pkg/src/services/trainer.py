"""
Trainer Service
Alternating online SGD on J = S_K + alpha * S_A with unit-sphere entity projection

Epoch structure (knowledge_steps = alignment_steps = 1 by default):
    1. knowledge group: per language, one shuffled pass of per-triple steps
       theta <- theta - lambda * grad S_K
    2. alignment group: one shuffled pass over every aligned pair of every
       alignment set, theta <- theta - lambda * alpha * grad S_a
Every update that touches an entity vector re-projects it onto the unit
sphere. Relation vectors are left free unless `project_relations` is set;
translation vectors and matrices are always free.
No negative sampling, no mini-batches, constant learning rate.

Determinism: all shuffles come from seed-derived streams, one per
(epoch, language, pass), so the knowledge group may run languages on a
thread pool (disjoint parameters) and still match the single-thread run.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from typing import IO, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ValidationError, ZeroVectorError
from src.core.logging import get_logger, log_condition, log_epoch
from src.models.embedding import EmbeddingSpace, Model
from src.models.enums import NormOrder
from src.models.graph import AlignedPair, LanguageId, LanguagePair, MultilingualKB, Triple
from src.schemas.train import EpochReport, TrainConfig
from src.services.alignment_model import AlignmentModel
from src.services.embedding_store import EmbeddingStoreService
from src.services.knowledge_model import norm_grad, norm_of
from src.utils.seeding import Stream, derive_rng

logger = get_logger(__name__)


class Resampler:
    """Seeded source of replacement unit vectors for projections of a zero vector"""

    def __init__(self, seed: int, counter: int = 0):
        self._rng = derive_rng(seed, Stream.RERANDOMIZE, counter)

    def draw(self, k: int) -> np.ndarray:
        return EmbeddingStoreService.sample_unit_sphere(self._rng, 1, k)[0]


def _project_rows(space: EmbeddingSpace, rows: Iterable[int], resampler: Optional[Resampler],
                  kind: str = "entity") -> None:
    vecs = space.entity_vecs if kind == "entity" else space.relation_vecs
    for row in set(rows):
        try:
            vecs[row] = EmbeddingStoreService.project_to_sphere(vecs[row])
        except ZeroVectorError:
            resampler = resampler or Resampler(0)
            vecs[row] = resampler.draw(space.k)
            logger.warning(f"{kind.capitalize()} vector collapsed to zero; re-randomized",
                           extra={"language": space.language, kind: int(row)})


class TrainerService:
    """
    Service class for model training

    The trainer is the single writer of a Model while train() runs.
    """

    # ========================================================================
    # SINGLE STEPS
    # ========================================================================

    @staticmethod
    def sgd_step_knowledge(
        model: Model,
        language: LanguageId,
        triple: Triple,
        learning_rate: float,
        norm: NormOrder,
        resampler: Optional[Resampler] = None,
        project_relations: bool = False
    ) -> float:
        """
        One SGD step on ||h + r - t||; returns the score before the step

        h and t are re-projected; r only with `project_relations`. A zero
        step (lambda = 0 or a zero gradient) leaves every parameter untouched.
        """
        space = model.space(language)
        h, r, t = triple
        d = space.entity_vecs[h] + space.relation_vecs[r] - space.entity_vecs[t]
        score = norm_of(d, norm)
        if learning_rate == 0.0 or score == 0.0:
            return score
        step = learning_rate * norm_grad(d, norm)
        space.entity_vecs[h] -= step
        space.relation_vecs[r] -= step
        space.entity_vecs[t] += step
        _project_rows(space, (h, t), resampler)
        if project_relations:
            _project_rows(space, (r,), resampler, kind="relation")
        return score

    @staticmethod
    def sgd_step_alignment(
        model: Model,
        pair: LanguagePair,
        aligned: AlignedPair,
        learning_rate: float,
        alpha: float,
        norm: NormOrder,
        resampler: Optional[Resampler] = None,
        project_relations: bool = False
    ) -> float:
        """
        One SGD step on alpha * S_a; returns the score before the step

        Updates every parameter in the variant's gradient set by
        -lambda * alpha * gradient, then re-projects the four entity vectors
        (and the two relation vectors with `project_relations`).
        """
        ctx = AlignmentModel.context(model, pair, aligned)
        variant = model.variant
        score = AlignmentModel.score_ctx(ctx, variant, norm)
        step = learning_rate * alpha
        if step == 0.0 or score == 0.0:
            return score
        grad = AlignmentModel.grad_ctx(ctx, variant, norm)

        transition, forward = model.transition(pair[0], pair[1])
        source_triple, target_triple = aligned if forward else (aligned[1], aligned[0])
        src = model.space(transition.direction[0])
        tgt = model.space(transition.direction[1])

        src.entity_vecs[source_triple[0]] -= step * grad.d_h
        src.entity_vecs[source_triple[2]] -= step * grad.d_t
        tgt.entity_vecs[target_triple[0]] -= step * grad.d_h2
        tgt.entity_vecs[target_triple[2]] -= step * grad.d_t2
        if variant.uses_relations:
            src.relation_vecs[source_triple[1]] -= step * grad.d_r
            tgt.relation_vecs[target_triple[1]] -= step * grad.d_r2

        for name in variant.parameter_names:
            getattr(transition, name)[...] -= step * grad.parameter_grad(name)
        if variant.uses_matrices:
            transition.invalidate()

        _project_rows(src, (source_triple[0], source_triple[2]), resampler)
        _project_rows(tgt, (target_triple[0], target_triple[2]), resampler)
        if project_relations and variant.uses_relations:
            _project_rows(src, (source_triple[1],), resampler, kind="relation")
            _project_rows(tgt, (target_triple[1],), resampler, kind="relation")
        return score

    # ========================================================================
    # PASSES
    # ========================================================================

    @staticmethod
    def _knowledge_pass(model: Model, language: LanguageId, triples: Sequence[Triple],
                        order: np.ndarray, cfg: TrainConfig, resampler: Resampler) -> Tuple[float, int]:
        total = 0.0
        for index in order:
            total += TrainerService.sgd_step_knowledge(
                model, language, triples[index], cfg.learning_rate, cfg.norm, resampler,
                cfg.project_relations
            )
        return total, len(order)

    @staticmethod
    def _alignment_scores(model: Model, items: Sequence[Tuple[LanguagePair, AlignedPair]],
                          norm: NormOrder) -> float:
        return sum(AlignmentModel.alignment_score(model, pair, aligned, norm) for pair, aligned in items)

    # ========================================================================
    # TRAINING
    # ========================================================================

    @staticmethod
    def validate(kb: MultilingualKB, cfg: TrainConfig) -> None:
        """
        Check a run can start

        Raises:
            ValidationError: empty KB, or a variant with transition
                parameters but no non-empty alignment set
        """
        if not kb.graphs:
            raise ValidationError("Knowledge base has no graphs", error_code="EMPTY_KB")
        if cfg.variant.parameter_names and not kb.aligned_pairs():
            raise ValidationError(
                message=f"{cfg.variant.value} trains transition parameters but no alignment set is non-empty",
                error_code="NO_ALIGNMENT",
                details={"variant": cfg.variant.value}
            )

    @staticmethod
    def train(
        kb: MultilingualKB,
        cfg: TrainConfig,
        progress: Optional[IO[str]] = None
    ) -> Tuple[Model, List[EpochReport]]:
        """
        Train a model for cfg.epochs epochs

        Args:
            kb: knowledge base (graphs + alignment sets)
            cfg: hyperparameters
            progress: optional text stream receiving one
                `epoch<TAB>S_K_mean<TAB>S_A_mean<TAB>wall_ms` line per epoch

        Returns:
            (trained model, one EpochReport per epoch)
        """
        TrainerService.validate(kb, cfg)
        model = EmbeddingStoreService.init_model(kb, cfg.variant, cfg.k, cfg.seed)

        languages = kb.languages
        triples = {code: kb.graphs[code].triples for code in languages}
        items: List[Tuple[LanguagePair, AlignedPair]] = [
            (pair, aligned) for pair in kb.aligned_pairs() for aligned in kb.alignments[pair].pairs
        ]
        resamplers = {code: Resampler(cfg.seed, i) for i, code in enumerate(languages)}
        alignment_resampler = Resampler(cfg.seed, len(languages))
        train_alignment = cfg.alpha > 0.0 and bool(items)

        logger.info(
            "Training started",
            extra={"variant": cfg.variant.value, "k": cfg.k, "learning_rate": cfg.learning_rate,
                   "alpha": cfg.alpha, "norm": cfg.norm.value, "epochs": cfg.epochs, "seed": cfg.seed,
                   "languages": languages, "aligned_pairs": len(items), "threads": cfg.threads,
                   "project_relations": cfg.project_relations}
        )

        def order_for(n: int, *counters: int) -> np.ndarray:
            if not cfg.shuffle:
                return np.arange(n)
            return derive_rng(cfg.seed, *counters).permutation(n)

        reports: List[EpochReport] = []
        executor = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
        try:
            for epoch in range(1, cfg.epochs + 1):
                started = time.perf_counter()

                knowledge_total, knowledge_count = 0.0, 0
                for step_group in range(cfg.knowledge_steps):
                    jobs = [
                        (code, order_for(len(triples[code]), Stream.KNOWLEDGE_SHUFFLE, epoch, i, step_group))
                        for i, code in enumerate(languages)
                    ]

                    def run(job):
                        code, order = job
                        return TrainerService._knowledge_pass(model, code, triples[code], order, cfg,
                                                              resamplers[code])

                    results = list(executor.map(run, jobs)) if executor else [run(job) for job in jobs]
                    for total, count in results:
                        knowledge_total += total
                        knowledge_count += count

                alignment_total, alignment_count = 0.0, 0
                if train_alignment:
                    for step_group in range(cfg.alignment_steps):
                        for index in order_for(len(items), Stream.ALIGNMENT_SHUFFLE, epoch, step_group):
                            pair, aligned = items[index]
                            alignment_total += TrainerService.sgd_step_alignment(
                                model, pair, aligned, cfg.learning_rate, cfg.alpha, cfg.norm,
                                alignment_resampler, cfg.project_relations
                            )
                            alignment_count += 1
                elif items:
                    alignment_total = TrainerService._alignment_scores(model, items, cfg.norm)
                    alignment_count = len(items)

                wall = time.perf_counter() - started
                report = EpochReport(
                    epoch=epoch,
                    mean_knowledge_score=knowledge_total / knowledge_count if knowledge_count else 0.0,
                    mean_alignment_score=alignment_total / alignment_count if alignment_count else 0.0,
                    max_entity_norm_drift=model.entity_norm_drift(),
                    wall_time=wall,
                )
                reports.append(report)
                log_epoch(epoch, report.mean_knowledge_score, report.mean_alignment_score,
                          report.max_entity_norm_drift, wall * 1000.0)
                TrainerService._monitor_conditions(model, epoch)
                if progress is not None:
                    progress.write(report.to_tsv() + "\n")
                    progress.flush()
        finally:
            if executor:
                executor.shutdown(wait=True)

        logger.info("Training finished", extra={"epochs": cfg.epochs})
        return model, reports

    @staticmethod
    def _monitor_conditions(model: Model, epoch: int) -> None:
        """Log cond(M) of every transition matrix (invertibility is monitored, not enforced)"""
        if not model.variant.uses_matrices:
            return
        for (a, b), transition in sorted(model.transitions.items()):
            for name in model.variant.parameter_names:
                log_condition(f"{a}-{b}", name, float(np.linalg.cond(getattr(transition, name))), epoch)
