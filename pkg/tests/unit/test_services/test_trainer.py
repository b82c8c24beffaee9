"""
Unit Tests for Trainer Service
Tests single SGD steps, epoch structure and determinism

Test Coverage:
- sgd_step_knowledge: decreases the score for a small step, projects h and t, leaves r free
- the worked two-dimensional step, and a single triple driven monotonically below 0.05
- project_relations keeps touched relation vectors on the unit sphere
- Var3 on two fully aligned copies of a two-entity graph learns the translation
- sgd_step_alignment: updates exactly the variant's parameters, invalidates the LU cache
- zero step (alpha = 0) is a bitwise no-op
- train: norm constraint after every epoch, epoch reports, progress TSV
- alpha = 0 decouples the languages from the alignment pass
- determinism in seed, threads > 1 equals threads = 1
- validation before any work
"""
import io

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from src.core.exceptions import ValidationError
from src.models.embedding import EmbeddingSpace, Model
from src.models.enums import NormOrder, Variant
from src.models.graph import AlignmentSet, KnowledgeGraph, MultilingualKB, Triple
from src.schemas.train import TrainConfig
from src.services.alignment_model import AlignmentModel
from src.services.embedding_store import EmbeddingStoreService
from src.services.knowledge_model import KnowledgeModel
from src.services.synthetic_kb import SyntheticKbService
from src.services.trainer import TrainerService


# ============================================================================
# FIXTURES
# ============================================================================

@pytest.fixture
def small_kb():
    return SyntheticKbService.isomorphic_bilingual(num_entities=12, num_relations=3, num_triples=30,
                                                   aligned_fraction=0.5, seed=1).kb


def config(**overrides):
    values = dict(variant="var4", k=6, learning_rate=0.01, alpha=5.0, norm="L2", epochs=3, seed=11)
    values.update(overrides)
    return TrainConfig(**values)


def snapshot(model):
    arrays = {}
    for code, space in model.spaces.items():
        arrays[f"{code}.e"] = space.entity_vecs.copy()
        arrays[f"{code}.r"] = space.relation_vecs.copy()
    for pair, transition in model.transitions.items():
        for name, value in transition.parameters().items():
            arrays[f"{pair}.{name}"] = value.copy()
    return arrays


def assert_same(first, second):
    assert first.keys() == second.keys()
    for key in first:
        assert np.array_equal(first[key], second[key]), key


# ============================================================================
# SINGLE STEPS
# ============================================================================

def single_triple_model(entity_vecs, relation_vecs):
    space = EmbeddingSpace("en", np.array(entity_vecs, dtype=float), np.array(relation_vecs, dtype=float))
    return Model(variant=Variant.VAR1, k=space.k, spaces={"en": space})


def two_entity_kb():
    triple = Triple(0, 0, 1)
    graphs = {code: KnowledgeGraph(code, (f"{code}:a", f"{code}:b"), (f"{code}:r",), (triple,))
              for code in ("en", "fr")}
    return MultilingualKB(graphs=graphs, alignments={("en", "fr"): AlignmentSet(("en", "fr"), ((triple, triple),))})


def test_knowledge_step_reduces_score_and_projects(small_kb):
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR1, 6, seed=0)
    triple = small_kb.graphs["en"].triples[0]
    space = model.space("en")
    before_r = space.relation_vecs[triple.relation].copy()

    before = TrainerService.sgd_step_knowledge(model, "en", triple, 0.01, NormOrder.L2)
    after = KnowledgeModel.triple_score(space, triple, NormOrder.L2)

    assert after < before
    assert np.linalg.norm(space.entity_vecs[triple.head]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(space.entity_vecs[triple.tail]) == pytest.approx(1.0, abs=1e-12)
    assert not np.array_equal(space.relation_vecs[triple.relation], before_r)


@pytest.mark.parametrize("variant", list(Variant))
def test_alignment_step_reduces_score(small_kb, variant):
    model = EmbeddingStoreService.init_model(small_kb, variant, 6, seed=0)
    aligned = small_kb.alignments[("en", "fr")].pairs[0]

    before = TrainerService.sgd_step_alignment(model, ("en", "fr"), aligned, 0.001, 1.0, NormOrder.L2)
    after = AlignmentModel.alignment_score(model, ("en", "fr"), aligned, NormOrder.L2)

    assert after < before


def test_alignment_step_touches_only_variant_parameters(small_kb):
    """Var1 has no relation term: relation vectors must not move"""
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR1, 6, seed=0)
    aligned = small_kb.alignments[("en", "fr")].pairs[0]
    relations = {code: model.space(code).relation_vecs.copy() for code in ("en", "fr")}

    TrainerService.sgd_step_alignment(model, ("en", "fr"), aligned, 0.01, 5.0, NormOrder.L2)

    for code in ("en", "fr"):
        assert np.array_equal(model.space(code).relation_vecs, relations[code])


def test_alignment_step_invalidates_inverse_cache(small_kb):
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR4, 6, seed=0)
    aligned = small_kb.alignments[("en", "fr")].pairs[0]
    vector = np.ones(6)
    AlignmentModel.transit_entity(model, "fr", "en", vector)

    TrainerService.sgd_step_alignment(model, ("en", "fr"), aligned, 0.1, 5.0, NormOrder.L2)
    moved = AlignmentModel.transit_entity(model, "fr", "en", vector)

    np.testing.assert_allclose(model.transitions[("en", "fr")].M_e @ moved, vector, atol=1e-8)


def test_zero_alpha_step_is_bitwise_noop(small_kb):
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR5, 6, seed=0)
    aligned = small_kb.alignments[("en", "fr")].pairs[0]
    before = snapshot(model)

    TrainerService.sgd_step_alignment(model, ("en", "fr"), aligned, 0.01, 0.0, NormOrder.L2)

    assert_same(before, snapshot(model))


# ============================================================================
# TRAINING
# ============================================================================

@pytest.mark.parametrize("norm", ["L1", "L2"])
def test_train_keeps_entities_on_unit_sphere(small_kb, norm):
    _, reports = TrainerService.train(small_kb, config(norm=norm, variant="var5"))

    assert [r.epoch for r in reports] == [1, 2, 3]
    assert all(r.max_entity_norm_drift <= 1e-6 for r in reports)


def test_train_writes_one_progress_line_per_epoch(small_kb):
    progress = io.StringIO()

    _, reports = TrainerService.train(small_kb, config(), progress)

    lines = progress.getvalue().splitlines()
    assert len(lines) == 3
    fields = lines[0].split("\t")
    assert fields[0] == "1"
    assert float(fields[1]) == pytest.approx(reports[0].mean_knowledge_score, abs=1e-6)
    assert float(fields[2]) == pytest.approx(reports[0].mean_alignment_score, abs=1e-6)


def test_train_knowledge_score_decreases(small_kb):
    _, reports = TrainerService.train(small_kb, config(epochs=30, learning_rate=0.05, alpha=0.0))

    assert reports[-1].mean_knowledge_score < reports[0].mean_knowledge_score


def test_train_is_deterministic_in_seed(small_kb):
    first, _ = TrainerService.train(small_kb, config())
    second, _ = TrainerService.train(small_kb, config())

    assert_same(snapshot(first), snapshot(second))


def test_train_threads_match_single_thread(small_kb):
    single, _ = TrainerService.train(small_kb, config(threads=1))
    pooled, _ = TrainerService.train(small_kb, config(threads=4))

    assert_same(snapshot(single), snapshot(pooled))


def test_zero_alpha_matches_run_without_alignments(small_kb):
    """Per-language spaces after alpha = 0 equal a run whose KB has no alignment at all"""
    coupled, _ = TrainerService.train(small_kb, config(variant="var1", alpha=0.0))
    bare_kb = MultilingualKB(graphs=small_kb.graphs)
    bare, _ = TrainerService.train(bare_kb, config(variant="var1", alpha=0.0))

    for code in ("en", "fr"):
        assert np.array_equal(coupled.space(code).entity_vecs, bare.space(code).entity_vecs)
        assert np.array_equal(coupled.space(code).relation_vecs, bare.space(code).relation_vecs)


def test_zero_epochs_returns_initial_model(small_kb):
    model, reports = TrainerService.train(small_kb, config(epochs=0))
    initial = EmbeddingStoreService.init_model(small_kb, Variant.VAR4, 6, seed=11)

    assert reports == []
    assert_same(snapshot(model), snapshot(initial))


def test_train_matrix_variant_without_alignment_rejected(small_kb):
    bare_kb = MultilingualKB(graphs=small_kb.graphs)

    with pytest.raises(ValidationError):
        TrainerService.train(bare_kb, config(variant="var4"))


def test_train_config_rejects_invalid_values():
    with pytest.raises(PydanticValidationError):
        config(learning_rate=0.0)
    with pytest.raises(PydanticValidationError):
        config(k=0)
    with pytest.raises(PydanticValidationError):
        config(alpha=-1.0)


def test_same_head_and_tail_triple_stays_projected(small_kb):
    """A self-loop updates one row twice before projection"""
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR1, 6, seed=0)

    TrainerService.sgd_step_knowledge(model, "en", Triple(0, 0, 0), 0.5, NormOrder.L2)

    assert np.linalg.norm(model.space("en").entity_vecs[0]) == pytest.approx(1.0, abs=1e-12)


def test_knowledge_step_worked_example():
    model = single_triple_model([[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0]])
    step = 0.1 * np.array([1.0, -1.0]) / np.sqrt(2.0)

    score = TrainerService.sgd_step_knowledge(model, "en", Triple(0, 0, 1), 0.1, NormOrder.L2)

    space = model.space("en")
    head = np.array([1.0, 0.0]) - step
    tail = np.array([0.0, 1.0]) + step
    assert score == pytest.approx(np.sqrt(2.0))
    np.testing.assert_allclose(space.entity_vecs[0], head / np.linalg.norm(head), atol=1e-12)
    np.testing.assert_allclose(space.entity_vecs[1], tail / np.linalg.norm(tail), atol=1e-12)
    np.testing.assert_allclose(space.relation_vecs[0], -step, atol=1e-12)


def test_single_triple_score_falls_monotonically_below_threshold():
    """Each step removes 3 * lambda along the residual; projection gives back at most 2 * lambda"""
    rng = np.random.default_rng(3)
    model = single_triple_model(EmbeddingStoreService.sample_unit_sphere(rng, 2, 8),
                                EmbeddingStoreService.sample_unit_sphere(rng, 1, 8))

    scores = [TrainerService.sgd_step_knowledge(model, "en", Triple(0, 0, 1), 0.005, NormOrder.L2)
              for _ in range(1000)]

    first_below = next(i for i, s in enumerate(scores) if s < 0.05)
    assert all(b < a for a, b in zip(scores[:first_below], scores[1:first_below + 1]))
    assert all(s < 0.05 for s in scores[first_below:])


def test_project_relations_keeps_touched_relations_on_sphere(small_kb):
    model = EmbeddingStoreService.init_model(small_kb, Variant.VAR5, 6, seed=0)
    triple = small_kb.graphs["en"].triples[0]
    aligned = small_kb.alignments[("en", "fr")].pairs[0]

    TrainerService.sgd_step_knowledge(model, "en", triple, 0.3, NormOrder.L2, project_relations=True)
    TrainerService.sgd_step_alignment(model, ("en", "fr"), aligned, 0.1, 5.0, NormOrder.L2,
                                      project_relations=True)

    assert np.linalg.norm(model.space("en").relation_vecs[triple.relation]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(model.space("en").relation_vecs[aligned[0].relation]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(model.space("fr").relation_vecs[aligned[1].relation]) == pytest.approx(1.0, abs=1e-12)


def test_train_with_project_relations_keeps_every_relation_on_sphere(small_kb):
    model, _ = TrainerService.train(small_kb, config(variant="var5", project_relations=True))

    for code in ("en", "fr"):
        norms = np.linalg.norm(model.space(code).relation_vecs, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_translation_variant_aligns_two_entity_copies():
    kb = two_entity_kb()

    model, _ = TrainerService.train(kb, config(variant="var3", k=4, learning_rate=0.0005, alpha=5.0,
                                               epochs=4000, shuffle=False))

    en, fr = model.space("en"), model.space("fr")
    v_e = model.transitions[("en", "fr")].v_e
    for entity in (0, 1):
        assert np.linalg.norm(en.entity_vecs[entity] + v_e - fr.entity_vecs[entity]) < 0.05
