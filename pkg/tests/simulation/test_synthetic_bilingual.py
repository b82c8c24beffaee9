"""
Synthetic Bilingual Recovery - end-to-end training experiments

Two isomorphic random graphs (50 entities, 5 relations, 200 triples each).
Ten entities are held out; the 120 aligned triples avoid them and every
other triple touches one. Models are trained with lambda = 0.01, alpha = 5,
k = 20 for 200 epochs, relation vectors kept on the unit sphere, and then
evaluated:

- entity matching on the held-out identity ILLs (Var4 / Var5 Hits@10 >= 80,
  Var4 at least as good as Var1)
- TWA cross-validation on the never-aligned triple pairs (mean accuracy >= 0.9)
- randomly labelled scores stay near chance
- held-out tail prediction is within 10 points with and without alignment

Run only these with `pytest -m simulation`.
"""
import numpy as np
import pytest

from src.models.enums import NormOrder
from src.models.graph import MultilingualKB
from src.schemas.evaluation import RankReport
from src.schemas.train import TrainConfig
from src.services.evaluator import EvaluatorService
from src.services.kg_loader import GraphLoaderService
from src.services.synthetic_kb import SyntheticKbService
from src.services.trainer import TrainerService
from src.services.twa_verifier import TwaVerifierService
from src.utils.seeding import Stream, derive_rng

pytestmark = pytest.mark.simulation

PAIR = ("en", "fr")


# ============================================================================
# FIXTURES
# ============================================================================

@pytest.fixture(scope="module")
def synthetic():
    return SyntheticKbService.isomorphic_bilingual(num_entities=50, num_relations=5, num_triples=200,
                                                   aligned_fraction=0.6, seed=0)


def train(kb, variant, alpha=5.0):
    config = TrainConfig(variant=variant, k=20, learning_rate=0.01, alpha=alpha, norm="L2", epochs=200, seed=0,
                         project_relations=True)
    return TrainerService.train(kb, config)


@pytest.fixture(scope="module")
def trained(synthetic):
    return {variant: train(synthetic.kb, variant) for variant in ("var1", "var4", "var5")}


@pytest.fixture(scope="module")
def var4_cases(synthetic, trained):
    model, _ = trained["var4"]
    cases = TwaVerifierService.generate_negatives(list(synthetic.unaligned), synthetic.kb, PAIR, seed=0)
    return cases, TwaVerifierService.score_cases(model, cases, PAIR)


# ============================================================================
# ENTITY MATCHING
# ============================================================================

@pytest.mark.parametrize("variant", ["var4", "var5"])
def test_matrix_variants_recover_entity_alignment(synthetic, trained, variant):
    model, _ = trained[variant]

    report = EvaluatorService.entity_matching(model, synthetic.ill, NormOrder.L2)

    assert report.hits_at_10 >= 80.0


def test_var4_matches_or_beats_var1(synthetic, trained):
    var1 = EvaluatorService.entity_matching(trained["var1"][0], synthetic.ill, NormOrder.L2)
    var4 = EvaluatorService.entity_matching(trained["var4"][0], synthetic.ill, NormOrder.L2)

    assert var4.hits_at_10 >= var1.hits_at_10


def test_knowledge_loss_decreases(trained):
    _, reports = trained["var4"]

    assert reports[49].mean_knowledge_score < reports[0].mean_knowledge_score
    assert all(r.max_entity_norm_drift <= 1e-6 for r in reports)


# ============================================================================
# TRIPLE-WISE ALIGNMENT VERIFICATION
# ============================================================================

def test_twa_cross_validation_accuracy(var4_cases):
    cases, scores = var4_cases

    report = TwaVerifierService.cross_validate_scores(scores, [c.label for c in cases], folds=10, seed=0,
                                                      kinds=[c.corruption for c in cases])

    assert len(cases) == len(scores) == 80 + 80 + 40
    assert report.mean >= 0.9
    assert report.std_dev == pytest.approx(float(np.std(report.fold_accuracies)), abs=1e-12)


def test_twa_random_labels_near_chance(var4_cases):
    cases, scores = var4_cases
    labels = np.array([c.label for c in cases])
    np.random.default_rng(0).shuffle(labels)

    report = TwaVerifierService.cross_validate_scores(scores, labels, folds=10, seed=0)

    assert 0.45 <= report.mean <= 0.7


# ============================================================================
# MONOLINGUAL PRESERVATION
# ============================================================================

@pytest.fixture(scope="module")
def split_kb(synthetic):
    graphs, test = {}, {}
    for index, code in enumerate(PAIR):
        rng = derive_rng(0, Stream.MONOLINGUAL_SPLIT, index)
        graphs[code], test[code] = GraphLoaderService.split_triples(synthetic.kb.graphs[code], 0.1, rng)
    alignment = GraphLoaderService.restrict_alignment(synthetic.kb.alignments[PAIR], graphs)
    return MultilingualKB(graphs=graphs, alignments={PAIR: alignment}), test


def held_out_tail_prediction(model, test):
    ranks = []
    for code in PAIR:
        ranks += EvaluatorService.tail_prediction(model, test[code], code, NormOrder.L2).ranks
    return RankReport.from_ranks(ranks)


def test_alignment_does_not_shift_held_out_tail_prediction(split_kb):
    kb, test = split_kb
    coupled, _ = train(kb, "var4")
    decoupled, _ = train(kb, "var4", alpha=0.0)

    aligned = held_out_tail_prediction(coupled, test)
    baseline = held_out_tail_prediction(decoupled, test)

    assert len(aligned.ranks) == len(test["en"]) + len(test["fr"]) == 40
    assert abs(aligned.hits_at_10 - baseline.hits_at_10) <= 10.0
