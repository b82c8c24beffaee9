"""
`mtranse train` - train a model from a run config

Outputs under output_dir:
    model/              model directory (manifest, tensors, vocabularies)
    epochs.tsv          epoch<TAB>S_K_mean<TAB>S_A_mean<TAB>wall_ms
    test.<lang>.tsv     held-out monolingual triples (test_fraction > 0)
    twa.<a>-<b>.tsv     held-out aligned pairs, 6-field format (twa_holdout > 0)
"""
import argparse
from typing import Dict

from src.commands.common import load_config
from src.core.logging import get_logger
from src.models.graph import AlignmentSet, KnowledgeGraph, LanguagePair, MultilingualKB
from src.schemas.run_config import RunConfig
from src.services.embedding_store import EmbeddingStoreService
from src.services.kg_loader import GraphLoaderService
from src.services.trainer import TrainerService
from src.utils.seeding import Stream, derive_rng

logger = get_logger(__name__)


def prepare_kb(config: RunConfig) -> MultilingualKB:
    """
    Load the inputs and apply the protocol splits

    The monolingual hold-out keeps vocabularies whole and restricts every
    alignment set to pairs whose triples stay in training; the TWA
    hold-out removes its positives from alignment training.
    """
    kb = GraphLoaderService.load_kb(config.languages, config.alignments, config.ills)
    seed = config.train.seed
    output = config.output_dir
    graphs: Dict[str, KnowledgeGraph] = dict(kb.graphs)
    alignments: Dict[LanguagePair, AlignmentSet] = dict(kb.alignments)

    if config.test_fraction > 0:
        for index, code in enumerate(kb.languages):
            train_graph, test = GraphLoaderService.split_triples(
                kb.graphs[code], config.test_fraction, derive_rng(seed, Stream.MONOLINGUAL_SPLIT, index)
            )
            graphs[code] = train_graph
            GraphLoaderService.write_triples(kb.graphs[code], test, output / f"test.{code}.tsv")
            logger.info("Monolingual test set held out", extra={"language": code, "test_triples": len(test)})
        alignments = {pair: GraphLoaderService.restrict_alignment(a, graphs) for pair, a in alignments.items()}

    if config.twa_holdout > 0:
        for index, pair in enumerate(sorted(alignments)):
            train_alignment, held = GraphLoaderService.hold_out_alignment(
                alignments[pair], config.twa_holdout, derive_rng(seed, Stream.TWA_HOLDOUT, index)
            )
            alignments[pair] = train_alignment
            first, second = pair
            GraphLoaderService.write_alignment(held, graphs[first], graphs[second],
                                               output / f"twa.{first}-{second}.tsv")
            logger.info("TWA positives held out", extra={"pair": f"{first}-{second}", "positives": len(held)})

    return MultilingualKB(graphs=graphs, alignments=alignments, ills=list(kb.ills))


def cmd_train(args: argparse.Namespace) -> None:
    config = load_config(args, required=True)
    config.check_inputs()
    config.output_dir.mkdir(parents=True, exist_ok=True)

    kb = prepare_kb(config)
    with open(config.output_dir / "epochs.tsv", "w", encoding="utf-8", newline="\n") as progress:
        model, _ = TrainerService.train(kb, config.train, progress)
    EmbeddingStoreService.save_model(model, config.model_dir)
    logger.info("Run finished", extra={"output_dir": str(config.output_dir)})


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train a model from a run config")
    parser.add_argument("config", help="Run config file (key<TAB>value)")
    parser.set_defaults(handler=cmd_train)
