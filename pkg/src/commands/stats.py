"""
`mtranse stats` - counts of the knowledge base declared by a run config
"""
import argparse

from src.commands.common import emit, load_config
from src.services.kg_loader import GraphLoaderService


def cmd_stats(args: argparse.Namespace) -> None:
    config = load_config(args, required=True)
    config.check_inputs()
    kb = GraphLoaderService.load_kb(config.languages, config.alignments, config.ills)
    emit(args, GraphLoaderService.graph_stats(kb).to_tsv_lines())


def register(subparsers) -> None:
    parser = subparsers.add_parser("stats", help="Print entity / relation / triple / alignment / ILL counts")
    parser.add_argument("config", help="Run config file (key<TAB>value)")
    parser.add_argument("--output", help="Write the table here instead of standard output")
    parser.set_defaults(handler=cmd_stats)
