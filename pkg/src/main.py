"""
mtranse - multilingual knowledge graph embeddings

    mtranse [--log-level LEVEL] [--threads N] train CONFIG
    mtranse eval match|pr|twa|tail|rel|complete|pca [flags]
    mtranse stats CONFIG

Reports go to standard output (or --output), logs and diagnostics to
standard error. Exit codes: 0 success, 1 internal error, 2 invalid input,
3 missing input, 4 bad model directory, 5 numerical failure.
"""
import argparse
import sys
from typing import List, Optional

from src.commands import eval as eval_command
from src.commands import stats as stats_command
from src.commands import train as train_command
from src.core.logging import setup_logging
from src.middleware.error_handler import EXIT_USAGE, run_command


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtranse",
        description="Train and evaluate multilingual knowledge graph embeddings"
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: from settings)")
    parser.add_argument("--threads", type=int, help="Worker threads (1 is the determinism reference)")

    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    train_command.register(subparsers)
    eval_command.register(subparsers)
    stats_command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_USAGE if exc.code else 0
    if args.threads is not None and args.threads < 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write("error[USAGE]: --threads must be at least 1\n")
        return EXIT_USAGE

    setup_logging(args.log_level)
    command = args.command if args.command != "eval" else f"eval {args.task}"
    return run_command(args.handler, args, command)


if __name__ == "__main__":
    sys.exit(main())
