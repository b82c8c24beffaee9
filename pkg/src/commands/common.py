"""
Shared argument handling for the commands: run config, model directory,
norm resolution and report output.
"""
import argparse
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterable, Iterator, IO, Optional

from src.config.settings import settings
from src.core.exceptions import ValidationError
from src.models.embedding import Model
from src.models.enums import NormOrder
from src.models.graph import KnowledgeGraph
from src.schemas.run_config import RunConfig
from src.services.embedding_store import EmbeddingStoreService
from src.utils.tsv import write_lines


def load_config(args: argparse.Namespace, required: bool = False) -> Optional[RunConfig]:
    path = getattr(args, "config", None)
    if path is None:
        if required:
            raise ValidationError("--config is required for this command", error_code="MISSING_CONFIG")
        return None
    return RunConfig.from_file(path, overrides={"threads": getattr(args, "threads", None)})


def resolve_model_dir(args: argparse.Namespace, config: Optional[RunConfig]) -> Path:
    """--model, else <output_dir>/model of the run config"""
    if getattr(args, "model", None):
        return Path(args.model)
    if config is not None:
        return config.model_dir
    raise ValidationError("Either --model or --config is required", error_code="MISSING_MODEL")


def load_model(args: argparse.Namespace, config: Optional[RunConfig]) -> Model:
    return EmbeddingStoreService.load_model(resolve_model_dir(args, config))


def resolve_norm(args: argparse.Namespace, config: Optional[RunConfig]) -> NormOrder:
    """--norm, else the run config's training norm, else the settings default"""
    if getattr(args, "norm", None):
        return NormOrder.parse(args.norm)
    if config is not None:
        return config.train.norm
    return NormOrder.parse(settings.default_norm)


def resolve_threads(args: argparse.Namespace) -> int:
    return getattr(args, "threads", None) or settings.default_threads


def vocabulary_graphs(model: Model) -> Dict[str, KnowledgeGraph]:
    """Triple-less graphs over the model's stored vocabularies, for label resolution"""
    return {code: model.spaces[code].vocabulary_graph() for code in model.languages}


@contextmanager
def report_stream(args: argparse.Namespace) -> Iterator[IO[str]]:
    """--output file, else standard output"""
    output = getattr(args, "output", None)
    if output is None:
        yield sys.stdout
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        yield handle


def emit(args: argparse.Namespace, lines: Iterable[str]) -> None:
    with report_stream(args) as stream:
        write_lines(lines, stream)


def add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Run config file (key<TAB>value)")
    parser.add_argument("--model", help="Model directory (default: <output_dir>/model of --config)")
    parser.add_argument("--norm", choices=["L1", "L2"], help="Ranking norm (default: training norm)")
    parser.add_argument("--output", help="Write the report here instead of standard output")
