"""
`mtranse eval <task>` - evaluation reports from a saved model

Tasks:
    match     cross-lingual entity matching   source<TAB>gold<TAB>rank, HITS@10, MEAN
    pr        precision-recall data           threshold<TAB>precision<TAB>recall
    twa       triple-wise alignment CV        fold<TAB>sigma<TAB>accuracy, MEAN, STD
    tail      monolingual tail prediction     RankReport TSV (with HITS@1)
    rel       monolingual relation prediction RankReport TSV (with HITS@1)
    complete  cross-lingual triple completion rank<TAB>label<TAB>score
    pca       PCA export                      label<TAB>x<TAB>y
"""
import argparse
from pathlib import Path
from typing import List, Optional

from src.commands.common import (
    add_model_arguments, emit, load_config, load_model, resolve_norm, resolve_threads, vocabulary_graphs
)
from src.core.exceptions import MissingInputError, ValidationError
from src.models.embedding import Model
from src.models.enums import EvalTask
from src.models.graph import IllSet
from src.schemas.evaluation import CompletionQuery
from src.schemas.run_config import RunConfig
from src.services.evaluator import EvaluatorService
from src.services.kg_loader import GraphLoaderService
from src.services.twa_verifier import TwaVerifierService
from src.utils.tsv import iter_fields


def _ills(args: argparse.Namespace, config: Optional[RunConfig], model: Model) -> IllSet:
    """ILLs from --ills, else the run config's ILL file for the direction"""
    path = args.ills
    if path is None and config is not None:
        path = next((p for s, t, p in config.ills if (s, t) == (args.source, args.target)), None)
    if path is None:
        raise ValidationError(f"No ILL file for {args.source}->{args.target}; pass --ills",
                              error_code="MISSING_ILLS")
    return GraphLoaderService.load_ills(path, (args.source, args.target), vocabulary_graphs(model))


def _parse_thresholds(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--thresholds must be comma-separated numbers, got '{text}'",
                              error_code="INVALID_THRESHOLDS", details={"thresholds": text}) from exc


def _test_file(args: argparse.Namespace, config: Optional[RunConfig]) -> Path:
    if args.test:
        return Path(args.test)
    if config is not None:
        return config.output_dir / f"test.{args.language}.tsv"
    raise ValidationError("Pass --test or --config", error_code="MISSING_TEST_SET")


# ============================================================================
# HANDLERS
# ============================================================================

def cmd_match(args: argparse.Namespace) -> None:
    config = load_config(args)
    model = load_model(args, config)
    report = EvaluatorService.entity_matching(model, _ills(args, config, model), resolve_norm(args, config),
                                              limit=args.limit, threads=resolve_threads(args))
    emit(args, report.to_tsv_lines())


def cmd_pr(args: argparse.Namespace) -> None:
    config = load_config(args)
    model = load_model(args, config)
    ill = _ills(args, config, model)
    norm = resolve_norm(args, config)
    nearest_dist, nearest_idx, gold = EvaluatorService.nearest_neighbors(model, ill, norm, args.limit)
    if args.thresholds:
        thresholds = _parse_thresholds(args.thresholds)
    else:
        thresholds = EvaluatorService.threshold_grid(nearest_dist, args.steps)
    points = EvaluatorService.pr_points(nearest_dist, nearest_idx == gold, thresholds)
    emit(args, [p.to_tsv() for p in points])


def cmd_twa(args: argparse.Namespace) -> None:
    config = load_config(args, required=True)
    model = load_model(args, config)
    source, target = args.pair
    kb = GraphLoaderService.load_kb(config.languages)
    cases_path = Path(args.cases) if args.cases else None
    if cases_path is None:
        first, second = sorted((source, target))
        cases_path = config.output_dir / f"twa.{first}-{second}.tsv"
    if not cases_path.is_file():
        raise MissingInputError(str(cases_path))

    held = GraphLoaderService.load_alignment(cases_path, (source, target), kb.graphs)
    positives = [p if held.pair[0] == source else (p[1], p[0]) for p in held.pairs]
    seed = config.train.seed if args.seed is None else args.seed
    cases = TwaVerifierService.generate_negatives(positives, kb, (source, target), seed)
    report = TwaVerifierService.cross_validate(cases, model, (source, target), folds=args.folds, seed=seed)

    lines = report.to_tsv_lines()
    if args.by_corruption:
        lines += [f"{kind}\t{accuracy:.4f}" for kind, accuracy in report.corruption_accuracy.items()]
    emit(args, lines)


def _monolingual(args: argparse.Namespace, relation: bool) -> None:
    config = load_config(args)
    model = load_model(args, config)
    graph = model.space(args.language).vocabulary_graph()
    test = GraphLoaderService.load_test_triples(_test_file(args, config), graph)
    task = EvaluatorService.relation_prediction if relation else EvaluatorService.tail_prediction
    report = task(model, test, args.language, resolve_norm(args, config), threads=resolve_threads(args))
    emit(args, report.to_tsv_lines(with_hits_at_1=True))


def cmd_tail(args: argparse.Namespace) -> None:
    _monolingual(args, relation=False)


def cmd_rel(args: argparse.Namespace) -> None:
    _monolingual(args, relation=True)


def cmd_complete(args: argparse.Namespace) -> None:
    config = load_config(args)
    model = load_model(args, config)
    try:
        query = CompletionQuery(head=args.h, relation=args.r, tail=args.t)
    except ValueError as exc:
        raise ValidationError("Exactly one of --h, --r, --t must be omitted",
                              error_code="INVALID_COMPLETION_QUERY") from exc
    candidates = EvaluatorService.complete_triple(model, query, args.source, args.target,
                                                  resolve_norm(args, config), args.top)
    emit(args, [c.to_tsv() for c in candidates])


def cmd_pca(args: argparse.Namespace) -> None:
    config = load_config(args)
    model = load_model(args, config)
    labels: List[str] = list(args.entities or [])
    if args.entities_file:
        labels += [fields[0] for _, fields in iter_fields(args.entities_file, arity=1)]
    rows = EvaluatorService.pca_export(model, args.language, labels or None, out_dim=args.dim)
    emit(args, ["\t".join([row[0], *(f"{x:.6f}" for x in row[1:])]) for row in rows])


# ============================================================================
# PARSERS
# ============================================================================

def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a saved model")
    tasks = parser.add_subparsers(dest="task", metavar="task", required=True)

    match = tasks.add_parser(EvalTask.MATCH.value, help="Cross-lingual entity matching")
    pr = tasks.add_parser(EvalTask.PR.value, help="Precision-recall data of entity matching")
    for sub in (match, pr):
        add_model_arguments(sub)
        sub.add_argument("--source", required=True)
        sub.add_argument("--target", required=True)
        sub.add_argument("--ills", help="ILL file source<TAB>target (default: from --config)")
        sub.add_argument("--limit", type=int, help="Evaluate only the first N links")
    match.set_defaults(handler=cmd_match)
    pr.add_argument("--thresholds", help="Comma-separated ascending thresholds")
    pr.add_argument("--steps", type=int, default=20, help="Evenly spaced thresholds when --thresholds is absent")
    pr.set_defaults(handler=cmd_pr)

    twa = tasks.add_parser(EvalTask.TWA.value, help="Triple-wise alignment verification (k-fold CV)")
    add_model_arguments(twa)
    twa.add_argument("--pair", nargs=2, required=True, metavar=("SOURCE", "TARGET"))
    twa.add_argument("--cases", help="Held-out aligned pairs, 6 fields (default: <output_dir>/twa.<a>-<b>.tsv)")
    twa.add_argument("--seed", type=int)
    twa.add_argument("--folds", type=int, default=10)
    twa.add_argument("--by-corruption", action="store_true", help="Append held-out accuracy per corruption kind")
    twa.set_defaults(handler=cmd_twa)

    for task, handler, text in ((EvalTask.TAIL, cmd_tail, "Monolingual tail prediction"),
                                (EvalTask.REL, cmd_rel, "Monolingual relation prediction")):
        sub = tasks.add_parser(task.value, help=text)
        add_model_arguments(sub)
        sub.add_argument("--language", required=True)
        sub.add_argument("--test", help="Test triple file (default: <output_dir>/test.<lang>.tsv)")
        sub.set_defaults(handler=handler)

    complete = tasks.add_parser(EvalTask.COMPLETE.value, help="Cross-lingual triple completion")
    add_model_arguments(complete)
    complete.add_argument("--from", dest="source", required=True)
    complete.add_argument("--to", dest="target", required=True)
    complete.add_argument("--h")
    complete.add_argument("--r")
    complete.add_argument("--t")
    complete.add_argument("--top", type=int, default=10)
    complete.set_defaults(handler=cmd_complete)

    pca = tasks.add_parser(EvalTask.PCA.value, help="PCA export of entity vectors")
    add_model_arguments(pca)
    pca.add_argument("--language", required=True)
    pca.add_argument("--entities", nargs="*", help="Entity labels to project (default: all)")
    pca.add_argument("--entities-file", help="File with one entity label per line")
    pca.add_argument("--dim", type=int, default=2)
    pca.set_defaults(handler=cmd_pca)
