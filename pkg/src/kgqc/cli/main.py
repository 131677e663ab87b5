"""
kgqc command-line entry point.

Exit codes: 0 ok, 1 error, 2 question could not be mapped to any phrase.
"""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import TextIO

import structlog
from pydantic import ValidationError

from kgqc import __version__
from kgqc.cli import commands
from kgqc.config import Settings, get_settings
from kgqc.exceptions import KgqcError, UnmappableQuestionError
from kgqc.logconfig import configure_logging
from kgqc.models import ContextMode

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNMAPPABLE = 2

Command = Callable[[argparse.Namespace, Settings, TextIO], int]


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--kg", type=Path, help="Triple file (TSV head, edge, tail)")
    parent.add_argument("--lexicon", type=Path, help="Lexicon file")
    parent.add_argument("--embeddings", type=Path, help="Embedding file")
    parent.add_argument("--cache", type=Path, help="Generalized local graph cache (JSON)")
    parent.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parent.add_argument("--log-format", choices=["console", "json"])
    return parent


def _pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t-s", type=float, help="Pruning threshold divisor")
    parser.add_argument("--max-hops", type=int, help="Hop-distance cutoff")
    parser.add_argument("--weights", help="Disambiguation weights 'sim,conn,hop'")
    parser.add_argument("--max-representations", type=int)
    parser.add_argument("--retry-cap", type=int, help="Ranked queries tried before giving up")


def _train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dim", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--negatives", type=int, help="Negatives per owner and step")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--context-mode", type=ContextMode, choices=list(ContextMode))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgqc",
        description="Graph-structured query construction over knowledge graphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", parents=[common], help="Build the generalized graph cache")
    build.add_argument("--context-mode", type=ContextMode, choices=list(ContextMode))
    build.set_defaults(handler=commands.cmd_build)

    train = sub.add_parser("train", parents=[common], help="Train embeddings")
    _train_flags(train)
    train.set_defaults(handler=commands.cmd_train)

    query = sub.add_parser("query", parents=[common], help="Answer one question")
    query.add_argument("nlq", help="Natural-language question")
    query.add_argument("--dump-structure", action="store_true", help="Print cost tables and matrix")
    _pipeline_flags(query)
    query.set_defaults(handler=commands.cmd_query)

    eval_qa = sub.add_parser("eval-qa", parents=[common], help="QA recall/precision/F-1")
    eval_qa.add_argument("dataset", type=Path, help="TSV nlq<TAB>gold1|gold2")
    eval_qa.add_argument("--workers", type=int)
    _pipeline_flags(eval_qa)
    eval_qa.set_defaults(handler=commands.cmd_eval_qa)

    eval_lp = sub.add_parser("eval-lp", parents=[common], help="Link prediction MeanRank/Hits@10")
    eval_lp.add_argument("test", type=Path, help="Test triple file")
    eval_lp.add_argument("--filtered", action="store_true", help="Filter known true triples")
    eval_lp.set_defaults(handler=commands.cmd_eval_lp)

    bench = sub.add_parser("bench", parents=[common], help="Per-module timings")
    bench.add_argument("questions", type=Path, help="One question per line")
    _pipeline_flags(bench)
    bench.set_defaults(handler=commands.cmd_bench)

    export = sub.add_parser("export", parents=[common], help="Export vectors as TSV")
    export.add_argument("labels", nargs="*", help="Labels to export (default: all)")
    export.add_argument("--kind", choices=["vertex", "edge", "all"], default="all")
    export.set_defaults(handler=commands.cmd_export)

    neighbors = sub.add_parser("neighbors", parents=[common], help="Nearest neighbours of a label")
    neighbors.add_argument("label")
    neighbors.add_argument("--kind", choices=["vertex", "edge"], default="vertex")
    neighbors.add_argument("--k", type=int, default=10)
    neighbors.set_defaults(handler=commands.cmd_neighbors)

    return parser


def _error(stage: str, message: str) -> None:
    print(f"error[{stage}]: {message}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        settings = get_settings()
    except ValidationError as e:
        configure_logging()
        _error("config", str(e))
        return EXIT_ERROR

    configure_logging(args.log_level or settings.log_level, args.log_format or settings.log_format)
    handler: Command = args.handler

    try:
        return handler(args, settings, sys.stdout)
    except KgqcError as e:
        stage = e.pipeline_stage or e.stage
        logger.error("Command failed", command=args.command, stage=stage, error=str(e))
        _error(stage, str(e))
        return EXIT_UNMAPPABLE if isinstance(e, UnmappableQuestionError) else EXIT_ERROR
    except (ValidationError, ValueError) as e:
        logger.error("Invalid configuration", command=args.command, error=str(e))
        _error("config", str(e))
        return EXIT_ERROR
    except Exception as e:
        logger.exception("Unexpected failure", command=args.command)
        _error("internal", str(e))
        return EXIT_ERROR
