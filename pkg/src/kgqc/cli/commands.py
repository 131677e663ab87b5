"""
Command bodies.

Each command takes the parsed arguments and the loaded settings, writes
its report to stdout and returns an exit code. Errors propagate to
``kgqc.cli.main`` which maps them to exit codes.
"""

import argparse
import sys
from collections.abc import Iterable
from typing import TextIO

import structlog

from kgqc.config import PipelineConfig, Settings
from kgqc.evaluation.bench import format_bench_report, load_questions, run_bench
from kgqc.evaluation.link_prediction import evaluate_link_prediction, format_lp_report
from kgqc.evaluation.qa import evaluate_qa, format_qa_report, load_qa_dataset
from kgqc.exceptions import CacheError, UnknownObjectError
from kgqc.models import ObjectKind, ScoringWeights, TrainConfig
from kgqc.retrieval.engine import QueryEngine
from kgqc.storage.cache import build_cache, load_cache, save_cache
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.storage.graph import ObjectRef, load_kg, read_triples
from kgqc.structure.matrix import dump_structure
from kgqc.training.trainer import Trainer

logger = structlog.get_logger()

PATH_FLAGS = {
    "kg_path": "--kg",
    "lexicon_path": "--lexicon",
    "embedding_path": "--embeddings",
    "cache_path": "--cache",
}
TRAIN_FLAGS = ("dim", "epochs", "learning_rate", "negatives", "seed", "workers", "context_mode")


def _train_config(args: argparse.Namespace, settings: Settings) -> TrainConfig:
    updates = {
        name: getattr(args, name)
        for name in TRAIN_FLAGS
        if getattr(args, name, None) is not None
    }
    updates["show_progress"] = sys.stderr.isatty()
    return TrainConfig.model_validate({**settings.train_config.model_dump(), **updates})


def build_config(
    args: argparse.Namespace,
    settings: Settings,
    outputs: Iterable[str] = (),
) -> PipelineConfig:
    """Merge command-line flags over settings into a validated PipelineConfig."""
    weights = getattr(args, "weights", None)
    return PipelineConfig.from_settings(
        settings,
        kg_path=args.kg,
        lexicon_path=args.lexicon,
        embedding_path=args.embeddings,
        cache_path=args.cache,
        train=_train_config(args, settings),
        t_s=getattr(args, "t_s", None),
        max_hops=getattr(args, "max_hops", None),
        weights=ScoringWeights.parse(weights) if weights is not None else None,
        max_representations=getattr(args, "max_representations", None),
        retry_cap=getattr(args, "retry_cap", None),
        outputs=frozenset(outputs),
    )


def _require(config: PipelineConfig, *names: str) -> None:
    missing = [n for n in names if getattr(config, n) is None]
    if missing:
        flags = ", ".join(PATH_FLAGS[n] for n in missing)
        raise ValueError(f"missing required paths: {flags}")


def _write(out: TextIO, text: str) -> None:
    out.write(text)
    out.flush()


# =============================================================================
# Offline
# =============================================================================

def cmd_build(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    config = build_config(args, settings, outputs={"cache_path"})
    _require(config, "kg_path", "cache_path")

    kg = load_kg(config.kg_path, config.type_edge_label, config.universal_class_label)
    cache = build_cache(kg, config.train.context_mode)
    save_cache(cache, config.cache_path)

    lines = [f"entries\t{len(cache.entries)}", f"skipped\t{len(cache.skipped)}"]
    lines.extend(f"skip\t{owner}" for owner in cache.skipped)
    _write(out, "\n".join(lines) + "\n")
    return 0


def cmd_train(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    config = build_config(args, settings, outputs={"embedding_path"})
    _require(config, "kg_path", "cache_path", "embedding_path")

    kg = load_kg(config.kg_path, config.type_edge_label, config.universal_class_label)
    cache = load_cache(config.cache_path)
    if cache.mode is not config.train.context_mode:
        raise CacheError(
            f"cache holds {cache.mode.value} graphs, training needs {config.train.context_mode.value}"
        )
    primed = cache.prime(kg)
    logger.info("Cache primed", entries=primed)

    trainer = Trainer(kg, config.train)
    store = trainer.run()
    store.save(config.embedding_path)

    final_loss = trainer.losses[-1] if trainer.losses else 0.0
    _write(out, f"epochs\t{len(trainer.losses)}\nfinal_loss\t{final_loss:.6f}\n")
    return 0


# =============================================================================
# Online
# =============================================================================

def _engine(args: argparse.Namespace, settings: Settings) -> QueryEngine:
    config = build_config(args, settings)
    _require(config, "kg_path", "lexicon_path", "embedding_path")
    return QueryEngine.from_config(config)


def cmd_query(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    engine = _engine(args, settings)
    result = engine.answer(args.nlq)

    lines = [result.query_text.rstrip("\n"), ""]
    lines.extend(f"answer\t{a}" for a in result.answers)
    lines.append(f"stage\t{result.stage.value}")
    lines.append(f"phrase_mapping_ms\t{result.timings.phrase_mapping_ms:.3f}")
    lines.append(f"structure_computing_ms\t{result.timings.structure_computing_ms:.3f}")
    lines.append(f"query_generation_ms\t{result.timings.query_generation_ms:.3f}")
    text = "\n".join(lines) + "\n"
    if args.dump_structure:
        text += dump_structure(result.tables, result.matrix)
    _write(out, text)
    return 0


def cmd_eval_qa(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    engine = _engine(args, settings)
    records = load_qa_dataset(args.dataset)
    workers = args.workers if args.workers is not None else settings.workers
    report = evaluate_qa(engine, records, workers)
    _write(out, format_qa_report(report))
    return 0


def cmd_bench(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    engine = _engine(args, settings)
    report = run_bench(engine, load_questions(args.questions))
    _write(out, format_bench_report(report))
    return 0


# =============================================================================
# Embedding inspection
# =============================================================================

def _store(args: argparse.Namespace, settings: Settings) -> tuple[PipelineConfig, EmbeddingStore]:
    config = build_config(args, settings)
    _require(config, "embedding_path")
    return config, EmbeddingStore.load(config.embedding_path)


def cmd_eval_lp(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    config, store = _store(args, settings)
    known: list[tuple[str, str, str]] = []
    if args.filtered:
        _require(config, "kg_path")
        known = read_triples(config.kg_path)
    report = evaluate_link_prediction(store, read_triples(args.test), args.filtered, known)
    _write(out, format_lp_report(report))
    return 0


def _kinds(name: str) -> list[ObjectKind]:
    return list(ObjectKind) if name == "all" else [ObjectKind(name)]


def _resolve(store: EmbeddingStore, label: str, kinds: list[ObjectKind]) -> ObjectRef:
    """First kind that knows the label; vertices before edges."""
    for kind in kinds:
        try:
            return store.ref(kind, label)
        except UnknownObjectError:
            continue
    raise UnknownObjectError(f"unknown label: {label}")


def cmd_export(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    """Write ``label<TAB>c1 ... cd`` rows for external projection tools."""
    _, store = _store(args, settings)
    kinds = _kinds(args.kind)
    if args.labels:
        refs = [_resolve(store, label, kinds) for label in args.labels]
    else:
        refs = [
            store.ref(kind, label)
            for kind in kinds
            for label in (store.vertex_labels if kind is ObjectKind.VERTEX else store.edge_labels)
        ]

    lines = []
    for ref in refs:
        values = " ".join(repr(float(x)) for x in store.vector(ref))
        lines.append(f"{store.label(ref)}\t{values}")
    _write(out, "\n".join(lines) + "\n" if lines else "")
    return 0


def cmd_neighbors(args: argparse.Namespace, settings: Settings, out: TextIO = sys.stdout) -> int:
    _, store = _store(args, settings)
    ref = store.ref(ObjectKind(args.kind), args.label)
    lines = ["label\tdistance"]
    lines.extend(
        f"{store.label(other)}\t{distance:.6f}"
        for other, distance in store.nearest_neighbors(ref, args.k)
    )
    _write(out, "\n".join(lines) + "\n")
    return 0
