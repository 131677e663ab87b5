"""Per-module timing over a question file."""

from pathlib import Path

import structlog
from pydantic import BaseModel

from kgqc.exceptions import DatasetError, KgqcError
from kgqc.models import ModuleTimings
from kgqc.retrieval.engine import QueryEngine

logger = structlog.get_logger()


class BenchReport(BaseModel):
    mean: ModuleTimings
    questions: int
    failed: int


def load_questions(path: Path) -> list[str]:
    """One question per line; a QA dataset works too (first column is used)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot read {path}: {e}") from e
    questions = [
        line.split("\t")[0].strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not questions:
        raise DatasetError(f"no questions in {path}")
    return questions


def run_bench(engine: QueryEngine, questions: list[str]) -> BenchReport:
    """Mean wall-clock milliseconds per module over the questions that succeed."""
    runs: list[ModuleTimings] = []
    failed = 0
    for nlq in questions:
        try:
            runs.append(engine.answer(nlq).timings)
        except KgqcError as e:
            failed += 1
            logger.debug("Bench question failed", nlq=nlq[:100], error=str(e))

    count = max(len(runs), 1)
    mean = ModuleTimings(
        phrase_mapping_ms=sum(r.phrase_mapping_ms for r in runs) / count,
        structure_computing_ms=sum(r.structure_computing_ms for r in runs) / count,
        query_generation_ms=sum(r.query_generation_ms for r in runs) / count,
    )
    return BenchReport(mean=mean, questions=len(runs), failed=failed)


def format_bench_report(report: BenchReport) -> str:
    m = report.mean
    rows = [
        ("phrase_mapping", m.phrase_mapping_ms),
        ("structure_computing", m.structure_computing_ms),
        ("query_generation", m.query_generation_ms),
        ("total", m.total_ms),
    ]
    lines = ["module\tmean_ms"] + [f"{name}\t{ms:.3f}" for name, ms in rows]
    lines.append(f"questions\t{report.questions}")
    lines.append(f"failed\t{report.failed}")
    return "\n".join(lines) + "\n"
