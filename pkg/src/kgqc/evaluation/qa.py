"""
Question-answering metrics.

Per question: recall ``|gold & returned| / |gold|`` and precision
``|gold & returned| / |returned|``. Aggregates average over processed
questions; the aggregate F-1 is scaled by processed / total so that
unprocessed questions count against it.
"""

from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import structlog

from kgqc.exceptions import DatasetError, KgqcError
from kgqc.models import MetricsReport, PipelineStage, QaRecord, QuestionMetrics
from kgqc.retrieval.engine import QueryEngine

logger = structlog.get_logger()


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def load_qa_dataset(path: Path) -> list[QaRecord]:
    """
    Read ``nlq<TAB>gold1|gold2|...`` lines, with an optional third column
    holding the gold query (lines separated by a literal ``\\n``).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot read dataset {path}: {e}") from e

    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise DatasetError(f"line {number}: expected 2 or 3 tab-separated fields")
        golds = [g.strip() for g in fields[1].split("|") if g.strip()]
        if not fields[0].strip() or not golds:
            raise DatasetError(f"line {number}: empty question or gold answers")
        gold_query = fields[2].replace("\\n", "\n") if len(fields) == 3 else None
        records.append(QaRecord(nlq=fields[0].strip(), gold_answers=golds, gold_query=gold_query))
    if not records:
        raise DatasetError(f"no questions in {path}")
    return records


def question_metrics(nlq: str, gold: Sequence[str], returned: Sequence[str]) -> QuestionMetrics:
    gold_set, returned_set = set(gold), set(returned)
    hits = len(gold_set & returned_set)
    recall = hits / len(gold_set) if gold_set else 0.0
    precision = hits / len(returned_set) if returned_set else 0.0
    return QuestionMetrics(
        nlq=nlq,
        returned=sorted(returned_set),
        recall=recall,
        precision=precision,
        f1=f1_score(precision, recall),
        failure_stage=None if returned_set else PipelineStage.EMPTY_ANSWER,
    )


def aggregate(questions: list[QuestionMetrics]) -> MetricsReport:
    total = len(questions)
    processed = [q for q in questions if q.processed]
    recall = sum(q.recall for q in processed) / len(processed) if processed else 0.0
    precision = sum(q.precision for q in processed) / len(processed) if processed else 0.0
    scale = len(processed) / total if total else 0.0
    failures = Counter(q.failure_stage.value for q in questions if q.failure_stage is not None)
    return MetricsReport(
        questions=questions,
        total=total,
        processed=len(processed),
        recall=recall,
        precision=precision,
        f1=f1_score(precision, recall) * scale,
        failures=dict(sorted(failures.items())),
    )


def _evaluate_one(engine: QueryEngine, record: QaRecord) -> QuestionMetrics:
    try:
        result = engine.answer(record.nlq)
    except KgqcError as e:
        stage = e.pipeline_stage or PipelineStage.QUERY_GENERATION.value
        logger.info("Question not processed", nlq=record.nlq[:100], stage=stage, error=str(e))
        return QuestionMetrics(
            nlq=record.nlq,
            processed=False,
            failure_stage=PipelineStage(stage),
        )
    metrics = question_metrics(record.nlq, record.gold_answers, result.answers)
    metrics.query_text = result.query_text
    return metrics


def evaluate_qa(engine: QueryEngine, records: list[QaRecord], workers: int = 1) -> MetricsReport:
    """Answer every record and aggregate; results keep dataset order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            questions = list(pool.map(lambda r: _evaluate_one(engine, r), records))
    else:
        questions = [_evaluate_one(engine, r) for r in records]

    report = aggregate(questions)
    logger.info(
        "QA evaluation complete",
        total=report.total,
        processed=report.processed,
        recall=round(report.recall, 4),
        precision=round(report.precision, 4),
        f1=round(report.f1, 4),
    )
    return report


def format_qa_report(report: MetricsReport) -> str:
    lines = ["nlq\trecall\tprecision\tf1\tstage"]
    for q in report.questions:
        stage = q.failure_stage.value if q.failure_stage else "ok"
        lines.append(f"{q.nlq}\t{q.recall:.4f}\t{q.precision:.4f}\t{q.f1:.4f}\t{stage}")
    lines.append(f"total\t{report.total}")
    lines.append(f"processed\t{report.processed}")
    lines.append(f"recall\t{report.recall:.4f}")
    lines.append(f"precision\t{report.precision:.4f}")
    lines.append(f"f1\t{report.f1:.4f}")
    for stage, count in report.failures.items():
        lines.append(f"failed[{stage}]\t{count}")
    return "\n".join(lines) + "\n"
