"""Evaluation harnesses: QA metrics, link prediction, module timings."""

from kgqc.evaluation.bench import BenchReport, format_bench_report, load_questions, run_bench
from kgqc.evaluation.link_prediction import evaluate_link_prediction, format_lp_report
from kgqc.evaluation.qa import (
    aggregate,
    evaluate_qa,
    f1_score,
    format_qa_report,
    load_qa_dataset,
    question_metrics,
)

__all__ = [
    "f1_score",
    "question_metrics",
    "aggregate",
    "evaluate_qa",
    "load_qa_dataset",
    "format_qa_report",
    "evaluate_link_prediction",
    "format_lp_report",
    "BenchReport",
    "run_bench",
    "load_questions",
    "format_bench_report",
]
