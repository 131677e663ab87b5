"""
Query execution with the empty-answer fallback.

An empty answer is retried without type constraints, then with the next
cheapest representation, up to the retry cap.
"""

from dataclasses import dataclass, field
from enum import Enum

import structlog

from kgqc.exceptions import FullyGroundedQueryError
from kgqc.models import CandidateSet
from kgqc.retrieval.query import GraphQuery, QueryRepresentation, serialize_query, to_graph_query
from kgqc.storage.graph import KnowledgeGraph
from kgqc.storage.patterns import match_pattern

logger = structlog.get_logger()


class AnswerStage(str, Enum):
    EXACT = "exact"
    RELAXED = "relaxed"
    EXHAUSTED = "exhausted"


@dataclass
class Attempt:
    rank: int
    score: float
    query_text: str
    exact_count: int
    relaxed_count: int | None = None
    note: str | None = None


@dataclass
class ExecutionResult:
    answers: list[str]
    stage: AnswerStage
    query: GraphQuery | None = None
    representation: QueryRepresentation | None = None
    score: float | None = None
    attempts: list[Attempt] = field(default_factory=list)


def execute(gq: GraphQuery, kg: KnowledgeGraph) -> list[str]:
    """Sorted distinct labels bound to the answer variable."""
    bindings = match_pattern(kg, gq.compile(kg))
    if gq.answer_variable is None:
        return []
    return sorted({kg.vertex_label(b[gq.answer_variable]) for b in bindings})


def execute_with_fallback(
    ranked: list[tuple[float, QueryRepresentation]],
    vertex_sets: list[CandidateSet],
    kg: KnowledgeGraph,
    retry_cap: int = 5,
) -> ExecutionResult:
    """
    Run representations cheapest first until one yields answers.

    The optimal representation must produce a variable; later ones that do
    not are noted in the trail and skipped.
    """
    attempts: list[Attempt] = []
    first_query: GraphQuery | None = None

    for rank, (score, rep) in enumerate(ranked[:retry_cap]):
        try:
            gq = to_graph_query(rep, vertex_sets, kg)
        except FullyGroundedQueryError as e:
            if rank == 0:
                raise
            attempts.append(Attempt(rank, score, "", 0, note=str(e)))
            continue
        if first_query is None:
            first_query = gq

        answers = execute(gq, kg)
        attempt = Attempt(rank, score, serialize_query(gq), len(answers))
        attempts.append(attempt)
        if answers:
            return ExecutionResult(answers, AnswerStage.EXACT, gq, rep, score, attempts)

        relaxed = gq.relaxed()
        if relaxed != gq:
            answers = execute(relaxed, kg)
            attempt.relaxed_count = len(answers)
            if answers:
                logger.debug("Answered after relaxing type constraints", rank=rank)
                return ExecutionResult(answers, AnswerStage.RELAXED, relaxed, rep, score, attempts)

    logger.info("No representation produced answers", attempts=len(attempts))
    return ExecutionResult([], AnswerStage.EXHAUSTED, first_query, attempts=attempts)
