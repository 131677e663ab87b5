"""Query generation and the end-to-end query engine."""

from kgqc.retrieval.engine import QueryAnswer, QueryEngine
from kgqc.retrieval.executor import AnswerStage, ExecutionResult, execute, execute_with_fallback
from kgqc.retrieval.query import (
    GraphQuery,
    QueryPattern,
    QueryRepresentation,
    count_representations,
    enumerate_representations,
    parse_query,
    rank_representations,
    score_representation,
    serialize_query,
    to_graph_query,
)

__all__ = [
    "QueryEngine",
    "QueryAnswer",
    "AnswerStage",
    "ExecutionResult",
    "execute",
    "execute_with_fallback",
    "GraphQuery",
    "QueryPattern",
    "QueryRepresentation",
    "count_representations",
    "enumerate_representations",
    "rank_representations",
    "score_representation",
    "serialize_query",
    "parse_query",
    "to_graph_query",
]
