"""
Query construction engine.

Runs the three online modules for one question:
1. Phrase mapping (phrases and their candidate sets)
2. Structure computing (optimal structure matrix)
3. Query generation (representations, substitution, execution)
"""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field

import structlog

from kgqc.config import PipelineConfig
from kgqc.exceptions import KgqcError
from kgqc.mapping.candidates import map_question
from kgqc.mapping.lexicon import Lexicon, load_lexicon
from kgqc.models import CandidateSet, ModuleTimings, PhraseKind, PipelineStage, ScoringWeights
from kgqc.retrieval.executor import AnswerStage, Attempt, execute_with_fallback
from kgqc.retrieval.query import (
    GraphQuery,
    enumerate_representations,
    rank_representations,
    serialize_query,
)
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.storage.graph import KnowledgeGraph, load_kg
from kgqc.structure.matrix import CostTables, StructureMatrix, build_cost_tables
from kgqc.structure.solver import solve_tables

logger = structlog.get_logger()


@dataclass
class QueryAnswer:
    """Everything the pipeline produced for one question."""

    nlq: str
    answers: list[str]
    stage: AnswerStage
    query: GraphQuery | None
    vertex_sets: list[CandidateSet]
    edge_sets: list[CandidateSet]
    matrix: StructureMatrix
    tables: CostTables
    score: float | None = None
    attempts: list[Attempt] = field(default_factory=list)
    timings: ModuleTimings = field(default_factory=ModuleTimings)

    @property
    def query_text(self) -> str:
        return serialize_query(self.query) if self.query is not None else ""


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


@contextmanager
def _stage(stage: PipelineStage) -> Iterator[None]:
    """Tag kgqc errors raised inside the block with the running module."""
    try:
        yield
    except KgqcError as e:
        if e.pipeline_stage is None:
            e.pipeline_stage = stage.value
        raise


class QueryEngine:
    """
    Answers natural-language questions over one knowledge graph.

    Stateless between questions; safe to share across threads once built.
    """

    def __init__(
        self,
        kg: KnowledgeGraph,
        lexicon: Lexicon,
        store: EmbeddingStore,
        weights: ScoringWeights | None = None,
        t_s: float = 15.0,
        max_hops: int = 4,
        max_representations: int = 1_000_000,
        retry_cap: int = 5,
    ):
        self.kg = kg
        self.lexicon = lexicon
        self.store = store.aligned_to(kg)
        self.weights = weights or ScoringWeights()
        self.t_s = t_s
        self.max_hops = max_hops
        self.max_representations = max_representations
        self.retry_cap = retry_cap

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "QueryEngine":
        if config.kg_path is None or config.lexicon_path is None or config.embedding_path is None:
            raise ValueError("query engine needs kg, lexicon and embedding paths")
        kg = load_kg(config.kg_path, config.type_edge_label, config.universal_class_label)
        return cls(
            kg=kg,
            lexicon=load_lexicon(config.lexicon_path),
            store=EmbeddingStore.load(config.embedding_path),
            weights=config.weights,
            t_s=config.t_s,
            max_hops=config.max_hops,
            max_representations=config.max_representations,
            retry_cap=config.retry_cap,
        )

    def map_phrases(self, nlq: str) -> tuple[list[CandidateSet], list[CandidateSet]]:
        """Entity-phrase and relation-phrase candidate sets, each in question order."""
        sets = map_question(nlq, self.lexicon, self.kg, self.weights, self.t_s, self.max_hops)
        vertex_sets = [s for s in sets if s.phrase.kind is PhraseKind.ENTITY]
        edge_sets = [s for s in sets if s.phrase.kind is PhraseKind.RELATION]
        return vertex_sets, edge_sets

    def answer(self, nlq: str) -> QueryAnswer:
        timings = ModuleTimings()

        with _stage(PipelineStage.PHRASE_MAPPING):
            start = time.perf_counter()
            vertex_sets, edge_sets = self.map_phrases(nlq)
            timings.phrase_mapping_ms = _elapsed_ms(start)

        with _stage(PipelineStage.STRUCTURE_COMPUTING):
            start = time.perf_counter()
            tables = build_cost_tables(vertex_sets, edge_sets, self.store)
            matrix = solve_tables(tables)
            timings.structure_computing_ms = _elapsed_ms(start)

        with _stage(PipelineStage.QUERY_GENERATION):
            start = time.perf_counter()
            representations = enumerate_representations(
                vertex_sets, edge_sets, matrix, self.max_representations
            )
            ranked = rank_representations(representations, self.store, self.retry_cap)
            result = execute_with_fallback(ranked, vertex_sets, self.kg, self.retry_cap)
            timings.query_generation_ms = _elapsed_ms(start)

        logger.info(
            "Question answered",
            nlq=nlq[:100],
            answers=len(result.answers),
            stage=result.stage.value,
            total_ms=round(timings.total_ms, 2),
        )
        return QueryAnswer(
            nlq=nlq,
            answers=result.answers,
            stage=result.stage,
            query=result.query,
            vertex_sets=vertex_sets,
            edge_sets=edge_sets,
            matrix=matrix,
            tables=tables,
            score=result.score,
            attempts=result.attempts,
            timings=timings,
        )
