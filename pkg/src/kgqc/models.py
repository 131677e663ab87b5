"""
Core data models for kgqc.

Pydantic models for configuration objects, phrase-mapping results, and
evaluation reports shared across the pipeline.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# =============================================================================
# Enums
# =============================================================================

class ObjectKind(str, Enum):
    """Kind of a knowledge graph object."""
    VERTEX = "vertex"
    EDGE = "edge"


class VertexKind(str, Enum):
    """Category of a vertex, deduced from type-edge triples."""
    ENTITY = "entity"
    CLASS = "class"


class PhraseKind(str, Enum):
    """Category of a phrase extracted from a question."""
    ENTITY = "entity"
    RELATION = "relation"


class ContextMode(str, Enum):
    """Which local graph the embedding objective is trained on."""
    GENERALIZED = "generalized"
    LOCAL = "local"


class PipelineStage(str, Enum):
    """Stages of the online query construction pipeline."""
    PHRASE_MAPPING = "phrase_mapping"
    STRUCTURE_COMPUTING = "structure_computing"
    QUERY_GENERATION = "query_generation"
    EMPTY_ANSWER = "empty_answer"


# =============================================================================
# Configuration Models
# =============================================================================

class TrainConfig(BaseModel):
    """Hyperparameters for embedding training."""
    dim: int = Field(default=100, ge=2)
    lambda_v: float = Field(default=0.5, ge=0.0)
    lambda_e: float = Field(default=0.5, ge=0.0)
    negatives: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.01, gt=0.0)
    epochs: int = Field(default=50, ge=1)
    seed: int = 42
    workers: int = Field(default=1, ge=1)
    context_mode: ContextMode = ContextMode.GENERALIZED
    strict_negatives: bool = False  # raise instead of training positive-only
    show_progress: bool = False

    @model_validator(mode="after")
    def check_lambdas(self) -> "TrainConfig":
        if self.lambda_v == 0.0 and self.lambda_e == 0.0:
            raise ValueError("lambda_v and lambda_e cannot both be zero")
        return self


class ScoringWeights(BaseModel):
    """Linear disambiguation weights (similarity, connection count, hop count)."""
    model_config = ConfigDict(frozen=True)

    sim: float = Field(default=0.4, ge=0.0)
    conn: float = Field(default=0.4, ge=0.0)
    hop: float = Field(default=0.2, ge=0.0)

    @classmethod
    def parse(cls, text: str) -> "ScoringWeights":
        """Parse a ``sim,conn,hop`` string."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"weights must be 'sim,conn,hop', got '{text}'")
        sim, conn, hop = (float(p) for p in parts)
        return cls(sim=sim, conn=conn, hop=hop)


# =============================================================================
# Phrase Mapping Models
# =============================================================================

class PhraseMatch(BaseModel):
    """An entity or relation phrase found in a question."""
    model_config = ConfigDict(frozen=True)

    text: str
    kind: PhraseKind
    start: int  # token offset, inclusive
    end: int  # token offset, exclusive; equals start for implied phrases
    is_wh: bool = False
    implied: bool = False

    @property
    def surface(self) -> str:
        return self.text.lower()


class Candidate(BaseModel):
    """A candidate vertex or edge for one phrase."""
    model_config = ConfigDict(frozen=True)

    id: int
    kind: ObjectKind
    label: str
    base_similarity: float = Field(gt=0.0, le=1.0)
    score: float


class CandidateSet(BaseModel):
    """Ranked candidates of a single phrase."""
    phrase: PhraseMatch
    candidates: list[Candidate]
    pruned: bool = False

    @field_validator("candidates")
    @classmethod
    def check_homogeneous(cls, v: list[Candidate]) -> list[Candidate]:
        if len({c.kind for c in v}) > 1:
            raise ValueError("candidate set mixes vertices and edges")
        return v

    @property
    def kind(self) -> ObjectKind:
        return self.candidates[0].kind

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.candidates]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)


# =============================================================================
# Evaluation Models
# =============================================================================

class QaRecord(BaseModel):
    """A benchmark question with its gold answers."""
    nlq: str
    gold_answers: list[str] = Field(min_length=1)
    gold_query: str | None = None


class QuestionMetrics(BaseModel):
    """Per-question QA outcome."""
    nlq: str
    returned: list[str] = Field(default_factory=list)
    recall: float = 0.0
    precision: float = 0.0
    f1: float = 0.0
    processed: bool = True
    failure_stage: PipelineStage | None = None
    query_text: str | None = None


class ModuleTimings(BaseModel):
    """Wall-clock milliseconds spent in each online module."""
    phrase_mapping_ms: float = 0.0
    structure_computing_ms: float = 0.0
    query_generation_ms: float = 0.0

    @property
    def total_ms(self) -> float:
        return self.phrase_mapping_ms + self.structure_computing_ms + self.query_generation_ms


class MetricsReport(BaseModel):
    """Aggregated QA metrics."""
    questions: list[QuestionMetrics]
    total: int
    processed: int
    recall: float
    precision: float
    f1: float
    failures: dict[str, int] = Field(default_factory=dict)


class LinkPredictionReport(BaseModel):
    """Link prediction metrics over a test triple set."""
    mean_rank: float
    hits_at_10: float
    mrr: float
    evaluated: int  # number of ranked predictions (two per triple)
    skipped: int
    filtered: bool = False
