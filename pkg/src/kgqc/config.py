"""
Configuration management for kgqc.

Uses pydantic-settings for type-safe configuration with environment variables.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from kgqc.models import ContextMode, ScoringWeights, TrainConfig


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="KGQC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # ==========================================================================
    # Application
    # ==========================================================================
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_format: Literal["console", "json"] = "console"

    # ==========================================================================
    # Paths
    # ==========================================================================
    kg_path: Path | None = None
    lexicon_path: Path | None = None
    embedding_path: Path | None = None
    cache_path: Path | None = None

    # ==========================================================================
    # Knowledge Graph
    # ==========================================================================
    type_edge_label: str = "type"
    universal_class_label: str = "Thing"

    # ==========================================================================
    # Training
    # ==========================================================================
    dim: int = Field(default=100, ge=2)
    lambda_v: float = Field(default=0.5, ge=0.0)
    lambda_e: float = Field(default=0.5, ge=0.0)
    negatives: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.01, gt=0.0)
    epochs: int = Field(default=50, ge=1)
    seed: int = 42
    workers: int = Field(default=1, ge=1)
    context_mode: ContextMode = ContextMode.GENERALIZED

    # ==========================================================================
    # Phrase Mapping
    # ==========================================================================
    t_s: float = Field(default=15.0, ge=1.0)
    max_hops: int = Field(default=4, ge=1)
    weights: str = "0.4,0.4,0.2"

    @field_validator("weights")
    @classmethod
    def check_weights(cls, v: str) -> str:
        ScoringWeights.parse(v)
        return v

    # ==========================================================================
    # Query Generation
    # ==========================================================================
    max_representations: int = Field(default=1_000_000, ge=1)
    retry_cap: int = Field(default=5, ge=1)
    max_search_space: int = Field(default=10_000_000, ge=1)

    # ==========================================================================
    # Computed Properties
    # ==========================================================================
    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(
            dim=self.dim,
            lambda_v=self.lambda_v,
            lambda_e=self.lambda_e,
            negatives=self.negatives,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
            workers=self.workers,
            context_mode=self.context_mode,
        )

    @property
    def scoring_weights(self) -> ScoringWeights:
        return ScoringWeights.parse(self.weights)


class PipelineConfig(BaseModel):
    """
    Resolved configuration for one CLI invocation.

    Built from Settings plus command-line overrides; every path that is set
    must exist when the command starts.
    """

    kg_path: Path | None = None
    lexicon_path: Path | None = None
    embedding_path: Path | None = None
    cache_path: Path | None = None
    type_edge_label: str = "type"
    universal_class_label: str = "Thing"
    train: TrainConfig = Field(default_factory=TrainConfig)
    t_s: float = Field(default=15.0, ge=1.0)
    max_hops: int = Field(default=4, ge=1)
    weights: ScoringWeights = Field(default_factory=ScoringWeights)
    max_representations: int = Field(default=1_000_000, ge=1)
    retry_cap: int = Field(default=5, ge=1)
    max_search_space: int = Field(default=10_000_000, ge=1)

    # Paths produced by the command rather than read by it
    outputs: frozenset[str] = frozenset()

    @model_validator(mode="after")
    def check_paths_exist(self) -> "PipelineConfig":
        for name in ("kg_path", "lexicon_path", "embedding_path", "cache_path"):
            path = getattr(self, name)
            if path is not None and name not in self.outputs and not path.exists():
                raise ValueError(f"{name} does not exist: {path}")
        return self

    @property
    def seed(self) -> int:
        return self.train.seed

    @classmethod
    def from_settings(cls, settings: "Settings", **overrides: object) -> "PipelineConfig":
        """Merge settings with non-None overrides."""
        values: dict[str, object] = {
            "kg_path": settings.kg_path,
            "lexicon_path": settings.lexicon_path,
            "embedding_path": settings.embedding_path,
            "cache_path": settings.cache_path,
            "type_edge_label": settings.type_edge_label,
            "universal_class_label": settings.universal_class_label,
            "train": settings.train_config,
            "t_s": settings.t_s,
            "max_hops": settings.max_hops,
            "weights": settings.scoring_weights,
            "max_representations": settings.max_representations,
            "retry_cap": settings.retry_cap,
            "max_search_space": settings.max_search_space,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
