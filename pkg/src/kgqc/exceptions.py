"""
Exception hierarchy for kgqc.

Every error carries the pipeline stage it belongs to so the CLI can
report it and choose an exit code.
"""


class KgqcError(Exception):
    """Base error for all kgqc failures."""
    stage = "internal"
    # Online module that was running when the error surfaced, set by the engine
    pipeline_stage: str | None = None


class GraphLoadError(KgqcError):
    """Triple file could not be parsed."""
    stage = "kg_store"

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class UnknownObjectError(KgqcError):
    """A label or id is not registered in the knowledge graph or store."""
    stage = "kg_store"


class EmbeddingFileError(KgqcError):
    """Embedding file is malformed, truncated, or inconsistent."""
    stage = "embedding"


class NegativeSamplingError(KgqcError):
    """Not enough negatives with disjoint context could be drawn."""
    stage = "embedding"


class TrainingDivergedError(KgqcError):
    """Training produced a non-finite objective."""
    stage = "embedding"


class LexiconError(KgqcError):
    """Lexicon file is malformed."""
    stage = "phrase_mapping"


class UnmappableQuestionError(KgqcError):
    """No phrase of the question matched the lexicon."""
    stage = "phrase_mapping"


class EmptyCandidateSetError(KgqcError):
    """A phrase has no candidate of its kind."""
    stage = "phrase_mapping"


class NoValidStructureError(KgqcError):
    """No valid structure matrix exists for the candidate sets."""
    stage = "structure_computing"


class SearchSpaceTooLargeError(KgqcError):
    """Exhaustive structure search exceeds its guard."""
    stage = "structure_computing"


class RepresentationLimitError(KgqcError):
    """Too many candidate query representations to enumerate."""
    stage = "query_generation"


class FullyGroundedQueryError(KgqcError):
    """Optimal representation has no class vertex to turn into a variable."""
    stage = "query_generation"


class QueryParseError(KgqcError):
    """Serialized query text could not be parsed."""
    stage = "query_generation"


class DatasetError(KgqcError):
    """Evaluation dataset could not be read."""
    stage = "evaluation"


class CacheError(KgqcError):
    """Generalized local graph cache is missing, malformed, or stale."""
    stage = "kg_store"
