"""
Storage layer components.

In-memory knowledge graph, pattern matcher, embedding store, and the
generalized local graph cache.
"""

from kgqc.storage.cache import GlkgCache, build_cache, load_cache, save_cache
from kgqc.storage.embeddings import EmbeddingStore, translate_score
from kgqc.storage.graph import (
    GeneralizedLocalKg,
    GeneralizedTriple,
    KnowledgeGraph,
    LocalKg,
    ObjectRef,
    Triple,
    load_kg,
    read_triples,
)
from kgqc.storage.patterns import TriplePattern, Variable, match_pattern

__all__ = [
    "KnowledgeGraph",
    "LocalKg",
    "GeneralizedLocalKg",
    "GeneralizedTriple",
    "ObjectRef",
    "Triple",
    "load_kg",
    "read_triples",
    "TriplePattern",
    "Variable",
    "match_pattern",
    "EmbeddingStore",
    "translate_score",
    "GlkgCache",
    "build_cache",
    "load_cache",
    "save_cache",
]
