"""
Attention scores of generalized triples.

A generalized triple supported by a larger share of its owner's raw local
graph gets a larger weight: ``exp(support / |local graph|)``.
"""

import numpy as np

from kgqc.models import ContextMode, ObjectKind
from kgqc.storage.graph import GeneralizedLocalKg, GeneralizedTriple, KnowledgeGraph, ObjectRef


def _score(glkg: GeneralizedLocalKg, g: GeneralizedTriple) -> float:
    if glkg.denominator <= 0:
        raise ValueError(f"{glkg.owner.kind.value} {glkg.owner.id} has an empty local graph")
    if g not in glkg.triples:
        raise ValueError(f"{g} is not part of the generalized graph of {glkg.owner}")
    return float(np.exp(g.support / glkg.denominator))


def attention_vertex(
    kg: KnowledgeGraph,
    v: int,
    g: GeneralizedTriple,
    mode: ContextMode = ContextMode.GENERALIZED,
) -> float:
    """Attention of ``g`` within the generalized graph of vertex ``v``."""
    return _score(kg.generalize(ObjectRef.vertex(v), mode), g)


def attention_edge(
    kg: KnowledgeGraph,
    e: int,
    g: GeneralizedTriple,
    mode: ContextMode = ContextMode.GENERALIZED,
) -> float:
    """
    Attention of ``g`` within the generalized graph of edge ``e``.

    The count is the number of raw triples generalizing to the form of
    ``g``: class-class, entity-class, or class-entity. Entity-entity forms do
    not exist in a generalized edge graph.
    """
    if mode is ContextMode.GENERALIZED and not (kg.is_class(g.head) or kg.is_class(g.tail)):
        raise ValueError(
            f"({kg.vertex_label(g.head)}, {kg.edge_label(g.edge)}, {kg.vertex_label(g.tail)}) "
            "has entities at both ends"
        )
    return _score(kg.generalize(ObjectRef.edge(e), mode), g)


def attention_weights(kg: KnowledgeGraph, glkg: GeneralizedLocalKg) -> np.ndarray:
    """Attention of every triple of ``glkg``, in triple order."""
    if not glkg:
        return np.zeros(0)
    if glkg.owner.kind is ObjectKind.EDGE and glkg.mode is ContextMode.GENERALIZED:
        for g in glkg.triples:
            if not (kg.is_class(g.head) or kg.is_class(g.tail)):
                raise ValueError(f"generalized edge triple {g} has entities at both ends")
    supports = np.array([g.support for g in glkg.triples], dtype=np.float64)
    return np.exp(supports / glkg.denominator)
