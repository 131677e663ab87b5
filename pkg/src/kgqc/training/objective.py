"""
Correlation functions and the negative-sampling log-likelihood.

A vertex context scores a candidate vertex ``x`` by the attention-weighted
translation residuals of the owner's generalized triples with ``x`` in the
owner's position; an edge context does the same for a candidate edge.
All gradients are analytic.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from kgqc.models import ObjectKind
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.storage.graph import GeneralizedLocalKg, KnowledgeGraph, ObjectRef
from kgqc.training.attention import attention_weights

if TYPE_CHECKING:
    from kgqc.training.sampler import NegativeSampler


# =============================================================================
# Contexts
# =============================================================================

@dataclass(frozen=True, eq=False)
class VertexContext:
    """
    Generalized graph of a vertex as residual rows ``s * (x - c) + e``.

    ``signs`` is +1 where the owner is the head, -1 where it is the tail;
    a triple with the owner at both ends contributes one row of each.
    """
    owner: int
    signs: np.ndarray
    edges: np.ndarray
    others: np.ndarray
    weights: np.ndarray  # attention / total attention

    kind = ObjectKind.VERTEX


@dataclass(frozen=True, eq=False)
class EdgeContext:
    """Generalized graph of an edge as residual rows ``h + x - t``."""
    owner: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray

    kind = ObjectKind.EDGE


Context = VertexContext | EdgeContext


def compile_context(kg: KnowledgeGraph, glkg: GeneralizedLocalKg) -> Context:
    """Turn a non-empty generalized graph into index arrays and weights."""
    if not glkg:
        raise ValueError(f"{glkg.owner} has an empty generalized graph")
    attention = attention_weights(kg, glkg)
    owner = glkg.owner.id

    if glkg.owner.kind is ObjectKind.EDGE:
        return EdgeContext(
            owner=owner,
            heads=np.array([g.head for g in glkg.triples]),
            tails=np.array([g.tail for g in glkg.triples]),
            weights=attention / attention.sum(),
        )

    signs: list[float] = []
    edges: list[int] = []
    others: list[int] = []
    raw: list[float] = []
    for g, a in zip(glkg.triples, attention, strict=True):
        if g.head == owner:
            signs.append(1.0)
            edges.append(g.edge)
            others.append(g.tail)
            raw.append(a)
        if g.tail == owner:
            signs.append(-1.0)
            edges.append(g.edge)
            others.append(g.head)
            raw.append(a)
    weights = np.array(raw)
    return VertexContext(
        owner=owner,
        signs=np.array(signs),
        edges=np.array(edges),
        others=np.array(others),
        weights=weights / weights.sum(),
    )


# =============================================================================
# Gradients
# =============================================================================

@dataclass
class Gradient:
    """Sparse gradient rows for the vertex and edge tables."""
    vertex_ids: list[np.ndarray] = field(default_factory=list)
    vertex_rows: list[np.ndarray] = field(default_factory=list)
    edge_ids: list[np.ndarray] = field(default_factory=list)
    edge_rows: list[np.ndarray] = field(default_factory=list)

    def add_vertex(self, ids: np.ndarray, rows: np.ndarray) -> None:
        self.vertex_ids.append(np.atleast_1d(ids))
        self.vertex_rows.append(np.atleast_2d(rows))

    def add_edge(self, ids: np.ndarray, rows: np.ndarray) -> None:
        self.edge_ids.append(np.atleast_1d(ids))
        self.edge_rows.append(np.atleast_2d(rows))

    def extend(self, other: "Gradient", scale: float) -> None:
        self.vertex_ids += other.vertex_ids
        self.vertex_rows += [scale * r for r in other.vertex_rows]
        self.edge_ids += other.edge_ids
        self.edge_rows += [scale * r for r in other.edge_rows]

    def dense(self, store: EmbeddingStore) -> tuple[np.ndarray, np.ndarray]:
        """Full-size (vertex, edge) gradient tables."""
        gv = np.zeros_like(store.vertex_vecs)
        ge = np.zeros_like(store.edge_vecs)
        for ids, rows in zip(self.vertex_ids, self.vertex_rows, strict=True):
            np.add.at(gv, ids, rows)
        for ids, rows in zip(self.edge_ids, self.edge_rows, strict=True):
            np.add.at(ge, ids, rows)
        return gv, ge

    def touched_vertices(self) -> np.ndarray:
        if not self.vertex_ids:
            return np.zeros(0, dtype=int)
        return np.unique(np.concatenate(self.vertex_ids))

    def apply(self, store: EmbeddingStore, step: float) -> None:
        """``table += step * gradient`` for every touched row."""
        for ids, rows in zip(self.vertex_ids, self.vertex_rows, strict=True):
            np.add.at(store.vertex_vecs, ids, step * rows)
        for ids, rows in zip(self.edge_ids, self.edge_rows, strict=True):
            np.add.at(store.edge_vecs, ids, step * rows)


# =============================================================================
# Correlation Functions
# =============================================================================

def _vertex_residuals(store: EmbeddingStore, x: int, ctx: VertexContext) -> np.ndarray:
    X = store.vertex_vecs[x]
    C = store.vertex_vecs[ctx.others]
    E = store.edge_vecs[ctx.edges]
    return ctx.signs[:, None] * (X - C) + E


def _edge_residuals(store: EmbeddingStore, x: int, ctx: EdgeContext) -> np.ndarray:
    H = store.vertex_vecs[ctx.heads]
    T = store.vertex_vecs[ctx.tails]
    return H + store.edge_vecs[x] - T


def f1(store: EmbeddingStore, v_prime: int, ctx: VertexContext) -> float:
    """Correlation of vertex ``v_prime`` with a vertex's generalized graph (always <= 0)."""
    r = _vertex_residuals(store, v_prime, ctx)
    return -float(np.dot(ctx.weights, np.einsum("ij,ij->i", r, r)))


def f2(store: EmbeddingStore, e_prime: int, ctx: EdgeContext) -> float:
    """Correlation of edge ``e_prime`` with an edge's generalized graph (always <= 0)."""
    r = _edge_residuals(store, e_prime, ctx)
    return -float(np.dot(ctx.weights, np.einsum("ij,ij->i", r, r)))


def correlation(store: EmbeddingStore, candidate: int, ctx: Context) -> float:
    if isinstance(ctx, VertexContext):
        return f1(store, candidate, ctx)
    return f2(store, candidate, ctx)


def correlation_and_grad(
    store: EmbeddingStore,
    candidate: int,
    ctx: Context,
) -> tuple[float, Gradient]:
    """Value and gradient of f1/f2 with respect to every participating vector."""
    grad = Gradient()
    w = ctx.weights[:, None]
    if isinstance(ctx, VertexContext):
        r = _vertex_residuals(store, candidate, ctx)
        s = ctx.signs[:, None]
        grad.add_vertex(np.array([candidate]), -2.0 * np.sum(w * s * r, axis=0))
        grad.add_vertex(ctx.others, 2.0 * w * s * r)
        grad.add_edge(ctx.edges, -2.0 * w * r)
    else:
        r = _edge_residuals(store, candidate, ctx)
        grad.add_edge(np.array([candidate]), -2.0 * np.sum(w * r, axis=0))
        grad.add_vertex(ctx.heads, -2.0 * w * r)
        grad.add_vertex(ctx.tails, 2.0 * w * r)
    value = -float(np.dot(ctx.weights, np.einsum("ij,ij->i", r, r)))
    return value, grad


# =============================================================================
# Log-likelihood
# =============================================================================

def log_sigmoid(z: float) -> float:
    return -float(np.logaddexp(0.0, -z))


def sigmoid(z: float) -> float:
    return float(np.exp(log_sigmoid(z)))


def log_likelihood(f_pos: float, f_negs: Sequence[float]) -> float:
    """``log sigma(f_pos) + sum log sigma(-f_neg)``."""
    return log_sigmoid(f_pos) + sum(log_sigmoid(-f) for f in f_negs)


def log_prob_and_grad(
    store: EmbeddingStore,
    ctx: Context,
    negatives: Sequence[int],
) -> tuple[float, Gradient]:
    """Negative-sampling log-likelihood of the owner of ``ctx`` and its gradient."""
    f_pos, g_pos = correlation_and_grad(store, ctx.owner, ctx)
    total = Gradient()
    total.extend(g_pos, 1.0 - sigmoid(f_pos))
    value = log_sigmoid(f_pos)
    for neg in negatives:
        f_neg, g_neg = correlation_and_grad(store, neg, ctx)
        total.extend(g_neg, -sigmoid(f_neg))
        value += log_sigmoid(-f_neg)
    return value, total


def log_prob_value(store: EmbeddingStore, ctx: Context, negatives: Sequence[int]) -> float:
    f_pos = correlation(store, ctx.owner, ctx)
    return log_likelihood(f_pos, [correlation(store, n, ctx) for n in negatives])


def log_prob(
    kg: KnowledgeGraph,
    store: EmbeddingStore,
    owner: ObjectRef,
    sampler: "NegativeSampler",
    n: int,
) -> float:
    """Log-likelihood of ``owner`` against ``n`` freshly drawn negatives."""
    glkg = kg.generalize(owner, sampler.mode)
    ctx = compile_context(kg, glkg)
    return log_prob_value(store, ctx, sampler.sample(owner, n))
