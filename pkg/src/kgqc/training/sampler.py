"""
Negative sampling with disjoint contexts.

Negatives for an owner are drawn uniformly among trainable owners of the
same kind whose generalized graph shares nothing with the owner's. Graph
membership is compared on owner-abstracted contexts: ``(direction, edge,
other end)`` for vertices and ``(head, tail)`` for edges.
"""

import copy

import numpy as np
import structlog

from kgqc.exceptions import NegativeSamplingError
from kgqc.models import ContextMode, ObjectKind
from kgqc.storage.graph import GeneralizedLocalKg, KnowledgeGraph, ObjectRef

logger = structlog.get_logger()

MAX_ATTEMPTS = 100


def context_signature(glkg: GeneralizedLocalKg) -> frozenset[tuple[object, ...]]:
    owner = glkg.owner.id
    if glkg.owner.kind is ObjectKind.EDGE:
        return frozenset((g.head, g.tail) for g in glkg.triples)
    items: set[tuple[object, ...]] = set()
    for g in glkg.triples:
        if g.head == owner:
            items.add(("out", g.edge, g.tail))
        if g.tail == owner:
            items.add(("in", g.edge, g.head))
    return frozenset(items)


class NegativeSampler:
    """Uniform rejection sampler over same-kind owners with disjoint contexts."""

    def __init__(
        self,
        kg: KnowledgeGraph,
        rng: np.random.Generator,
        mode: ContextMode = ContextMode.GENERALIZED,
        max_attempts: int = MAX_ATTEMPTS,
    ):
        self.kg = kg
        self.rng = rng
        self.mode = mode
        self.max_attempts = max_attempts

        self._signatures: dict[ObjectRef, frozenset[tuple[object, ...]]] = {}
        self._pools: dict[ObjectKind, np.ndarray] = {}
        for kind, count in ((ObjectKind.VERTEX, kg.num_vertices), (ObjectKind.EDGE, kg.num_edges)):
            pool = []
            for i in range(count):
                ref = ObjectRef(kind, i)
                glkg = kg.generalize(ref, mode)
                if glkg:
                    self._signatures[ref] = context_signature(glkg)
                    pool.append(i)
            self._pools[kind] = np.array(pool, dtype=int)
        logger.debug(
            "Negative sampler ready",
            vertices=len(self._pools[ObjectKind.VERTEX]),
            edges=len(self._pools[ObjectKind.EDGE]),
        )

    def with_rng(self, rng: np.random.Generator) -> "NegativeSampler":
        """Copy sharing the precomputed signatures but drawing from ``rng``."""
        clone = copy.copy(self)
        clone.rng = rng
        return clone

    def is_trainable(self, ref: ObjectRef) -> bool:
        return ref in self._signatures

    def trainable(self, kind: ObjectKind) -> list[int]:
        return [int(i) for i in self._pools[kind]]

    def is_disjoint(self, a: ObjectRef, b: ObjectRef) -> bool:
        return a != b and self._signatures[a].isdisjoint(self._signatures[b])

    def sample(self, owner: ObjectRef, n: int) -> list[int]:
        """Draw ``n`` negatives (with replacement) for ``owner``."""
        if owner not in self._signatures:
            raise NegativeSamplingError(
                f"{owner.kind.value} '{self.kg.label(owner)}' has an empty generalized graph"
            )
        pool = self._pools[owner.kind]
        negatives: list[int] = []
        for _ in range(n):
            for _attempt in range(self.max_attempts):
                candidate = ObjectRef(owner.kind, int(pool[self.rng.integers(len(pool))]))
                if self.is_disjoint(owner, candidate):
                    negatives.append(candidate.id)
                    break
            else:
                raise NegativeSamplingError(
                    f"no disjoint negative for {owner.kind.value} '{self.kg.label(owner)}' "
                    f"after {self.max_attempts} draws; the graph may be too small"
                )
        return negatives
