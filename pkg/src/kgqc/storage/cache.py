"""
Offline cache of generalized local knowledge graphs.

The cache is JSON, keyed by labels so it stays readable, and records the
owners whose generalized graph is empty.
"""

from pathlib import Path

import structlog
from pydantic import BaseModel, Field, ValidationError

from kgqc.exceptions import CacheError, UnknownObjectError
from kgqc.models import ContextMode, ObjectKind
from kgqc.storage.graph import GeneralizedLocalKg, GeneralizedTriple, KnowledgeGraph, ObjectRef

logger = structlog.get_logger()


class CachedTriple(BaseModel):
    head: str
    edge: str
    tail: str
    support: int = Field(ge=1)


class CachedGlkg(BaseModel):
    kind: ObjectKind
    label: str
    denominator: int = Field(ge=0)
    triples: list[CachedTriple]


class GlkgCache(BaseModel):
    """All non-empty generalized graphs of a knowledge graph."""
    mode: ContextMode
    triple_count: int
    entries: list[CachedGlkg]
    skipped: list[str] = Field(default_factory=list)  # "vertex:<label>" / "edge:<label>"

    def entry(self, kind: ObjectKind, label: str) -> CachedGlkg | None:
        for e in self.entries:
            if e.kind is kind and e.label == label:
                return e
        return None

    def prime(self, kg: KnowledgeGraph) -> int:
        """Install every cached entry into ``kg``'s memo; returns the count."""
        if self.triple_count != len(kg):
            raise CacheError(
                f"cache was built for {self.triple_count} triples, graph has {len(kg)}"
            )
        try:
            for e in self.entries:
                owner = kg.ref(e.kind, e.label)
                triples = tuple(
                    GeneralizedTriple(kg.vertex(t.head), kg.edge(t.edge), kg.vertex(t.tail), t.support)
                    for t in e.triples
                )
                kg.prime(GeneralizedLocalKg(owner, triples, e.denominator, self.mode))
        except UnknownObjectError as err:
            raise CacheError(f"cache does not match graph: {err}") from err
        return len(self.entries)


def _owners(kg: KnowledgeGraph) -> list[ObjectRef]:
    return [ObjectRef.vertex(v) for v in range(kg.num_vertices)] + [
        ObjectRef.edge(e) for e in range(kg.num_edges)
    ]


def build_cache(kg: KnowledgeGraph, mode: ContextMode = ContextMode.GENERALIZED) -> GlkgCache:
    """Generalize every vertex and edge of ``kg``."""
    entries: list[CachedGlkg] = []
    skipped: list[str] = []
    for owner in _owners(kg):
        glkg = kg.generalize(owner, mode)
        if not glkg:
            skipped.append(f"{owner.kind.value}:{kg.label(owner)}")
            continue
        entries.append(
            CachedGlkg(
                kind=owner.kind,
                label=kg.label(owner),
                denominator=glkg.denominator,
                triples=[
                    CachedTriple(
                        head=kg.vertex_label(t.head),
                        edge=kg.edge_label(t.edge),
                        tail=kg.vertex_label(t.tail),
                        support=t.support,
                    )
                    for t in glkg.triples
                ],
            )
        )
    logger.info("GL-KG cache built", mode=mode.value, entries=len(entries), skipped=len(skipped))
    return GlkgCache(mode=mode, triple_count=len(kg), entries=entries, skipped=skipped)


def save_cache(cache: GlkgCache, path: Path) -> None:
    Path(path).write_text(cache.model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_cache(path: Path) -> GlkgCache:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CacheError(f"cannot read cache {path}: {e}") from e
    try:
        return GlkgCache.model_validate_json(text)
    except ValidationError as e:
        raise CacheError(f"malformed cache {path}: {e.error_count()} errors") from e
