"""
In-memory knowledge graph.

Interns vertex and edge labels, classifies vertices into entities and
classes from type-edge triples, and builds local and generalized local
knowledge graphs plus subdivision-graph hop distances.
"""

from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import networkx as nx
import structlog

from kgqc.exceptions import GraphLoadError, UnknownObjectError
from kgqc.models import ContextMode, ObjectKind, VertexKind

logger = structlog.get_logger()


# =============================================================================
# Value Types
# =============================================================================

class ObjectRef(NamedTuple):
    """Tagged handle for a vertex or an edge."""
    kind: ObjectKind
    id: int

    @classmethod
    def vertex(cls, id: int) -> "ObjectRef":
        return cls(ObjectKind.VERTEX, id)

    @classmethod
    def edge(cls, id: int) -> "ObjectRef":
        return cls(ObjectKind.EDGE, id)


class Triple(NamedTuple):
    head: int
    edge: int
    tail: int


class GeneralizedTriple(NamedTuple):
    """A triple with neighbours replaced by classes, and its raw support count."""
    head: int
    edge: int
    tail: int
    support: int


@dataclass(frozen=True)
class LocalKg:
    owner: ObjectRef
    triples: frozenset[Triple]

    def __len__(self) -> int:
        return len(self.triples)


@dataclass(frozen=True)
class GeneralizedLocalKg:
    """
    Generalized local knowledge graph of one owner.

    ``denominator`` is the raw local graph size used by attention. In
    ``LOCAL`` mode the triples are the raw ones, each with support 1.
    """
    owner: ObjectRef
    triples: tuple[GeneralizedTriple, ...]
    denominator: int
    mode: ContextMode = ContextMode.GENERALIZED

    def __len__(self) -> int:
        return len(self.triples)

    def __bool__(self) -> bool:
        return bool(self.triples)


# =============================================================================
# Knowledge Graph
# =============================================================================

class KnowledgeGraph:
    """
    Immutable interned triple set.

    Vertices and edges live in separate integer namespaces. A vertex is a
    class iff it is the tail of a type-edge triple or is the universal class;
    entities without a declared class belong to the universal class.
    """

    def __init__(
        self,
        triples: Iterable[tuple[str, str, str]],
        type_edge_label: str = "type",
        universal_class_label: str = "Thing",
    ):
        self._vertex_labels: list[str] = []
        self._vertex_ids: dict[str, int] = {}
        self._edge_labels: list[str] = []
        self._edge_ids: dict[str, int] = {}

        self.type_edge = self._intern_edge(type_edge_label)
        self.universal_class = self._intern_vertex(universal_class_label)

        interned = {
            Triple(self._intern_vertex(h), self._intern_edge(e), self._intern_vertex(t))
            for h, e, t in triples
        }
        self.triples: tuple[Triple, ...] = tuple(sorted(interned))
        self._triple_set = frozenset(interned)

        self._by_head: dict[int, list[Triple]] = defaultdict(list)
        self._by_tail: dict[int, list[Triple]] = defaultdict(list)
        self._by_edge: dict[int, list[Triple]] = defaultdict(list)
        self._edge_nodes: dict[int, list[int]] = defaultdict(list)
        for index, t in enumerate(self.triples):
            self._by_head[t.head].append(t)
            self._by_tail[t.tail].append(t)
            self._by_edge[t.edge].append(t)
            self._edge_nodes[t.edge].append(index)

        # Classification
        class_ids = {t.tail for t in self._by_edge.get(self.type_edge, [])}
        class_ids.add(self.universal_class)
        self._kinds = [
            VertexKind.CLASS if v in class_ids else VertexKind.ENTITY
            for v in range(len(self._vertex_labels))
        ]
        self._classes_of: list[frozenset[int]] = []
        self._instances: dict[int, list[int]] = defaultdict(list)
        for v in range(len(self._vertex_labels)):
            if self._kinds[v] is VertexKind.CLASS:
                self._classes_of.append(frozenset({v}))
                continue
            declared = frozenset(
                t.tail for t in self._by_head.get(v, []) if t.edge == self.type_edge
            )
            classes = declared or frozenset({self.universal_class})
            self._classes_of.append(classes)
            for c in classes:
                self._instances[c].append(v)

        self._glkg_cache: dict[tuple[ObjectRef, ContextMode], GeneralizedLocalKg] = {}
        self._subdivision: nx.Graph | None = None
        self._bfs_cache: dict[tuple[ObjectRef, int], dict[object, int]] = {}

    def _intern_vertex(self, label: str) -> int:
        vid = self._vertex_ids.get(label)
        if vid is None:
            vid = len(self._vertex_labels)
            self._vertex_ids[label] = vid
            self._vertex_labels.append(label)
        return vid

    def _intern_edge(self, label: str) -> int:
        eid = self._edge_ids.get(label)
        if eid is None:
            eid = len(self._edge_labels)
            self._edge_ids[label] = eid
            self._edge_labels.append(label)
        return eid

    # -------------------------------------------------------------------------
    # Lookup
    # -------------------------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self._vertex_labels)

    @property
    def num_edges(self) -> int:
        return len(self._edge_labels)

    def __len__(self) -> int:
        return len(self.triples)

    def vertex(self, label: str) -> int:
        try:
            return self._vertex_ids[label]
        except KeyError:
            raise UnknownObjectError(f"unknown vertex '{label}'") from None

    def edge(self, label: str) -> int:
        try:
            return self._edge_ids[label]
        except KeyError:
            raise UnknownObjectError(f"unknown edge '{label}'") from None

    def has_vertex(self, label: str) -> bool:
        return label in self._vertex_ids

    def has_edge(self, label: str) -> bool:
        return label in self._edge_ids

    def vertex_label(self, vid: int) -> str:
        self._check_vertex(vid)
        return self._vertex_labels[vid]

    def edge_label(self, eid: int) -> str:
        self._check_edge(eid)
        return self._edge_labels[eid]

    def label(self, ref: ObjectRef) -> str:
        if ref.kind is ObjectKind.VERTEX:
            return self.vertex_label(ref.id)
        return self.edge_label(ref.id)

    def ref(self, kind: ObjectKind, label: str) -> ObjectRef:
        if kind is ObjectKind.VERTEX:
            return ObjectRef.vertex(self.vertex(label))
        return ObjectRef.edge(self.edge(label))

    @property
    def vertex_labels(self) -> tuple[str, ...]:
        return tuple(self._vertex_labels)

    @property
    def edge_labels(self) -> tuple[str, ...]:
        return tuple(self._edge_labels)

    def kind(self, vid: int) -> VertexKind:
        self._check_vertex(vid)
        return self._kinds[vid]

    def is_class(self, vid: int) -> bool:
        return self.kind(vid) is VertexKind.CLASS

    def classes_of(self, vid: int) -> frozenset[int]:
        """Classes of an entity; a class vertex is its own class."""
        self._check_vertex(vid)
        return self._classes_of[vid]

    def instances_of(self, cid: int) -> list[int]:
        self._check_vertex(cid)
        return list(self._instances.get(cid, []))

    def class_ids(self) -> list[int]:
        return [v for v, k in enumerate(self._kinds) if k is VertexKind.CLASS]

    def triples_with_head(self, vid: int) -> list[Triple]:
        return self._by_head.get(vid, [])

    def triples_with_tail(self, vid: int) -> list[Triple]:
        return self._by_tail.get(vid, [])

    def triples_with_edge(self, eid: int) -> list[Triple]:
        return self._by_edge.get(eid, [])

    def contains(self, triple: Triple) -> bool:
        return triple in self._triple_set

    def _check_vertex(self, vid: int) -> None:
        if not 0 <= vid < len(self._vertex_labels):
            raise UnknownObjectError(f"unknown vertex id {vid}")

    def _check_edge(self, eid: int) -> None:
        if not 0 <= eid < len(self._edge_labels):
            raise UnknownObjectError(f"unknown edge id {eid}")

    def _check_ref(self, ref: ObjectRef) -> None:
        if ref.kind is ObjectKind.VERTEX:
            self._check_vertex(ref.id)
        else:
            self._check_edge(ref.id)

    # -------------------------------------------------------------------------
    # Local Graphs
    # -------------------------------------------------------------------------

    def local_kg(self, owner: ObjectRef) -> LocalKg:
        """Incident (vertex) or labelled (edge) triples, type triples excluded."""
        self._check_ref(owner)
        if owner.kind is ObjectKind.VERTEX:
            raw = set(self._by_head.get(owner.id, [])) | set(self._by_tail.get(owner.id, []))
        else:
            raw = set(self._by_edge.get(owner.id, []))
        return LocalKg(
            owner=owner,
            triples=frozenset(t for t in raw if t.edge != self.type_edge),
        )

    def generalize(
        self,
        owner: ObjectRef,
        mode: ContextMode = ContextMode.GENERALIZED,
    ) -> GeneralizedLocalKg:
        """Build (and memoise) the generalized local graph of ``owner``."""
        self._check_ref(owner)
        key = (owner, mode)
        cached = self._glkg_cache.get(key)
        if cached is not None:
            return cached

        if mode is ContextMode.LOCAL:
            local = self.local_kg(owner)
            result = GeneralizedLocalKg(
                owner=owner,
                triples=tuple(GeneralizedTriple(*t, 1) for t in sorted(local.triples)),
                denominator=len(local),
                mode=mode,
            )
        elif owner.kind is ObjectKind.EDGE:
            result = self._generalize_edge(owner)
        elif self._kinds[owner.id] is VertexKind.CLASS:
            result = self._generalize_class(owner)
        else:
            support, denominator = self._entity_support(owner.id)
            result = _freeze(owner, support, denominator)

        self._glkg_cache[key] = result
        return result

    def prime(self, glkg: GeneralizedLocalKg) -> None:
        """Seed the memo with a precomputed generalized graph."""
        self._check_ref(glkg.owner)
        self._glkg_cache[(glkg.owner, glkg.mode)] = glkg

    def _entity_support(self, vid: int) -> tuple[Counter[tuple[int, int, int]], int]:
        support: Counter[tuple[int, int, int]] = Counter()
        local = self.local_kg(ObjectRef.vertex(vid))
        for t in local.triples:
            if t.head == vid:
                for c in self._classes_of[t.tail]:
                    support[(vid, t.edge, c)] += 1
            else:
                for c in self._classes_of[t.head]:
                    support[(c, t.edge, vid)] += 1
        return support, len(local)

    def _generalize_class(self, owner: ObjectRef) -> GeneralizedLocalKg:
        cid = owner.id
        support: Counter[tuple[int, int, int]] = Counter()
        denominator = 0
        for instance in self._instances.get(cid, []):
            inst_support, inst_size = self._entity_support(instance)
            denominator += inst_size
            for (h, e, t), count in inst_support.items():
                h = cid if h == instance else h
                t = cid if t == instance else t
                support[(h, e, t)] += count
        return _freeze(owner, support, denominator)

    def _generalize_edge(self, owner: ObjectRef) -> GeneralizedLocalKg:
        local = self.local_kg(owner)
        support: Counter[tuple[int, int, int]] = Counter()
        for t in local.triples:
            forms: set[tuple[int, int, int]] = set()
            for ch in self._classes_of[t.head]:
                for ct in self._classes_of[t.tail]:
                    forms.add((ch, t.edge, ct))
                    forms.add((t.head, t.edge, ct))
                    forms.add((ch, t.edge, t.tail))
            for form in forms:
                support[form] += 1
        return _freeze(owner, support, len(local))

    # -------------------------------------------------------------------------
    # Hop Distance
    # -------------------------------------------------------------------------

    def _subdivision_graph(self) -> nx.Graph:
        """Each triple becomes a node linked to its head and tail."""
        if self._subdivision is None:
            graph = nx.Graph()
            graph.add_nodes_from(("v", v) for v in range(len(self._vertex_labels)))
            for index, t in enumerate(self.triples):
                node = ("t", index)
                graph.add_node(node, edge=t.edge)
                graph.add_edge(("v", t.head), node)
                graph.add_edge(node, ("v", t.tail))
            self._subdivision = graph
            logger.debug(
                "Subdivision graph built",
                nodes=graph.number_of_nodes(),
                links=graph.number_of_edges(),
            )
        return self._subdivision

    def _nodes_of(self, ref: ObjectRef) -> list[object]:
        if ref.kind is ObjectKind.VERTEX:
            return [("v", ref.id)]
        return [("t", index) for index in self._edge_nodes.get(ref.id, [])]

    def _distances_from(self, ref: ObjectRef, max_hops: int) -> dict[object, int]:
        key = (ref, max_hops)
        cached = self._bfs_cache.get(key)
        if cached is None:
            sources = self._nodes_of(ref)
            if sources:
                cached = nx.multi_source_dijkstra_path_length(
                    self._subdivision_graph(), set(sources), cutoff=max_hops
                )
            else:
                cached = {}
            self._bfs_cache[key] = cached
        return cached

    def hop_distance(self, a: ObjectRef, b: ObjectRef, max_hops: int) -> int | None:
        """
        Shortest subdivision-graph distance between two objects.

        Returns None when the objects are further apart than ``max_hops``.
        """
        if max_hops < 1:
            raise ValueError("max_hops must be at least 1")
        self._check_ref(a)
        self._check_ref(b)
        if a == b:
            return 0
        distances = self._distances_from(a, max_hops)
        found = [distances[n] for n in self._nodes_of(b) if n in distances]
        return min(found) if found else None


def _freeze(
    owner: ObjectRef,
    support: Counter[tuple[int, int, int]],
    denominator: int,
) -> GeneralizedLocalKg:
    return GeneralizedLocalKg(
        owner=owner,
        triples=tuple(GeneralizedTriple(h, e, t, n) for (h, e, t), n in sorted(support.items())),
        denominator=denominator,
    )


# =============================================================================
# Loading
# =============================================================================

def read_triples(path: Path) -> list[tuple[str, str, str]]:
    """Read a TSV triple file; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise GraphLoadError(f"cannot read {path}: {e}") from e

    triples: list[tuple[str, str, str]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 3 or not all(fields):
            raise GraphLoadError(
                f"expected 3 tab-separated labels, got {len(fields)}", line_number=number
            )
        triples.append((fields[0], fields[1], fields[2]))
    return triples


def load_kg(
    source: Path,
    type_edge_label: str = "type",
    universal_class_label: str = "Thing",
) -> KnowledgeGraph:
    """Load and classify a knowledge graph from a triple file."""
    triples = read_triples(source)
    if not triples:
        raise GraphLoadError(f"no triples in {source}")

    kg = KnowledgeGraph(triples, type_edge_label, universal_class_label)
    logger.info(
        "Graph loaded",
        path=str(source),
        triples=len(kg),
        vertices=kg.num_vertices,
        edges=kg.num_edges,
        classes=len(kg.class_ids()),
    )
    return kg
