"""
Embedding store for vertices and edges.

Holds dense float64 vectors keyed by the knowledge graph's vertex and edge
ids, with a plain-text file format that round-trips exactly.
"""

from pathlib import Path

import numpy as np
import structlog

from kgqc.exceptions import EmbeddingFileError, UnknownObjectError
from kgqc.models import ObjectKind
from kgqc.storage.graph import KnowledgeGraph, ObjectRef

logger = structlog.get_logger()


def translate_score(h: np.ndarray, e: np.ndarray, t: np.ndarray) -> float:
    """Squared L2 translation residual ``||h + e - t||^2``."""
    if not (h.shape == e.shape == t.shape):
        raise ValueError(f"dimension mismatch: {h.shape}, {e.shape}, {t.shape}")
    r = h + e - t
    return float(np.dot(r, r))


def normalize_rows(matrix: np.ndarray, rows: np.ndarray | None = None) -> None:
    """Scale rows to unit L2 norm in place; zero rows are left alone."""
    block = matrix if rows is None else matrix[rows]
    norms = np.linalg.norm(block, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    if rows is None:
        matrix /= norms
    else:
        matrix[rows] = block / norms


class EmbeddingStore:
    """
    Vectors for every vertex and edge of one knowledge graph.

    Row ``i`` of ``vertex_vecs`` belongs to vertex id ``i`` (label
    ``vertex_labels[i]``); likewise for edges.
    """

    def __init__(
        self,
        vertex_labels: list[str] | tuple[str, ...],
        edge_labels: list[str] | tuple[str, ...],
        vertex_vecs: np.ndarray,
        edge_vecs: np.ndarray,
    ):
        vertex_vecs = np.asarray(vertex_vecs, dtype=np.float64)
        edge_vecs = np.asarray(edge_vecs, dtype=np.float64)
        if vertex_vecs.ndim != 2 or edge_vecs.ndim != 2:
            raise ValueError("vector tables must be two-dimensional")
        if vertex_vecs.shape[1] != edge_vecs.shape[1]:
            raise ValueError("vertex and edge vectors differ in dimension")
        if len(vertex_labels) != len(vertex_vecs) or len(edge_labels) != len(edge_vecs):
            raise ValueError("label count does not match vector count")

        self.vertex_labels = tuple(vertex_labels)
        self.edge_labels = tuple(edge_labels)
        self.vertex_vecs = vertex_vecs
        self.edge_vecs = edge_vecs
        self._vertex_index = {label: i for i, label in enumerate(self.vertex_labels)}
        self._edge_index = {label: i for i, label in enumerate(self.edge_labels)}

    @property
    def dim(self) -> int:
        return int(self.vertex_vecs.shape[1])

    @classmethod
    def random(
        cls,
        kg: KnowledgeGraph,
        dim: int,
        rng: np.random.Generator,
    ) -> "EmbeddingStore":
        """Uniform init in ``[-6/sqrt(d), 6/sqrt(d)]``, vertex rows normalised."""
        bound = 6.0 / np.sqrt(dim)
        vertex_vecs = rng.uniform(-bound, bound, size=(kg.num_vertices, dim))
        edge_vecs = rng.uniform(-bound, bound, size=(kg.num_edges, dim))
        normalize_rows(vertex_vecs)
        return cls(kg.vertex_labels, kg.edge_labels, vertex_vecs, edge_vecs)

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(
            self.vertex_labels,
            self.edge_labels,
            self.vertex_vecs.copy(),
            self.edge_vecs.copy(),
        )

    # -------------------------------------------------------------------------
    # Lookup
    # -------------------------------------------------------------------------

    def _table(self, kind: ObjectKind) -> np.ndarray:
        return self.vertex_vecs if kind is ObjectKind.VERTEX else self.edge_vecs

    def vector(self, ref: ObjectRef) -> np.ndarray:
        table = self._table(ref.kind)
        if not 0 <= ref.id < len(table):
            raise UnknownObjectError(f"no vector for {ref.kind.value} id {ref.id}")
        return table[ref.id]

    def vertex(self, vid: int) -> np.ndarray:
        return self.vector(ObjectRef.vertex(vid))

    def edge(self, eid: int) -> np.ndarray:
        return self.vector(ObjectRef.edge(eid))

    def ref(self, kind: ObjectKind, label: str) -> ObjectRef:
        index = self._vertex_index if kind is ObjectKind.VERTEX else self._edge_index
        if label not in index:
            raise UnknownObjectError(f"no vector for {kind.value} '{label}'")
        return ObjectRef(kind, index[label])

    def label(self, ref: ObjectRef) -> str:
        labels = self.vertex_labels if ref.kind is ObjectKind.VERTEX else self.edge_labels
        return labels[ref.id]

    def aligned_to(self, kg: KnowledgeGraph) -> "EmbeddingStore":
        """Reorder rows to follow ``kg``'s id assignment."""
        if self.vertex_labels == kg.vertex_labels and self.edge_labels == kg.edge_labels:
            return self
        try:
            vrows = [self._vertex_index[label] for label in kg.vertex_labels]
            erows = [self._edge_index[label] for label in kg.edge_labels]
        except KeyError as e:
            raise EmbeddingFileError(f"embedding file has no vector for {e.args[0]!r}") from None
        return EmbeddingStore(
            kg.vertex_labels,
            kg.edge_labels,
            self.vertex_vecs[vrows],
            self.edge_vecs[erows],
        )

    def nearest_neighbors(self, ref: ObjectRef, k: int) -> list[tuple[ObjectRef, float]]:
        """``k`` objects of the same kind by ascending Euclidean distance."""
        query = self.vector(ref)
        if k <= 0:
            return []
        table = self._table(ref.kind)
        distances = np.linalg.norm(table - query, axis=1)
        order = [i for i in np.argsort(distances, kind="stable") if i != ref.id]
        return [(ObjectRef(ref.kind, int(i)), float(distances[i])) for i in order[:k]]

    # -------------------------------------------------------------------------
    # Persistence
    # -------------------------------------------------------------------------

    def save(self, path: Path) -> None:
        """Write ``dim/vertices/edges`` header then one row per object."""
        lines = [f"dim {self.dim} vertices {len(self.vertex_labels)} edges {len(self.edge_labels)}"]
        for tag, labels, table in (
            ("V", self.vertex_labels, self.vertex_vecs),
            ("E", self.edge_labels, self.edge_vecs),
        ):
            for label, row in zip(labels, table, strict=True):
                values = " ".join(repr(float(x)) for x in row)
                lines.append(f"{tag}\t{label}\t{values}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(
            "Embeddings saved",
            path=str(path),
            dim=self.dim,
            vertices=len(self.vertex_labels),
            edges=len(self.edge_labels),
        )

    @classmethod
    def load(cls, path: Path) -> "EmbeddingStore":
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise EmbeddingFileError(f"cannot read {path}: {e}") from e
        if not lines:
            raise EmbeddingFileError(f"{path} is empty")

        header = lines[0].split()
        if len(header) != 6 or header[0::2] != ["dim", "vertices", "edges"]:
            raise EmbeddingFileError(f"malformed header: {lines[0]!r}")
        try:
            dim, nv, ne = (int(x) for x in header[1::2])
        except ValueError:
            raise EmbeddingFileError(f"malformed header: {lines[0]!r}") from None
        if dim < 1 or nv < 0 or ne < 0:
            raise EmbeddingFileError(f"malformed header: {lines[0]!r}")

        rows = [line for line in lines[1:] if line.strip()]
        if len(rows) != nv + ne:
            raise EmbeddingFileError(
                f"expected {nv + ne} vector rows, found {len(rows)} (truncated file?)"
            )

        labels: dict[str, list[str]] = {"V": [], "E": []}
        vectors: dict[str, list[list[float]]] = {"V": [], "E": []}
        for number, line in enumerate(rows, start=2):
            fields = line.split("\t")
            expected_tag = "V" if number - 2 < nv else "E"
            if len(fields) != 3 or fields[0] != expected_tag:
                raise EmbeddingFileError(f"line {number}: malformed row")
            try:
                values = [float(x) for x in fields[2].split()]
            except ValueError:
                raise EmbeddingFileError(f"line {number}: non-numeric component") from None
            if len(values) != dim:
                raise EmbeddingFileError(
                    f"line {number}: expected {dim} components, found {len(values)}"
                )
            if not np.all(np.isfinite(values)):
                raise EmbeddingFileError(f"line {number}: non-finite component")
            labels[fields[0]].append(fields[1])
            vectors[fields[0]].append(values)

        store = cls(
            labels["V"],
            labels["E"],
            np.array(vectors["V"], dtype=np.float64).reshape(nv, dim),
            np.array(vectors["E"], dtype=np.float64).reshape(ne, dim),
        )
        logger.info("Embeddings loaded", path=str(path), dim=dim, vertices=nv, edges=ne)
        return store
