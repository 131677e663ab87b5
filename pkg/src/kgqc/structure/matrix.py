"""
Structure matrices, cost tables, and candidate-set mean vectors.

Cell ``[i][j] = k`` (1-based) places edge set ``k`` from vertex set ``i``
to vertex set ``j``; 0 means no edge.
"""

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import NamedTuple

import networkx as nx
import numpy as np

from kgqc.models import CandidateSet
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.storage.graph import ObjectRef

Placement = tuple[int, int]  # (i, j) for one edge set


class ValidityReport(NamedTuple):
    valid: bool
    violations: tuple[int, ...]  # violated constraint numbers, 1..5

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True, eq=False)
class StructureMatrix:
    cells: np.ndarray
    m: int

    @property
    def n(self) -> int:
        return int(self.cells.shape[0])

    @classmethod
    def from_placements(cls, n: int, placements: Mapping[int, Placement]) -> "StructureMatrix":
        """Build from ``{k: (i, j)}`` with 0-based ``k``; a later ``k`` overwrites a shared cell."""
        cells = np.zeros((n, n), dtype=int)
        for k in sorted(placements):
            i, j = placements[k]
            cells[i, j] = k + 1
        return cls(cells, len(placements))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], m: int) -> "StructureMatrix":
        return cls(np.array([list(r) for r in rows], dtype=int), m)

    def nonzero(self) -> list[tuple[int, int, int]]:
        """``(k, i, j)`` for every occupied cell, ordered by ``k``; ``k`` is 1-based."""
        return sorted((int(self.cells[i, j]), int(i), int(j)) for i, j in zip(*np.nonzero(self.cells)))

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.cells]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StructureMatrix):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash((self.m, self.cells.tobytes()))

    def __repr__(self) -> str:
        return f"StructureMatrix({self.tolist()}, m={self.m})"


def _connected(n: int, links: Iterable[Placement]) -> bool:
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for i, j in links:
        adjacency[i].add(j)
        adjacency[j].add(i)
    seen = {0}
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nxt in adjacency[node] - seen:
            seen.add(nxt)
            queue.append(nxt)
    return len(seen) == n


def is_valid(M: StructureMatrix) -> ValidityReport:
    """
    Check the five structure-graph constraints:

    1. zero diagonal
    2. no cell pair ``[i][j]`` and ``[j][i]`` both occupied
    3. exactly ``m`` occupied cells
    4. the occupied cells connect all ``n`` vertex sets
    5. every edge label ``1..m`` appears
    """
    cells = M.cells
    n = M.n
    if cells.min(initial=0) < 0 or cells.max(initial=0) > M.m:
        raise ValueError(f"cell values must lie in 0..{M.m}")

    violations = []
    if np.any(np.diag(cells) != 0):
        violations.append(1)
    occupied = cells != 0
    off_diagonal = occupied & ~np.eye(n, dtype=bool)
    if np.any(off_diagonal & off_diagonal.T):
        violations.append(2)
    if int(occupied.sum()) != M.m:
        violations.append(3)
    links = nx.Graph()
    links.add_nodes_from(range(n))
    links.add_edges_from(zip(*np.nonzero(occupied)))
    if not nx.is_connected(links):
        violations.append(4)
    if set(cells[occupied].tolist()) != set(range(1, M.m + 1)):
        violations.append(5)
    return ValidityReport(not violations, tuple(violations))


def placements_valid(n: int, placements: Iterable[Placement]) -> bool:
    """Validity of one-placement-per-edge-set layouts, without building a matrix."""
    placements = list(placements)
    cells = set(placements)
    if len(cells) != len(placements):
        return False
    for i, j in cells:
        if i == j or (j, i) in cells:
            return False
    return _connected(n, cells)


# =============================================================================
# Costs
# =============================================================================

@dataclass(frozen=True, eq=False)
class CostTables:
    """``tables[k, i, j] = ||V_i + E_k - V_j||^2`` with +inf on every diagonal."""
    tables: np.ndarray

    @property
    def m(self) -> int:
        return int(self.tables.shape[0])

    @property
    def n(self) -> int:
        return int(self.tables.shape[1])

    @classmethod
    def from_means(cls, vertex_means: np.ndarray, edge_means: np.ndarray) -> "CostTables":
        V = np.asarray(vertex_means, dtype=np.float64)
        E = np.asarray(edge_means, dtype=np.float64)
        diff = V[None, :, None, :] + E[:, None, None, :] - V[None, None, :, :]
        tables = np.einsum("kijd,kijd->kij", diff, diff)
        idx = np.arange(V.shape[0])
        tables[:, idx, idx] = np.inf
        return cls(tables)

    def cost(self, k: int, i: int, j: int) -> float:
        """Cost of 0-based edge set ``k`` on cell ``(i, j)``."""
        return float(self.tables[k, i, j])


def cost_score(M: StructureMatrix, tables: CostTables) -> float:
    """Sum of the placed edge sets' costs."""
    return float(sum(tables.tables[k - 1, i, j] for k, i, j in M.nonzero()))


def mean_vector(cset: CandidateSet, store: EmbeddingStore) -> np.ndarray:
    if not cset.candidates:
        raise ValueError(f"candidate set of '{cset.phrase.text}' is empty")
    return np.mean([store.vector(ObjectRef(c.kind, c.id)) for c in cset.candidates], axis=0)


def build_cost_tables(
    vertex_sets: list[CandidateSet],
    edge_sets: list[CandidateSet],
    store: EmbeddingStore,
) -> CostTables:
    return CostTables.from_means(
        np.array([mean_vector(s, store) for s in vertex_sets]).reshape(len(vertex_sets), store.dim),
        np.array([mean_vector(s, store) for s in edge_sets]).reshape(len(edge_sets), store.dim),
    )


def dump_structure(tables: CostTables, M: StructureMatrix) -> str:
    """TSV ``k i j cost`` rows (1-based, off-diagonal) followed by the matrix rows."""
    lines = ["k\ti\tj\tcost"]
    for k in range(tables.m):
        for i in range(tables.n):
            for j in range(tables.n):
                if i != j:
                    lines.append(f"{k + 1}\t{i + 1}\t{j + 1}\t{tables.cost(k, i, j):.6f}")
    lines.append("matrix")
    lines.extend("\t".join(str(x) for x in row) for row in M.tolist())
    return "\n".join(lines) + "\n"
