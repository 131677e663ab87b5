"""
Optimal structure search.

``solve`` places each edge set at its cheapest cell. When that layout is
not a valid structure graph it re-places growing subsets of edge sets
(one, then two, ...) by branch-and-bound and keeps the cheapest valid layout
of the first subset size that produces one. This is a heuristic;
``brute_force_solve`` enumerates the whole space for comparison.
"""

import itertools
import math
from collections.abc import Iterable

import structlog

from kgqc.exceptions import NoValidStructureError, SearchSpaceTooLargeError
from kgqc.models import CandidateSet
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.structure.matrix import (
    CostTables,
    Placement,
    StructureMatrix,
    build_cost_tables,
    is_valid,
    placements_valid,
)

logger = structlog.get_logger()

DEFAULT_MAX_SEARCH_SPACE = 10_000_000


def _check_shape(tables: CostTables) -> None:
    if tables.n < 2 or tables.m < 1:
        raise NoValidStructureError(
            f"need at least 2 entity phrases and 1 relation phrase, got {tables.n} and {tables.m}"
        )


def _cells(n: int) -> list[Placement]:
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _layout_cost(tables: CostTables, placements: list[Placement]) -> float:
    return sum(tables.cost(k, i, j) for k, (i, j) in enumerate(placements))


def ideal_placements(tables: CostTables) -> list[Placement]:
    """Cheapest cell per edge set; ties go to the first cell in row-major order."""
    placements = []
    for k in range(tables.m):
        flat = int(tables.tables[k].argmin())
        placements.append(divmod(flat, tables.n))
    return placements


def ideal_matrix(tables: CostTables) -> StructureMatrix:
    return StructureMatrix.from_placements(tables.n, dict(enumerate(ideal_placements(tables))))


def _component_count(n: int, cells: Iterable[Placement]) -> int:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for i, j in cells:
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            count -= 1
    return count


def _slack(limit: float) -> float:
    # partial sums are accumulated in a different order than _layout_cost
    return limit + 1e-9 * max(1.0, abs(limit))


def _best_change(
    tables: CostTables,
    base: list[Placement],
    subset: tuple[int, ...],
    bound: float | None = None,
) -> tuple[float, list[Placement]] | None:
    """
    Cheapest valid layout re-placing every edge set of ``subset``.

    Branch-and-bound over each edge set's free cells in cost order. Among
    equal-cost layouts the one whose cells come first in row-major order
    wins. Branches that cannot reach ``bound`` are skipped, so a result
    costlier than ``bound`` may be missed.
    """
    n = tables.n
    cells = _cells(n)
    index = {cell: pos for pos, cell in enumerate(cells)}
    chosen = set(subset)
    fixed = [k for k in range(tables.m) if k not in chosen]
    taken = {base[k] for k in fixed}
    if len(taken) != len(fixed) or any((j, i) in taken for i, j in taken):
        return None

    options: list[list[tuple[float, Placement]]] = []
    for k in subset:
        free = [(tables.cost(k, *cell), cell) for cell in cells
                if cell not in taken and (cell[1], cell[0]) not in taken]
        if not free:
            return None
        free.sort(key=lambda item: (item[0], index[item[1]]))
        options.append(free)

    depth_total = len(subset)
    floor = [0.0] * (depth_total + 1)
    for depth in range(depth_total - 1, -1, -1):
        floor[depth] = floor[depth + 1] + options[depth][0][0]
    fixed_cost = sum(tables.cost(k, *base[k]) for k in fixed)

    limit = math.inf if bound is None else bound
    best: tuple[float, tuple[int, ...], list[Placement]] | None = None
    occupied = set(taken)
    picked: list[Placement] = []

    def visit(depth: int, partial: float) -> None:
        nonlocal best, limit
        if depth == depth_total:
            layout = list(base)
            for k, cell in zip(subset, picked, strict=True):
                layout[k] = cell
            if _component_count(n, layout) != 1:
                return
            cost = _layout_cost(tables, layout)
            order = tuple(index[cell] for cell in picked)
            if best is None or (cost, order) < best[:2]:
                best = (cost, order, layout)
                limit = min(limit, cost)
            return
        # each placement joins at most two components
        if _component_count(n, occupied) - 1 > depth_total - depth:
            return
        for cost, cell in options[depth]:
            if fixed_cost + partial + cost + floor[depth + 1] > _slack(limit):
                break
            if cell in occupied or (cell[1], cell[0]) in occupied:
                continue
            occupied.add(cell)
            picked.append(cell)
            visit(depth + 1, partial + cost)
            picked.pop()
            occupied.discard(cell)

    visit(0, 0.0)
    if best is None:
        return None
    return best[0], best[2]


def solve_tables(tables: CostTables) -> StructureMatrix:
    _check_shape(tables)
    ideal = ideal_placements(tables)
    if placements_valid(tables.n, ideal):
        return StructureMatrix.from_placements(tables.n, dict(enumerate(ideal)))

    # fewer than n - 1 links never connect n vertex sets
    if tables.m >= tables.n - 1:
        for num in range(1, tables.m + 1):
            best: tuple[float, list[Placement]] | None = None
            for subset in itertools.combinations(range(tables.m), num):
                found = _best_change(tables, ideal, subset, None if best is None else best[0])
                if found is not None and (best is None or found[0] < best[0]):
                    best = found
            if best is not None:
                logger.debug("Structure modified", replaced=num, cost=best[0])
                return StructureMatrix.from_placements(tables.n, dict(enumerate(best[1])))

    raise NoValidStructureError(
        f"no valid structure for {tables.n} entity and {tables.m} relation phrases"
    )


def solve(
    vertex_sets: list[CandidateSet],
    edge_sets: list[CandidateSet],
    store: EmbeddingStore,
) -> StructureMatrix:
    """Structure matrix of the cheapest structure graph found over the candidate sets."""
    return solve_tables(build_cost_tables(vertex_sets, edge_sets, store))


def brute_force_tables(
    tables: CostTables,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> StructureMatrix:
    _check_shape(tables)
    space = tables.n ** (2 * tables.m)
    if space > max_search_space:
        raise SearchSpaceTooLargeError(
            f"{tables.n}^(2*{tables.m}) = {space} layouts exceeds {max_search_space}"
        )
    best: tuple[float, list[Placement]] | None = None
    for layout in itertools.product(_cells(tables.n), repeat=tables.m):
        if not placements_valid(tables.n, layout):
            continue
        cost = _layout_cost(tables, list(layout))
        if best is None or cost < best[0]:
            best = (cost, list(layout))
    if best is None:
        raise NoValidStructureError(
            f"no valid structure for {tables.n} entity and {tables.m} relation phrases"
        )
    M = StructureMatrix.from_placements(tables.n, dict(enumerate(best[1])))
    assert is_valid(M)
    return M


def brute_force_solve(
    vertex_sets: list[CandidateSet],
    edge_sets: list[CandidateSet],
    store: EmbeddingStore,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> StructureMatrix:
    """Exhaustive minimum-cost valid structure matrix."""
    return brute_force_tables(build_cost_tables(vertex_sets, edge_sets, store), max_search_space)
