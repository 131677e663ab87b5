"""
Tests for structure matrices, cost tables and the structure solver.
"""

import itertools
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from kgqc.exceptions import NoValidStructureError, SearchSpaceTooLargeError
from kgqc.mapping import load_lexicon, map_question
from kgqc.models import ObjectKind
from kgqc.storage.embeddings import EmbeddingStore
from kgqc.storage.graph import load_kg
from kgqc.structure import (
    CostTables,
    StructureMatrix,
    brute_force_tables,
    build_cost_tables,
    cost_score,
    dump_structure,
    ideal_matrix,
    is_valid,
    solve,
    solve_tables,
)
from kgqc.structure.matrix import placements_valid
from kgqc.structure.solver import ideal_placements

FIXTURES = Path(__file__).parent / "fixtures"

# (n, m) pairs for which a valid structure exists
SHAPES = [(2, 1), (3, 2), (3, 3), (4, 3)]


def reference_valid(cells: np.ndarray, m: int) -> bool:
    """Independent check of the five structure constraints."""
    n = cells.shape[0]
    if any(cells[i, i] for i in range(n)):
        return False
    occupied = [(i, j) for i in range(n) for j in range(n) if cells[i, j]]
    if any(cells[j, i] for i, j in occupied):
        return False
    if len(occupied) != m:
        return False
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(occupied)
    if not nx.is_connected(graph):
        return False
    return sorted(int(cells[i, j]) for i, j in occupied) == list(range(1, m + 1))


def placements_of(M: StructureMatrix) -> list[tuple[int, int]]:
    return [(i, j) for _, i, j in M.nonzero()]


def subset_search(tables: CostTables) -> StructureMatrix:
    """Re-place growing subsets of edge sets over every cell; first strict minimum wins."""
    n, m = tables.n, tables.m
    cells = [(i, j) for i in range(n) for j in range(n) if i != j]
    ideal = ideal_placements(tables)

    def valid(layout):
        if len(set(layout)) != m or any((j, i) in layout for i, j in layout):
            return False
        return nx.is_connected(nx.Graph(layout)) and len(set(itertools.chain(*layout))) == n

    if valid(ideal):
        return StructureMatrix.from_placements(n, dict(enumerate(ideal)))
    for num in range(1, m + 1):
        best = None
        for subset in itertools.combinations(range(m), num):
            for choice in itertools.product(cells, repeat=num):
                layout = list(ideal)
                for k, cell in zip(subset, choice, strict=True):
                    layout[k] = cell
                if not valid(layout):
                    continue
                cost = sum(tables.cost(k, i, j) for k, (i, j) in enumerate(layout))
                if best is None or cost < best[0]:
                    best = (cost, layout)
        if best is not None:
            return StructureMatrix.from_placements(n, dict(enumerate(best[1])))
    raise NoValidStructureError("none")


def random_tables(rng: np.random.Generator, n: int, m: int, dim: int = 4) -> CostTables:
    return CostTables.from_means(rng.normal(size=(n, dim)), rng.normal(size=(m, dim)))


# =============================================================================
# Validity
# =============================================================================

class TestIsValid:
    """Tests for structure matrix validity."""

    def test_chain(self):
        """A directed chain over three vertex sets is valid."""
        M = StructureMatrix.from_rows([[0, 1, 0], [0, 0, 2], [0, 0, 0]], m=2)

        assert is_valid(M) == (True, ())

    def test_each_violation(self):
        """Each broken constraint is reported by number."""
        cases = {
            1: StructureMatrix.from_rows([[1, 0], [2, 0]], m=2),
            2: StructureMatrix.from_rows([[0, 1, 0], [2, 0, 0], [0, 0, 0]], m=2),
            4: StructureMatrix.from_rows([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 2], [0, 0, 0, 0]], m=2),
            5: StructureMatrix.from_rows([[0, 1, 1], [0, 0, 0], [0, 0, 0]], m=2),
        }

        for constraint, M in cases.items():
            report = is_valid(M)
            assert not report
            assert constraint in report.violations

    def test_wrong_cell_count(self):
        """Fewer occupied cells than edge sets break constraint 3."""
        report = is_valid(StructureMatrix.from_rows([[0, 2], [0, 0]], m=2))

        assert 3 in report.violations

    def test_isolated_vertex_set(self):
        """A vertex set with no link breaks only the connectivity constraint."""
        report = is_valid(StructureMatrix.from_rows([[0, 1, 0], [0, 0, 0], [0, 0, 0]], m=1))

        assert report.violations == (4,)

    def test_placements_agree_with_matrix_check(self):
        """The layout check used by the solver agrees with ``is_valid``."""
        rng = np.random.default_rng(9)

        for _ in range(300):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, 6))
            layout = [tuple(int(x) for x in rng.integers(0, n, size=2)) for _ in range(m)]
            M = StructureMatrix.from_placements(n, dict(enumerate(layout)))

            expected = len(set(layout)) == m and bool(is_valid(M))
            assert placements_valid(n, layout) == expected

    def test_cell_out_of_range(self):
        """Cells name edge sets 1..m only."""
        with pytest.raises(ValueError):
            is_valid(StructureMatrix.from_rows([[0, 3], [0, 0]], m=2))

    def test_agrees_with_reference(self):
        """is_valid matches an independent checker on random matrices."""
        rng = np.random.default_rng(5)
        agreed_valid = 0

        for _ in range(10_000):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 4))
            cells = np.where(rng.random((n, n)) < 0.35, rng.integers(1, m + 1, size=(n, n)), 0)
            M = StructureMatrix(cells, m)

            assert bool(is_valid(M)) == reference_valid(cells, m)
            agreed_valid += bool(is_valid(M))

        assert agreed_valid > 0


# =============================================================================
# Cost Tables
# =============================================================================

class TestCostTables:
    """Tests for cost tables and the structure dump."""

    def test_diagonal_is_infinite(self):
        tables = random_tables(np.random.default_rng(0), 3, 2)

        for k in range(2):
            assert np.all(np.isinf(np.diag(tables.tables[k])))

    def test_translation_cost(self):
        """Cost is ||V_i + E_k - V_j||^2."""
        tables = CostTables.from_means(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 0.0]]))

        assert tables.cost(0, 0, 1) == 0.0
        assert tables.cost(0, 1, 0) == 4.0

    def test_dump_structure(self):
        """Off-diagonal costs are listed 1-based, then the matrix."""
        tables = CostTables.from_means(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 0.0]]))

        text = dump_structure(tables, solve_tables(tables))

        assert text == (
            "k\ti\tj\tcost\n"
            "1\t1\t2\t0.000000\n"
            "1\t2\t1\t4.000000\n"
            "matrix\n"
            "0\t1\n"
            "0\t0\n"
        )


# =============================================================================
# Solver
# =============================================================================

class TestSolver:
    """Tests for the structure solver."""

    def test_movie_question(self):
        """Film starring Actor and Film director Tim_Burton."""
        kg = load_kg(FIXTURES / "movies_extended.tsv")
        store = EmbeddingStore.load(FIXTURES / "embeddings.txt").aligned_to(kg)
        sets = map_question(
            "which actor starred in the movies directed by Tim Burton",
            load_lexicon(FIXTURES / "lexicon.tsv"),
            kg,
        )
        vertex_sets = [s for s in sets if s.kind is ObjectKind.VERTEX]
        edge_sets = [s for s in sets if s.kind is ObjectKind.EDGE]

        M = solve(vertex_sets, edge_sets, store)

        assert M.tolist() == [[0, 0, 0], [1, 0, 2], [0, 0, 0]]
        assert cost_score(M, build_cost_tables(vertex_sets, edge_sets, store)) == pytest.approx(0.01)

    def test_valid_ideal_is_returned(self):
        """When the per-edge minima form a valid graph, they are the answer."""
        tables = CostTables.from_means(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 0.0]]))

        assert solve_tables(tables) == ideal_matrix(tables)

    def test_collision_is_modified(self):
        """Two edge sets preferring the same cell are split."""
        V = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        E = np.array([[1.0, 0.0], [1.0, 0.05]])
        tables = CostTables.from_means(V, E)

        M = solve_tables(tables)

        assert not is_valid(ideal_matrix(tables))
        assert is_valid(M)

    def test_exact_translation_costs_zero(self):
        """Edge means equal to vertex differences give a zero-cost chain."""
        V = np.random.default_rng(1).normal(size=(4, 5))
        E = np.array([V[1] - V[0], V[2] - V[1], V[3] - V[2]])
        tables = CostTables.from_means(V, E)

        for M in (solve_tables(tables), brute_force_tables(tables)):
            assert M.tolist() == [[0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3], [0, 0, 0, 0]]
            assert cost_score(M, tables) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n, m", [(1, 1), (2, 0), (2, 2), (4, 1)])
    def test_no_valid_structure(self, n, m):
        """Too few phrases, or edge sets that cannot form a connected graph."""
        tables = random_tables(np.random.default_rng(2), n, m)

        with pytest.raises(NoValidStructureError):
            solve_tables(tables)
        with pytest.raises(NoValidStructureError):
            brute_force_tables(tables)

    def test_search_space_guard(self):
        """The exhaustive search refuses oversized instances."""
        tables = random_tables(np.random.default_rng(3), 4, 3)

        with pytest.raises(SearchSpaceTooLargeError):
            brute_force_tables(tables, max_search_space=100)

    def test_against_brute_force(self):
        """
        Over 500 random instances the solver is valid, never cheaper than the
        exhaustive optimum, and matches it when the optimum is at most one
        re-placement away from the per-edge minima.
        """
        rng = np.random.default_rng(42)
        ideal_valid = 0

        for trial in range(500):
            n, m = SHAPES[trial % len(SHAPES)]
            tables = random_tables(rng, n, m)

            found = solve_tables(tables)
            best = brute_force_tables(tables)

            assert is_valid(found)
            assert cost_score(found, tables) >= cost_score(best, tables) - 1e-9
            if is_valid(ideal_matrix(tables)):
                ideal_valid += 1
                assert found == best
            moved = sum(
                a != b for a, b in zip(ideal_placements(tables), placements_of(best), strict=True)
            )
            if moved <= 1:
                assert cost_score(found, tables) == pytest.approx(cost_score(best, tables))

        assert ideal_valid >= 100

    def test_matches_exhaustive_subset_search(self):
        """
        Branch-and-bound returns exactly the layout of the plain subset search,
        including which of several equal-cost layouts is picked.
        """
        rng = np.random.default_rng(7)

        for trial in range(200):
            n, m = [(3, 2), (3, 3), (4, 3), (4, 4)][trial % 4]
            if (trial // 4) % 2:
                # small integer costs force ties
                raw = rng.integers(0, 4, size=(m, n, n)).astype(np.float64)
                idx = np.arange(n)
                raw[:, idx, idx] = np.inf
                tables = CostTables(raw)
            else:
                tables = random_tables(rng, n, m)

            assert solve_tables(tables).tolist() == subset_search(tables).tolist()

    def test_all_edge_sets_collide_is_fast(self):
        """Five edge sets all cheapest on one cell of five vertex sets."""
        rng = np.random.default_rng(5)
        V = rng.normal(size=(5, 8))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        E = (V[1] - V[0]) + rng.normal(scale=0.01, size=(5, 8))
        tables = CostTables.from_means(V, E)
        assert ideal_placements(tables) == [(0, 1)] * 5

        start = time.perf_counter()
        M = solve_tables(tables)
        elapsed = time.perf_counter() - start

        assert is_valid(M)
        assert elapsed < 0.1

    def test_random_five_by_five_is_fast(self):
        """Each of 100 random 5x5 instances solves in under 100 ms."""
        rng = np.random.default_rng(6)

        for _ in range(100):
            V = rng.normal(size=(5, 8))
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            tables = CostTables.from_means(V, rng.normal(scale=0.1, size=(5, 8)))

            start = time.perf_counter()
            M = solve_tables(tables)
            elapsed = time.perf_counter() - start

            assert is_valid(M)
            assert elapsed < 0.1
