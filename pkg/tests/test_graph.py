"""
Tests for the knowledge graph store and the pattern matcher.
"""

import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from kgqc.exceptions import GraphLoadError, QueryParseError, UnknownObjectError
from kgqc.models import ContextMode, VertexKind
from kgqc.storage.graph import KnowledgeGraph, ObjectRef, Triple, load_kg, read_triples
from kgqc.storage.patterns import TriplePattern, Variable, match_pattern

FIXTURES = Path(__file__).parent / "fixtures"


def labelled(kg: KnowledgeGraph, glkg) -> dict[tuple[str, str, str], int]:
    return {
        (kg.vertex_label(g.head), kg.edge_label(g.edge), kg.vertex_label(g.tail)): g.support
        for g in glkg.triples
    }


# =============================================================================
# Loading and Classification
# =============================================================================

class TestLoading:
    """Tests for reading triple files."""

    def test_load_fixture(self):
        """The running-example graph has five triples."""
        kg = load_kg(FIXTURES / "movies.tsv")

        assert len(kg) == 5
        assert kg.num_edges == 3
        assert kg.has_vertex("Batman")
        assert kg.has_edge("director")

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        """Comment and blank lines are not triples."""
        path = tmp_path / "kg.tsv"
        path.write_text("# header\n\na\tr\tb\n")

        assert read_triples(path) == [("a", "r", "b")]

    def test_malformed_line_reports_line_number(self, tmp_path):
        """A line without three fields names its line."""
        path = tmp_path / "kg.tsv"
        path.write_text("a\tr\tb\nbroken\tline\n")

        with pytest.raises(GraphLoadError) as exc:
            read_triples(path)

        assert exc.value.line_number == 2
        assert "line 2" in str(exc.value)

    def test_empty_file_rejected(self, tmp_path):
        """A graph needs at least one triple."""
        path = tmp_path / "kg.tsv"
        path.write_text("# nothing here\n")

        with pytest.raises(GraphLoadError):
            load_kg(path)

    def test_missing_file(self, tmp_path):
        """An unreadable path is a load error."""
        with pytest.raises(GraphLoadError):
            read_triples(tmp_path / "absent.tsv")

    def test_duplicate_triples_collapse(self):
        """The store is a set of triples."""
        kg = KnowledgeGraph([("a", "r", "b"), ("a", "r", "b")])

        assert len(kg) == 1


class TestClassification:
    """Tests for entity/class deduction."""

    def setup_method(self):
        self.kg = load_kg(FIXTURES / "movies.tsv")

    def test_type_tail_is_class(self):
        """Tails of type triples are classes."""
        assert self.kg.kind(self.kg.vertex("Film")) is VertexKind.CLASS
        assert self.kg.kind(self.kg.vertex("Person")) is VertexKind.CLASS

    def test_typed_vertex_is_entity(self):
        """Heads of type triples are entities."""
        assert self.kg.kind(self.kg.vertex("Batman")) is VertexKind.ENTITY

    def test_universal_class_always_present(self):
        """The universal class exists even when no triple mentions it."""
        thing = self.kg.vertex("Thing")

        assert self.kg.is_class(thing)
        assert thing == self.kg.universal_class

    def test_classes_of_entity(self):
        """An entity's classes are its type tails."""
        batman = self.kg.vertex("Batman")

        assert self.kg.classes_of(batman) == frozenset({self.kg.vertex("Film")})

    def test_untyped_entity_belongs_to_universal_class(self):
        """Entities without a type triple fall back to Thing."""
        kg = KnowledgeGraph([("a", "r", "b")])

        assert kg.classes_of(kg.vertex("a")) == frozenset({kg.universal_class})
        assert kg.vertex("a") in kg.instances_of(kg.universal_class)

    def test_unknown_label(self):
        """Unknown labels raise UnknownObjectError."""
        with pytest.raises(UnknownObjectError):
            self.kg.vertex("Gotham")
        with pytest.raises(UnknownObjectError):
            self.kg.edge_label(99)


# =============================================================================
# Local and Generalized Local Graphs
# =============================================================================

class TestLocalGraphs:
    """Tests for local_kg and generalize."""

    def setup_method(self):
        self.kg = load_kg(FIXTURES / "movies.tsv")

    def ref(self, label: str) -> ObjectRef:
        if self.kg.has_vertex(label):
            return ObjectRef.vertex(self.kg.vertex(label))
        return ObjectRef.edge(self.kg.edge(label))

    def test_local_kg_excludes_type_triples(self):
        """Tim Burton's local graph is the single director triple."""
        local = self.kg.local_kg(self.ref("Tim_Burton"))
        batman, director, burton = (
            self.kg.vertex("Batman"), self.kg.edge("director"), self.kg.vertex("Tim_Burton")
        )

        assert local.triples == frozenset({Triple(batman, director, burton)})

    def test_local_kg_of_edge(self):
        """An edge's local graph holds the triples carrying it."""
        local = self.kg.local_kg(self.ref("starring"))

        assert len(local) == 1

    def test_isolated_vertex_has_empty_local_graph(self):
        """The universal class has no incident non-type triples."""
        assert len(self.kg.local_kg(self.ref("Thing"))) == 0
        assert not self.kg.generalize(self.ref("Thing"))

    def test_generalize_entity(self):
        """Neighbours are replaced by their classes."""
        glkg = self.kg.generalize(self.ref("Batman"))

        assert labelled(self.kg, glkg) == {
            ("Batman", "director", "Person"): 1,
            ("Batman", "starring", "Actor"): 1,
        }
        assert glkg.denominator == 2

    def test_generalize_tail_entity(self):
        """A tail entity keeps itself and generalizes the head."""
        glkg = self.kg.generalize(self.ref("Tim_Burton"))

        assert labelled(self.kg, glkg) == {("Film", "director", "Tim_Burton"): 1}

    def test_generalize_class_unions_instances(self):
        """A class replaces its instance by itself."""
        glkg = self.kg.generalize(self.ref("Film"))

        assert labelled(self.kg, glkg) == {
            ("Film", "director", "Person"): 1,
            ("Film", "starring", "Actor"): 1,
        }
        assert glkg.denominator == 2

    def test_generalize_edge_emits_three_forms(self):
        """Each raw triple yields class-class, entity-class and class-entity forms."""
        glkg = self.kg.generalize(self.ref("director"))

        assert labelled(self.kg, glkg) == {
            ("Film", "director", "Person"): 1,
            ("Batman", "director", "Person"): 1,
            ("Film", "director", "Tim_Burton"): 1,
        }

    def test_support_counts_aggregate(self):
        """Two triples to instances of one class give support 2."""
        kg = KnowledgeGraph([
            ("x", "likes", "y1"), ("x", "likes", "y2"),
            ("y1", "type", "C"), ("y2", "type", "C"),
        ])
        glkg = kg.generalize(ObjectRef.vertex(kg.vertex("x")))

        assert labelled(kg, glkg) == {("x", "likes", "C"): 2}
        assert glkg.denominator == 2

    def test_local_mode_keeps_raw_triples(self):
        """The local context mode does not generalize."""
        glkg = self.kg.generalize(self.ref("Batman"), ContextMode.LOCAL)

        assert labelled(self.kg, glkg) == {
            ("Batman", "director", "Tim_Burton"): 1,
            ("Batman", "starring", "Michael_Keaton"): 1,
        }
        assert glkg.mode is ContextMode.LOCAL

    def test_generalize_is_memoised(self):
        """Repeated calls return the same object."""
        first = self.kg.generalize(self.ref("Batman"))

        assert self.kg.generalize(self.ref("Batman")) is first

    def test_every_local_triple_contains_owner(self):
        """Vertex local graphs mention the vertex; edge local graphs carry the edge."""
        for v in range(self.kg.num_vertices):
            for t in self.kg.local_kg(ObjectRef.vertex(v)).triples:
                assert v in (t.head, t.tail)
        for e in range(self.kg.num_edges):
            for t in self.kg.local_kg(ObjectRef.edge(e)).triples:
                assert t.edge == e


# =============================================================================
# Hop Distance
# =============================================================================

class TestHopDistance:
    """Tests for subdivision-graph distances."""

    def setup_method(self):
        self.kg = load_kg(FIXTURES / "movies.tsv")
        self.v = lambda label: ObjectRef.vertex(self.kg.vertex(label))
        self.e = lambda label: ObjectRef.edge(self.kg.edge(label))

    def test_adjacent_vertices(self):
        """Vertices sharing a triple are two hops apart."""
        assert self.kg.hop_distance(self.v("Batman"), self.v("Tim_Burton"), 4) == 2

    def test_identity(self):
        """An object is at distance zero from itself."""
        assert self.kg.hop_distance(self.v("Batman"), self.v("Batman"), 1) == 0

    def test_cutoff(self):
        """Pairs beyond max_hops are unreachable."""
        assert self.kg.hop_distance(self.v("Film"), self.v("Actor"), 4) is None
        assert self.kg.hop_distance(self.v("Film"), self.v("Actor"), 6) == 6

    def test_edge_to_vertex(self):
        """An edge is one hop from the ends of its triples."""
        assert self.kg.hop_distance(self.e("director"), self.v("Tim_Burton"), 4) == 1

    def test_edge_to_edge(self):
        """Edges on triples sharing a vertex are two hops apart."""
        assert self.kg.hop_distance(self.e("director"), self.e("starring"), 4) == 2

    def test_symmetric(self):
        """Distances do not depend on direction."""
        a, b = self.v("Tim_Burton"), self.v("Michael_Keaton")

        assert self.kg.hop_distance(a, b, 4) == self.kg.hop_distance(b, a, 4) == 4

    def test_disconnected(self):
        """Separate components are unreachable."""
        kg = KnowledgeGraph([("a", "r", "b"), ("c", "r", "d")])

        assert kg.hop_distance(ObjectRef.vertex(kg.vertex("a")), ObjectRef.vertex(kg.vertex("d")), 3) is None

    def test_invalid_max_hops(self):
        """max_hops must be positive."""
        with pytest.raises(ValueError):
            self.kg.hop_distance(self.v("Batman"), self.v("Film"), 0)

    def test_triangle_inequality_between_vertices(self):
        """On random graphs vertex distances satisfy d(a, c) <= d(a, b) + d(b, c)."""
        rng = np.random.default_rng(3)

        for _ in range(50):
            labels = [f"v{i}" for i in range(8)]
            triples = [
                (labels[rng.integers(8)], f"r{rng.integers(3)}", labels[rng.integers(8)])
                for _ in range(int(rng.integers(4, 12)))
            ]
            kg = KnowledgeGraph(triples)
            refs = [ObjectRef.vertex(v) for v in range(kg.num_vertices)]
            cutoff = 4 * kg.num_vertices

            def d(a, b):
                found = kg.hop_distance(a, b, cutoff)
                return math.inf if found is None else found

            for a, b, c in itertools.product(refs, repeat=3):
                assert d(a, c) <= d(a, b) + d(b, c)

    def test_edge_in_the_middle_is_not_a_shortcut(self):
        """
        An edge is as close as its nearest triple, so two vertices each one hop
        from the same edge can still be four hops apart.
        """
        kg = KnowledgeGraph([("v0", "a", "x"), ("x", "b", "v1"), ("y", "a", "v1")])
        v0, v1 = ObjectRef.vertex(kg.vertex("v0")), ObjectRef.vertex(kg.vertex("v1"))
        a = ObjectRef.edge(kg.edge("a"))

        assert kg.hop_distance(v0, a, 4) == 1
        assert kg.hop_distance(a, v1, 4) == 1
        assert kg.hop_distance(v0, v1, 4) == 4


# =============================================================================
# Pattern Matching
# =============================================================================

class TestMatchPattern:
    """Tests for basic graph pattern matching."""

    def setup_method(self):
        self.kg = load_kg(FIXTURES / "movies.tsv")
        self.film, self.actor = Variable("film"), Variable("actor")

    def test_single_pattern(self):
        """A starring pattern binds Batman and Michael Keaton."""
        result = match_pattern(
            self.kg, [TriplePattern(self.film, self.kg.edge("starring"), self.actor)]
        )

        assert result == [{self.film: self.kg.vertex("Batman"), self.actor: self.kg.vertex("Michael_Keaton")}]

    def test_join(self):
        """Shared variables join patterns."""
        patterns = [
            TriplePattern(self.film, self.kg.edge("director"), self.kg.vertex("Tim_Burton")),
            TriplePattern(self.film, self.kg.edge("starring"), self.actor),
            TriplePattern(self.actor, self.kg.edge("type"), self.kg.vertex("Actor")),
        ]

        result = match_pattern(self.kg, patterns)

        assert [b[self.actor] for b in result] == [self.kg.vertex("Michael_Keaton")]

    def test_ground_pattern(self):
        """A pattern without variables that holds gives one empty binding."""
        pattern = TriplePattern(
            self.kg.vertex("Batman"), self.kg.edge("type"), self.kg.vertex("Film")
        )

        assert match_pattern(self.kg, [pattern]) == [{}]

    def test_unsatisfiable(self):
        """No triple matches, no bindings."""
        pattern = TriplePattern(self.film, self.kg.edge("director"), self.kg.vertex("Michael_Keaton"))

        assert match_pattern(self.kg, [pattern]) == []

    def test_empty_pattern_set(self):
        """The empty conjunction holds once."""
        assert match_pattern(self.kg, []) == [{}]

    def test_edge_variable(self):
        """Variables may stand in edge position."""
        rel = Variable("rel")
        pattern = TriplePattern(self.kg.vertex("Batman"), rel, self.kg.vertex("Tim_Burton"))

        assert match_pattern(self.kg, [pattern]) == [{rel: self.kg.edge("director")}]

    def test_variable_in_vertex_and_edge_position(self):
        """A variable cannot bind both a vertex and an edge."""
        x = Variable("x")

        with pytest.raises(QueryParseError):
            match_pattern(self.kg, [TriplePattern(x, x, self.actor)])

    def test_unknown_id(self):
        """Constants must be known ids."""
        with pytest.raises(UnknownObjectError):
            match_pattern(self.kg, [TriplePattern(self.film, 99, self.actor)])

    def test_results_deterministic(self):
        """Bindings are unique and ordered."""
        result = match_pattern(
            self.kg, [TriplePattern(self.film, self.kg.edge("type"), self.actor)]
        )

        assert len(result) == 3
        assert result == match_pattern(
            self.kg, [TriplePattern(self.film, self.kg.edge("type"), self.actor)]
        )

    def test_agrees_with_exhaustive_assignment(self):
        """
        On random graphs the matcher returns exactly the assignments, out of
        every combination of values for the variables, under which all
        patterns are stored triples.
        """
        rng = np.random.default_rng(17)
        vertex_vars = [Variable("x"), Variable("y"), Variable("z")]
        edge_var = Variable("r")

        for _ in range(200):
            labels = [f"v{i}" for i in range(6)]
            raw = [
                (labels[rng.integers(6)], f"e{rng.integers(3)}", labels[rng.integers(6)])
                for _ in range(int(rng.integers(1, 51)))
            ]
            kg = KnowledgeGraph(raw)
            stored = set(kg.triples)

            def vertex_term():
                if rng.random() < 0.7:
                    return vertex_vars[rng.integers(3)]
                return int(rng.integers(kg.num_vertices))

            def edge_term():
                return edge_var if rng.random() < 0.4 else int(rng.integers(kg.num_edges))

            patterns = [
                TriplePattern(vertex_term(), edge_term(), vertex_term())
                for _ in range(int(rng.integers(1, 4)))
            ]
            used = sorted({t for p in patterns for t in p if isinstance(t, Variable)}, key=lambda v: v.name)
            domains = [range(kg.num_edges) if v == edge_var else range(kg.num_vertices) for v in used]

            expected = []
            for values in itertools.product(*domains):
                binding = dict(zip(used, values, strict=True))
                ground = [
                    Triple(*(binding.get(t, t) if isinstance(t, Variable) else t for t in p))
                    for p in patterns
                ]
                if all(t in stored for t in ground):
                    expected.append(tuple(sorted((v.name, x) for v, x in binding.items())))

            result = match_pattern(kg, patterns)

            assert [tuple(sorted((v.name, x) for v, x in b.items())) for b in result] == sorted(expected)
