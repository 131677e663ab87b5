"""
Query representations and graph-structured queries.

A representation picks one candidate per phrase and lays the picks out as
the structure matrix dictates. The cheapest representation becomes a
GraphQuery: class vertices chosen for entity phrases turn into variables
constrained by their class.
"""

import heapq
import itertools
import math
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import NamedTuple

from kgqc.exceptions import (
    FullyGroundedQueryError,
    QueryParseError,
    RepresentationLimitError,
)
from kgqc.models import CandidateSet
from kgqc.storage.embeddings import EmbeddingStore, translate_score
from kgqc.storage.graph import KnowledgeGraph, Triple
from kgqc.storage.patterns import TriplePattern, Variable
from kgqc.structure.matrix import StructureMatrix, is_valid

DEFAULT_MAX_REPRESENTATIONS = 1_000_000


# =============================================================================
# Representations
# =============================================================================

@dataclass(frozen=True)
class QueryRepresentation:
    """
    Concrete triples for one choice of candidate per phrase.

    ``positions[k]`` holds the vertex-set indexes ``(i, j)`` that triple ``k``
    connects.
    """
    vertex_choices: tuple[int, ...]
    edge_choices: tuple[int, ...]
    triples: tuple[Triple, ...]
    positions: tuple[tuple[int, int], ...]


def count_representations(vertex_sets: list[CandidateSet], edge_sets: list[CandidateSet]) -> int:
    return math.prod(len(s) for s in vertex_sets) * math.prod(len(s) for s in edge_sets)


def enumerate_representations(
    vertex_sets: list[CandidateSet],
    edge_sets: list[CandidateSet],
    M: StructureMatrix,
    max_representations: int = DEFAULT_MAX_REPRESENTATIONS,
) -> Iterator[QueryRepresentation]:
    """Lazily stream the cartesian product of per-set choices laid out by ``M``."""
    if M.n != len(vertex_sets) or M.m != len(edge_sets):
        raise ValueError("structure matrix does not match the candidate sets")
    if not is_valid(M):
        raise ValueError(f"invalid structure matrix {M.tolist()}")
    total = count_representations(vertex_sets, edge_sets)
    if total > max_representations:
        raise RepresentationLimitError(
            f"{total} candidate representations exceed the cap of {max_representations}; "
            "prune harder (lower t_s) or raise the cap"
        )

    placements = [(i, j) for _k, i, j in M.nonzero()]
    n = len(vertex_sets)
    for choice in itertools.product(*(s.ids for s in vertex_sets), *(s.ids for s in edge_sets)):
        vertices = tuple(choice[:n])
        edges = tuple(choice[n:])
        yield QueryRepresentation(
            vertex_choices=vertices,
            edge_choices=edges,
            triples=tuple(
                Triple(vertices[i], edges[k], vertices[j]) for k, (i, j) in enumerate(placements)
            ),
            positions=tuple(placements),
        )


def score_representation(q: QueryRepresentation, store: EmbeddingStore) -> float:
    """Sum of translation residuals over the representation's triples."""
    return sum(
        translate_score(store.vertex(t.head), store.edge(t.edge), store.vertex(t.tail))
        for t in q.triples
    )


def _rank_key(item: tuple[float, QueryRepresentation]) -> tuple[float, tuple[int, ...]]:
    score, q = item
    return score, q.vertex_choices + q.edge_choices


def rank_representations(
    representations: Iterator[QueryRepresentation],
    store: EmbeddingStore,
    limit: int,
) -> list[tuple[float, QueryRepresentation]]:
    """The ``limit`` cheapest representations; ties go to the lexicographically lower choices."""
    scored = ((score_representation(q, store), q) for q in representations)
    return heapq.nsmallest(limit, scored, key=_rank_key)


# =============================================================================
# Graph Queries
# =============================================================================

Term = str | Variable


class QueryPattern(NamedTuple):
    head: Term
    edge: Term
    tail: Term

    def render(self) -> str:
        return " ".join(str(x) for x in self)


@dataclass(frozen=True)
class GraphQuery:
    """
    Label-level triple patterns plus ``(variable, class)`` type constraints.

    Patterns and constraints are kept sorted so equal queries compare equal.
    """
    patterns: tuple[QueryPattern, ...]
    type_constraints: tuple[tuple[Variable, str], ...] = ()
    answer_variable: Variable | None = None
    type_edge: str = "type"
    _variables: frozenset[Variable] = field(default=frozenset(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        patterns = tuple(sorted(set(self.patterns), key=QueryPattern.render))
        constraints = tuple(sorted(set(self.type_constraints), key=lambda c: (c[0].name, c[1])))
        variables = frozenset(x for p in patterns for x in p if isinstance(x, Variable))
        for var, _cls in constraints:
            if var not in variables:
                raise QueryParseError(f"{var} appears only in type constraints")
        if self.answer_variable is not None and self.answer_variable not in variables:
            raise QueryParseError(f"answer variable {self.answer_variable} is not used")
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "type_constraints", constraints)
        object.__setattr__(self, "_variables", variables)

    @property
    def variables(self) -> frozenset[Variable]:
        return self._variables

    def type_patterns(self) -> list[QueryPattern]:
        return [QueryPattern(v, self.type_edge, c) for v, c in self.type_constraints]

    def relaxed(self) -> "GraphQuery":
        """The same query with every type constraint removed."""
        return GraphQuery(self.patterns, (), self.answer_variable, self.type_edge)

    def compile(self, kg: KnowledgeGraph) -> list[TriplePattern]:
        """Resolve labels to ids; unknown labels raise UnknownObjectError."""
        compiled = []
        for p in (*self.patterns, *self.type_patterns()):
            head = p.head if isinstance(p.head, Variable) else kg.vertex(p.head)
            edge = p.edge if isinstance(p.edge, Variable) else kg.edge(p.edge)
            tail = p.tail if isinstance(p.tail, Variable) else kg.vertex(p.tail)
            compiled.append(TriplePattern(head, edge, tail))
        return compiled


def serialize_query(gq: GraphQuery) -> str:
    """One ``head edge tail`` line per pattern; type constraints last."""
    lines = [p.render() for p in gq.patterns]
    lines += [p.render() for p in gq.type_patterns()]
    return "".join(line + "\n" for line in lines)


def _parse_term(token: str) -> Term:
    if token.startswith("?"):
        if len(token) == 1:
            raise QueryParseError("empty variable name")
        return Variable(token[1:])
    return token


def parse_query(
    text: str,
    answer_variable: Variable | None = None,
    type_edge: str = "type",
) -> GraphQuery:
    """Inverse of ``serialize_query``; ``?v type C`` lines become type constraints."""
    patterns: list[QueryPattern] = []
    constraints: list[tuple[Variable, str]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise QueryParseError(f"line {number}: expected 'head edge tail', got {line!r}")
        head, edge, tail = (_parse_term(t) for t in tokens)
        if edge == type_edge and isinstance(head, Variable) and isinstance(tail, str):
            constraints.append((head, tail))
        else:
            patterns.append(QueryPattern(head, edge, tail))
    return GraphQuery(tuple(patterns), tuple(constraints), answer_variable, type_edge)


# =============================================================================
# Variable Substitution
# =============================================================================

def _variable_name(text: str, taken: set[str]) -> str:
    base = re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_") or "x"
    name, suffix = base, 2
    while name in taken:
        name, suffix = f"{base}_{suffix}", suffix + 1
    taken.add(name)
    return name


def to_graph_query(
    q_opt: QueryRepresentation,
    vertex_sets: list[CandidateSet],
    kg: KnowledgeGraph,
) -> GraphQuery:
    """
    Replace class vertices chosen for entity phrases by type-constrained
    variables; entity picks stay constants.

    The answer variable is the wh-phrase's variable, otherwise the variable
    of the first phrase that produced one. The universal class adds no
    type constraint.
    """
    taken: set[str] = set()
    terms: list[Term] = []
    constraints: list[tuple[Variable, str]] = []
    wh_variable: Variable | None = None
    first_variable: Variable | None = None

    for cset, vid in zip(vertex_sets, q_opt.vertex_choices, strict=True):
        if not kg.is_class(vid):
            terms.append(kg.vertex_label(vid))
            continue
        var = Variable(_variable_name(cset.phrase.text, taken))
        terms.append(var)
        if vid != kg.universal_class:
            constraints.append((var, kg.vertex_label(vid)))
        if first_variable is None:
            first_variable = var
        if cset.phrase.is_wh and wh_variable is None:
            wh_variable = var

    if first_variable is None:
        raise FullyGroundedQueryError(
            "every phrase maps to an entity; the query has no variable to answer"
        )

    patterns = tuple(
        QueryPattern(terms[i], kg.edge_label(t.edge), terms[j])
        for t, (i, j) in zip(q_opt.triples, q_opt.positions, strict=True)
    )
    return GraphQuery(
        patterns=patterns,
        type_constraints=tuple(constraints),
        answer_variable=wh_variable or first_variable,
        type_edge=kg.edge_label(kg.type_edge),
    )
