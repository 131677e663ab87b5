"""
Basic graph pattern matching over a KnowledgeGraph.

Conjunctive semantics: a binding is returned when every pattern,
instantiated with it, is a triple of the graph.
"""

from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

from kgqc.exceptions import QueryParseError, UnknownObjectError
from kgqc.storage.graph import KnowledgeGraph, Triple


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = int | Variable
Binding = dict[Variable, int]


class TriplePattern(NamedTuple):
    head: Term
    edge: Term
    tail: Term

    def variables(self) -> set[Variable]:
        return {x for x in self if isinstance(x, Variable)}


def _check_patterns(kg: KnowledgeGraph, patterns: list[TriplePattern]) -> None:
    vertex_vars: set[Variable] = set()
    edge_vars: set[Variable] = set()
    for p in patterns:
        for term in (p.head, p.tail):
            if isinstance(term, Variable):
                vertex_vars.add(term)
            elif not 0 <= term < kg.num_vertices:
                raise UnknownObjectError(f"pattern references unknown vertex id {term}")
        if isinstance(p.edge, Variable):
            edge_vars.add(p.edge)
        elif not 0 <= p.edge < kg.num_edges:
            raise UnknownObjectError(f"pattern references unknown edge id {p.edge}")
    both = vertex_vars & edge_vars
    if both:
        names = ", ".join(sorted(str(v) for v in both))
        raise QueryParseError(f"variables used in both vertex and edge positions: {names}")


def _resolve(term: Term, binding: Binding) -> int | None:
    if isinstance(term, Variable):
        return binding.get(term)
    return term


def _candidates(kg: KnowledgeGraph, pattern: TriplePattern, binding: Binding) -> list[Triple]:
    head = _resolve(pattern.head, binding)
    edge = _resolve(pattern.edge, binding)
    tail = _resolve(pattern.tail, binding)
    if head is not None and edge is not None and tail is not None:
        triple = Triple(head, edge, tail)
        return [triple] if kg.contains(triple) else []
    if head is not None:
        pool = kg.triples_with_head(head)
    elif tail is not None:
        pool = kg.triples_with_tail(tail)
    elif edge is not None:
        pool = kg.triples_with_edge(edge)
    else:
        pool = list(kg.triples)
    return [
        t for t in pool
        if (head is None or t.head == head)
        and (edge is None or t.edge == edge)
        and (tail is None or t.tail == tail)
    ]


def _extend(pattern: TriplePattern, triple: Triple, binding: Binding) -> Binding | None:
    extended = dict(binding)
    for term, value in zip(pattern, triple, strict=True):
        if isinstance(term, Variable):
            bound = extended.get(term)
            if bound is None:
                extended[term] = value
            elif bound != value:
                return None
    return extended


def match_pattern(kg: KnowledgeGraph, patterns: Iterable[TriplePattern]) -> list[Binding]:
    """
    Return every binding under which all patterns hold in ``kg``.

    Bindings are unique and sorted by (variable name, value) pairs. An empty
    pattern set yields a single empty binding.
    """
    remaining = list(dict.fromkeys(patterns))
    _check_patterns(kg, remaining)

    results: dict[tuple[tuple[str, int], ...], Binding] = {}

    def search(binding: Binding, todo: list[TriplePattern]) -> None:
        if not todo:
            key = tuple(sorted((v.name, x) for v, x in binding.items()))
            results.setdefault(key, binding)
            return
        # Most selective pattern next
        options = [(_candidates(kg, p, binding), i) for i, p in enumerate(todo)]
        matches, index = min(options, key=lambda o: (len(o[0]), o[1]))
        pattern = todo[index]
        rest = todo[:index] + todo[index + 1:]
        for triple in matches:
            extended = _extend(pattern, triple, binding)
            if extended is not None:
                search(extended, rest)

    search({}, remaining)
    return [results[k] for k in sorted(results)]
