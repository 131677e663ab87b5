"""
Candidate retrieval and disambiguation.

Candidates come from the lexicon, are filtered to the phrase's kind, then
rescored with connection density between the phrases' candidates in the
knowledge graph and pruned relative to the best score.
"""

from typing import NamedTuple

import structlog

from kgqc.exceptions import EmptyCandidateSetError
from kgqc.mapping.extractor import extract_phrases
from kgqc.mapping.lexicon import Lexicon, LexiconKind
from kgqc.models import Candidate, CandidateSet, ObjectKind, PhraseKind, PhraseMatch, ScoringWeights
from kgqc.storage.graph import KnowledgeGraph, ObjectRef

logger = structlog.get_logger()


class ConnectionFeatures(NamedTuple):
    connection_count: int
    hop_count: float
    others: int  # candidates in all other phrases


def _sort_key(c: Candidate) -> tuple[float, float, str]:
    return (-c.score, -c.base_similarity, c.label)


def retrieve_candidates(phrase: PhraseMatch, lexicon: Lexicon, kg: KnowledgeGraph) -> CandidateSet:
    """Lexicon candidates of ``phrase`` restricted to its kind, scored by base similarity."""
    entries = lexicon.lookup(phrase.text)
    if phrase.is_wh:
        allowed = {LexiconKind.WH}
    elif phrase.kind is PhraseKind.RELATION:
        allowed = {LexiconKind.EDGE}
    else:
        allowed = {LexiconKind.VERTEX}
    kind = ObjectKind.EDGE if phrase.kind is PhraseKind.RELATION else ObjectKind.VERTEX

    best: dict[str, Candidate] = {}
    for entry in entries:
        if entry.kind not in allowed or entry.label in best:
            continue
        known = kg.has_edge(entry.label) if kind is ObjectKind.EDGE else kg.has_vertex(entry.label)
        if not known:
            logger.warning("Lexicon label not in graph", phrase=phrase.text, label=entry.label)
            continue
        ident = kg.edge(entry.label) if kind is ObjectKind.EDGE else kg.vertex(entry.label)
        if phrase.is_wh and not kg.is_class(ident):
            logger.warning("Wh-word target is not a class", phrase=phrase.text, label=entry.label)
            continue
        best[entry.label] = Candidate(
            id=ident,
            kind=kind,
            label=entry.label,
            base_similarity=entry.base_similarity,
            score=entry.base_similarity,
        )

    if not best:
        raise EmptyCandidateSetError(f"no {kind.value} candidates for phrase '{phrase.text}'")
    return CandidateSet(phrase=phrase, candidates=sorted(best.values(), key=_sort_key))


def connection_features(
    all_sets: list[CandidateSet],
    kg: KnowledgeGraph,
    max_hops: int,
) -> list[list[ConnectionFeatures]]:
    """
    Per candidate: how many candidates of the other phrases lie within
    ``max_hops``, and their mean distance (``max_hops + 1`` when none do).
    """
    features: list[list[ConnectionFeatures]] = []
    for i, cset in enumerate(all_sets):
        others = [c for j, other in enumerate(all_sets) if j != i for c in other.candidates]
        row: list[ConnectionFeatures] = []
        for c in cset.candidates:
            ref = ObjectRef(c.kind, c.id)
            distances = [
                d for d in (
                    kg.hop_distance(ref, ObjectRef(o.kind, o.id), max_hops) for o in others
                )
                if d is not None
            ]
            hop = sum(distances) / len(distances) if distances else float(max_hops + 1)
            row.append(ConnectionFeatures(len(distances), hop, len(others)))
        features.append(row)
    return features


def prune(candidates: list[Candidate], t_s: float) -> list[Candidate]:
    """Drop candidates scoring below ``top / t_s``; the top candidate always stays."""
    if not candidates:
        return []
    ranked = sorted(candidates, key=_sort_key)
    threshold = ranked[0].score / t_s
    return [c for c in ranked if c.score >= threshold]


def disambiguate(
    all_sets: list[CandidateSet],
    features: list[list[ConnectionFeatures]],
    weights: ScoringWeights,
    t_s: float = 15.0,
) -> list[CandidateSet]:
    """Rescore every candidate linearly, normalise per phrase, sort and prune."""
    result: list[CandidateSet] = []
    for cset, row in zip(all_sets, features, strict=True):
        raw = []
        for c, f in zip(cset.candidates, row, strict=True):
            density = f.connection_count / f.others if f.others else 0.0
            raw.append(
                weights.sim * c.base_similarity
                + weights.conn * density
                + weights.hop / (1.0 + f.hop_count)
            )
        top = max(raw)
        scored = [
            c.model_copy(update={"score": (p / top) if top > 0 else 1.0})
            for c, p in zip(cset.candidates, raw, strict=True)
        ]
        kept = prune(scored, t_s)
        assert kept, "pruning removed the top candidate"
        for dropped in (c for c in scored if c not in kept):
            logger.debug(
                "Candidate pruned",
                phrase=cset.phrase.text,
                label=dropped.label,
                score=round(dropped.score, 4),
            )
        result.append(
            CandidateSet(phrase=cset.phrase, candidates=kept, pruned=len(kept) < len(scored))
        )
    return result


def map_question(
    nlq: str,
    lexicon: Lexicon,
    kg: KnowledgeGraph,
    weights: ScoringWeights | None = None,
    t_s: float = 15.0,
    max_hops: int = 4,
) -> list[CandidateSet]:
    """Extract phrases and return their disambiguated candidate sets in phrase order."""
    phrases = extract_phrases(nlq, lexicon)
    sets = [retrieve_candidates(p, lexicon, kg) for p in phrases]
    features = connection_features(sets, kg, max_hops)
    return disambiguate(sets, features, weights or ScoringWeights(), t_s)
