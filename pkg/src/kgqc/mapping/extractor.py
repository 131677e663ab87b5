"""Greedy longest-match phrase extraction."""

import structlog

from kgqc.exceptions import UnmappableQuestionError
from kgqc.mapping.lexicon import Lexicon, LexiconKind, tokenize
from kgqc.models import PhraseKind, PhraseMatch

logger = structlog.get_logger()


def extract_phrases(nlq: str, lexicon: Lexicon) -> list[PhraseMatch]:
    """
    Scan the question left to right, taking the longest lexicon surface at
    each position.

    Wh-words become entity phrases. A relation surface with an ``implied``
    rule is preceded by a zero-width wh phrase.
    """
    tokens = tokenize(nlq)
    lowered = [t.lower() for t in tokens]
    phrases: list[PhraseMatch] = []

    i = 0
    while i < len(tokens):
        for length in range(min(lexicon.max_tokens, len(tokens) - i), 0, -1):
            surface = " ".join(lowered[i:i + length])
            if surface not in lexicon:
                continue
            best = lexicon.lookup(surface)[0]
            kind = PhraseKind.RELATION if best.kind is LexiconKind.EDGE else PhraseKind.ENTITY
            if kind is PhraseKind.RELATION:
                implied = lexicon.implied_by(surface)
                if implied is not None:
                    phrases.append(
                        PhraseMatch(
                            text=implied, kind=PhraseKind.ENTITY, start=i, end=i,
                            is_wh=True, implied=True,
                        )
                    )
            phrases.append(
                PhraseMatch(
                    text=" ".join(tokens[i:i + length]),
                    kind=kind,
                    start=i,
                    end=i + length,
                    is_wh=best.kind is LexiconKind.WH,
                )
            )
            i += length
            break
        else:
            i += 1

    if not phrases:
        raise UnmappableQuestionError(f"no lexicon phrase found in question: {nlq!r}")

    logger.debug(
        "Phrases extracted",
        entities=[p.text for p in phrases if p.kind is PhraseKind.ENTITY],
        relations=[p.text for p in phrases if p.kind is PhraseKind.RELATION],
    )
    return phrases
