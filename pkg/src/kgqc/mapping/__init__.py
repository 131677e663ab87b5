"""Phrase mapping: lexicon lookup, phrase extraction, candidate disambiguation."""

from kgqc.mapping.candidates import (
    ConnectionFeatures,
    connection_features,
    disambiguate,
    map_question,
    prune,
    retrieve_candidates,
)
from kgqc.mapping.extractor import extract_phrases
from kgqc.mapping.lexicon import Lexicon, LexiconEntry, LexiconKind, load_lexicon, tokenize

__all__ = [
    "Lexicon",
    "LexiconEntry",
    "LexiconKind",
    "load_lexicon",
    "tokenize",
    "extract_phrases",
    "retrieve_candidates",
    "connection_features",
    "ConnectionFeatures",
    "disambiguate",
    "prune",
    "map_question",
]
