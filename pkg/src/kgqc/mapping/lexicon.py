"""
Surface-form lexicon.

TSV lines ``surface<TAB>kind<TAB>label<TAB>base_similarity`` where kind is
``vertex``, ``edge``, ``wh`` (wh-word to class) or ``implied`` (relation
surface that implies a hidden wh phrase; label is the wh-word to insert).
"""

import re
from collections import defaultdict
from enum import Enum
from pathlib import Path

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from kgqc.exceptions import LexiconError

logger = structlog.get_logger()

TOKEN_RE = re.compile(r"[A-Za-z0-9_']+")


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text)


def normalize_surface(text: str) -> str:
    return " ".join(t.lower() for t in tokenize(text))


class LexiconKind(str, Enum):
    VERTEX = "vertex"
    EDGE = "edge"
    WH = "wh"
    IMPLIED = "implied"


class LexiconEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    surface: str
    kind: LexiconKind
    label: str
    base_similarity: float = Field(gt=0.0, le=1.0)


def _rank(entries: list[LexiconEntry]) -> list[LexiconEntry]:
    return sorted(entries, key=lambda e: (-e.base_similarity, e.label))


class Lexicon:
    """Lookup from normalised surface forms to ranked entries."""

    def __init__(self, entries: list[LexiconEntry]):
        grouped: dict[str, list[LexiconEntry]] = defaultdict(list)
        implied: dict[str, list[LexiconEntry]] = defaultdict(list)
        for entry in entries:
            if entry.kind is LexiconKind.IMPLIED:
                implied[entry.surface].append(entry)
            else:
                grouped[entry.surface].append(entry)
        self._entries = {s: _rank(es) for s, es in grouped.items()}
        self._implied = {s: _rank(es) for s, es in implied.items()}
        self.max_tokens = max((len(s.split()) for s in self._entries), default=0)

    def __contains__(self, surface: str) -> bool:
        return surface in self._entries

    def __len__(self) -> int:
        return sum(len(es) for es in self._entries.values())

    def lookup(self, surface: str) -> list[LexiconEntry]:
        return list(self._entries.get(normalize_surface(surface), []))

    def is_wh(self, surface: str) -> bool:
        entries = self._entries.get(normalize_surface(surface), [])
        return bool(entries) and entries[0].kind is LexiconKind.WH

    def implied_by(self, surface: str) -> str | None:
        """The wh-word a relation surface implies, if any."""
        rules = self._implied.get(normalize_surface(surface))
        return rules[0].label if rules else None


def load_lexicon(path: Path) -> Lexicon:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise LexiconError(f"cannot read lexicon {path}: {e}") from e

    entries: list[LexiconEntry] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 4:
            raise LexiconError(f"line {number}: expected 4 tab-separated fields, got {len(fields)}")
        surface, kind, label, similarity = fields
        try:
            entry = LexiconEntry(
                surface=normalize_surface(surface),
                kind=LexiconKind(kind),
                label=label,
                base_similarity=float(similarity),
            )
        except (ValueError, ValidationError) as e:
            raise LexiconError(f"line {number}: {e}") from None
        if not entry.surface or not entry.label:
            raise LexiconError(f"line {number}: empty surface or label")
        entries.append(entry)

    lexicon = Lexicon(entries)
    logger.info("Lexicon loaded", path=str(path), entries=len(entries))
    return lexicon
