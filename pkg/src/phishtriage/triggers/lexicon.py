"""Trigger lexicon and the lexicon-count reference classifier."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from phishtriage.data import LEXICON_FILE, read_text
from phishtriage.errors import InvalidDataFile
from phishtriage.models import (
    NONE_INDEX,
    TRIGGER_CLASSES,
    TRIGGERS,
    Sentence,
    TriggerClass,
    TriggerDistribution,
)


# One-line definitions shown next to spiking triggers in reports
TRIGGER_DEFINITIONS: dict[TriggerClass, str] = {
    TriggerClass.RECIPROCITY: "offers a gift or favour so you feel you owe something back",
    TriggerClass.CONSISTENCY: "appeals to something you supposedly agreed to or started before",
    TriggerClass.SOCIAL_PROOF: "claims many other people are already doing it",
    TriggerClass.AUTHORITY: "invokes a boss, official body or rule you are expected to obey",
    TriggerClass.LIKING: "flatters you or poses as a friend to lower your guard",
    TriggerClass.SCARCITY: "pushes a deadline or threatens loss to rush your decision",
}

_CLASS_BY_NAME = {cls.value.lower(): cls for cls in TRIGGERS}


@dataclass(frozen=True)
class Lexicon:
    """Per-class term lists; each term is a tuple of lowercase words."""

    terms: dict[TriggerClass, tuple[tuple[str, ...], ...]] = field(default_factory=dict)
    version: str = ""

    def __post_init__(self) -> None:
        if not any(self.terms.values()):
            raise InvalidDataFile("lexicon has no terms")

    def classes_for(self, term: str) -> list[TriggerClass]:
        """Classes listing ``term`` (a space-separated phrase)."""
        words = tuple(term.lower().split())
        return [cls for cls, terms in self.terms.items() if words in terms]


def parse_lexicon(text: str, source: str = "<lexicon>") -> Lexicon:
    """Parse ``<class>\\t<term>`` lines; ``#`` starts a comment line."""
    terms: dict[TriggerClass, list[tuple[str, ...]]] = {cls: [] for cls in TRIGGERS}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, sep, term = line.partition("\t")
        cls = _CLASS_BY_NAME.get(name.strip().lower())
        if not sep or cls is None:
            raise InvalidDataFile(f"bad lexicon line: {line!r}", source=source, line=lineno)
        words = tuple(term.lower().split())
        if not words:
            raise InvalidDataFile("empty lexicon term", source=source, line=lineno)
        if words not in terms[cls]:
            terms[cls].append(words)

    version = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    return Lexicon(terms={cls: tuple(t) for cls, t in terms.items()}, version=version)


@lru_cache(maxsize=8)
def load_lexicon(path: Path | None = None) -> Lexicon:
    """Load a lexicon file, or the bundled one when ``path`` is None."""
    return parse_lexicon(read_text(path, LEXICON_FILE), source=str(path or LEXICON_FILE))


def count_hits(tokens: list[str], terms: tuple[tuple[str, ...], ...]) -> int:
    """Count non-overlapping term occurrences, longest match first at each position."""
    words = [t.lower() for t in tokens]
    lengths = sorted({len(t) for t in terms}, reverse=True)
    term_set = set(terms)
    hits = 0
    i = 0
    while i < len(words):
        for length in lengths:
            if tuple(words[i:i + length]) in term_set:
                hits += 1
                i += length
                break
        else:
            i += 1
    return hits


def lexicon_hits(sentence: Sentence, lexicon: Lexicon) -> dict[TriggerClass, int]:
    """Hit count per trigger class. A token may count for several classes."""
    return {cls: count_hits(sentence.tokens, lexicon.terms.get(cls, ())) for cls in TRIGGERS}


def lexicon_classify(sentence: Sentence, lexicon: Lexicon) -> TriggerDistribution:
    """Distribution proportional to lexicon hits; all mass on None without hits."""
    hits = lexicon_hits(sentence, lexicon)
    total = sum(hits.values())
    if total == 0:
        probs = [0.0] * len(TRIGGER_CLASSES)
        probs[NONE_INDEX] = 1.0
    else:
        probs = [hits.get(cls, 0) / total for cls in TRIGGER_CLASSES if cls is not TriggerClass.NONE]
        probs.insert(NONE_INDEX, 0.0)
    return TriggerDistribution(sentence_index=sentence.index, probs=tuple(probs))
