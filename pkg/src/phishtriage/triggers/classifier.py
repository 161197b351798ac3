"""Per-sentence trigger classification through a pluggable backend."""

from __future__ import annotations

import math
from collections.abc import Sequence
from pathlib import Path
from typing import Protocol

from phishtriage.errors import BackendViolation, EmptySentence
from phishtriage.models import TRIGGER_CLASSES, EmailBody, Sentence, TriggerDistribution
from phishtriage.triggers.lexicon import Lexicon, lexicon_classify, load_lexicon

# Largest |sum - 1| accepted (and renormalized) from a backend
SUM_TOLERANCE = 1e-3


class TriggerBackend(Protocol):
    """Anything that maps sentences to 7-class trigger distributions."""

    backend_id: str

    def classify(self, sentences: Sequence[Sentence]) -> list[TriggerDistribution]: ...


class LexiconBackend:
    """Reference backend counting lexicon hits."""

    def __init__(self, lexicon: Lexicon | None = None, lexicon_path: Path | None = None):
        self.lexicon = lexicon or load_lexicon(lexicon_path)
        self.backend_id = f"lexicon-{self.lexicon.version}"

    def classify(self, sentences: Sequence[Sentence]) -> list[TriggerDistribution]:
        return [lexicon_classify(sentence, self.lexicon) for sentence in sentences]


def check_distribution(probs: Sequence[float], sentence_index: int) -> TriggerDistribution:
    """Validate a probability vector and renormalize it to sum to 1.

    Raises:
        BackendViolation: If the vector has the wrong length, an entry outside
            [0, 1] or a sum further than SUM_TOLERANCE from 1
    """
    if len(probs) != len(TRIGGER_CLASSES):
        raise BackendViolation(
            "wrong_length",
            f"expected {len(TRIGGER_CLASSES)} probabilities, got {len(probs)}",
            sentence_index=sentence_index,
        )
    values = []
    for p in probs:
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
            raise BackendViolation("not_a_number", f"probability {p!r} is not a finite number",
                                   sentence_index=sentence_index)
        if p < 0 or p > 1 + SUM_TOLERANCE:
            raise BackendViolation("prob_out_of_range", f"probability {p} outside [0, 1]",
                                   sentence_index=sentence_index)
        values.append(float(p))

    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise BackendViolation(
            "sum_out_of_tolerance",
            f"probabilities sum to {total:.6g}",
            sentence_index=sentence_index,
        )
    return TriggerDistribution(
        sentence_index=sentence_index,
        probs=tuple(v / total for v in values),
    )


def _require_tokens(sentence: Sentence) -> None:
    if not sentence.tokens:
        raise EmptySentence("sentence has no tokens", sentence_index=sentence.index)


def classify_sentence(sentence: Sentence, backend: TriggerBackend | None = None) -> TriggerDistribution:
    """Classify one sentence and validate the backend's distribution.

    Raises:
        EmptySentence: If the sentence has no tokens
        BackendViolation: If the backend returns an invalid distribution
    """
    _require_tokens(sentence)
    backend = backend or LexiconBackend()
    results = backend.classify([sentence])
    if len(results) != 1:
        raise BackendViolation("count_mismatch", f"expected 1 distribution, got {len(results)}",
                               sentence_index=sentence.index)
    return check_distribution(results[0].probs, sentence.index)


def classify_body(body: EmailBody, backend: TriggerBackend | None = None) -> list[TriggerDistribution]:
    """Classify every sentence of a body in one backend call."""
    for sentence in body.sentences:
        _require_tokens(sentence)
    backend = backend or LexiconBackend()
    results = backend.classify(body.sentences)
    if len(results) != len(body.sentences):
        raise BackendViolation(
            "count_mismatch",
            f"expected {len(body.sentences)} distributions, got {len(results)}",
        )
    return [check_distribution(dist.probs, sentence.index) for sentence, dist in zip(body.sentences, results)]
