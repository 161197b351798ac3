"""Per-email trigger profiles, spike detection and corpus baselines."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Sequence
from functools import lru_cache
from pathlib import Path

import numpy as np

from phishtriage import canonical
from phishtriage.data import BASELINE_FILE, read_text
from phishtriage.errors import InsufficientCorpus, InvalidDataFile, NoSentences
from phishtriage.models import (
    TRIGGER_CLASSES,
    TRIGGERS,
    CorpusBaseline,
    EmailBody,
    TriggerDistribution,
    TriggerProfile,
)
from phishtriage.triggers.classifier import LexiconBackend, TriggerBackend, classify_body

logger = logging.getLogger(__name__)

DEFAULT_Z_SPIKE = 2.0


def email_intensity(distributions: Sequence[TriggerDistribution]) -> np.ndarray:
    """Mean class probability over an email's sentences."""
    if not distributions:
        raise NoSentences("cannot profile an email without sentences")
    return np.mean(np.array([d.probs for d in distributions], dtype=float), axis=0)


def z_score(intensity: float, mean: float, stddev: float) -> float:
    if stddev > 0:
        return (intensity - mean) / stddev
    return math.inf if intensity > mean else 0.0


def compute_profile(
    distributions: Sequence[TriggerDistribution],
    baseline: CorpusBaseline,
    z_spike: float = DEFAULT_Z_SPIKE,
) -> TriggerProfile:
    """Aggregate sentence distributions and flag triggers that spike.

    Args:
        distributions: One distribution per sentence
        baseline: Reference means and standard deviations
        z_spike: Z-score at or above which a trigger spikes

    Returns:
        TriggerProfile with intensities, trigger z-scores and spike set

    Raises:
        NoSentences: If there are no distributions
        ValueError: If z_spike is not positive
    """
    if z_spike <= 0:
        raise ValueError(f"z_spike must be positive, got {z_spike}")
    intensity = email_intensity(distributions)
    peak = np.max(np.array([d.probs for d in distributions], dtype=float), axis=0)

    z = []
    spikes = []
    for i, cls in enumerate(TRIGGERS):
        score = z_score(float(intensity[i]), baseline.mean[i], baseline.stddev[i])
        z.append(score)
        if score >= z_spike:
            spikes.append(cls)

    return TriggerProfile(
        intensity=tuple(float(v) for v in intensity),
        z=tuple(z),
        spikes=tuple(spikes),
        peak=tuple(float(v) for v in peak),
        distributions=list(distributions),
    )


class BaselineAccumulator:
    """Single-pass mean/variance over per-email intensity vectors.

    Partial accumulators built on disjoint partitions combine with ``merge``.
    """

    def __init__(self) -> None:
        self.count = 0
        self.mean = np.zeros(len(TRIGGER_CLASSES))
        self._m2 = np.zeros(len(TRIGGER_CLASSES))

    def add(self, intensity: Sequence[float]) -> None:
        x = np.asarray(intensity, dtype=float)
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self._m2 = self._m2 + delta * (x - self.mean)

    def merge(self, other: BaselineAccumulator) -> BaselineAccumulator:
        merged = BaselineAccumulator()
        merged.count = self.count + other.count
        if merged.count == 0:
            return merged
        delta = other.mean - self.mean
        merged.mean = self.mean + delta * other.count / merged.count
        merged._m2 = self._m2 + other._m2 + delta**2 * self.count * other.count / merged.count
        return merged

    def to_baseline(self, corpus_label: str) -> CorpusBaseline:
        if self.count < 2:
            raise InsufficientCorpus(f"a baseline needs at least 2 emails, got {self.count}")
        variance = np.maximum(self._m2 / (self.count - 1), 0.0)
        return CorpusBaseline(
            mean=tuple(float(v) for v in self.mean),
            stddev=tuple(float(v) for v in np.sqrt(variance)),
            n_emails=self.count,
            corpus_label=corpus_label,
        )


def fit_baseline(
    corpus: Iterable[EmailBody],
    backend: TriggerBackend | None = None,
    corpus_label: str = "custom",
) -> CorpusBaseline:
    """Fit per-class intensity statistics over a stream of bodies.

    Raises:
        InsufficientCorpus: If fewer than 2 emails were seen
    """
    backend = backend or LexiconBackend()
    accumulator = BaselineAccumulator()
    for body in corpus:
        accumulator.add(email_intensity(classify_body(body, backend)))
    logger.info("fitted baseline %r over %d emails", corpus_label, accumulator.count)
    return accumulator.to_baseline(corpus_label)


def baseline_to_dict(baseline: CorpusBaseline) -> dict[str, object]:
    return {
        "classes": [cls.value for cls in TRIGGER_CLASSES],
        "corpus_label": baseline.corpus_label,
        "mean": list(baseline.mean),
        "n_emails": baseline.n_emails,
        "stddev": list(baseline.stddev),
    }


def parse_baseline(text: str, source: str = "<baseline>") -> CorpusBaseline:
    """Parse and validate a baseline JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDataFile(f"baseline is not JSON: {exc}", source=source) from exc
    if not isinstance(doc, dict):
        raise InvalidDataFile("baseline must be a JSON object", source=source)

    expected = [cls.value for cls in TRIGGER_CLASSES]
    if doc.get("classes", expected) != expected:
        raise InvalidDataFile(f"baseline classes must be {expected}", source=source)
    try:
        mean = tuple(float(v) for v in doc["mean"])
        stddev = tuple(float(v) for v in doc["stddev"])
        n_emails = int(doc["n_emails"])
        label = str(doc["corpus_label"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDataFile(f"malformed baseline: {exc}", source=source) from exc

    if len(mean) != len(expected) or len(stddev) != len(expected):
        raise InvalidDataFile("baseline vectors must have 7 entries", source=source)
    if not all(math.isfinite(m) for m in mean):
        raise InvalidDataFile("baseline mean must be finite", source=source)
    if any(s < 0 or not math.isfinite(s) for s in stddev):
        raise InvalidDataFile("baseline stddev must be finite and non-negative", source=source)
    if n_emails < 2:
        raise InvalidDataFile("baseline n_emails must be at least 2", source=source)
    return CorpusBaseline(mean=mean, stddev=stddev, n_emails=n_emails, corpus_label=label)


@lru_cache(maxsize=8)
def load_baseline(path: Path | None = None) -> CorpusBaseline:
    """Load a baseline file, or the bundled default when ``path`` is None."""
    return parse_baseline(read_text(path, BASELINE_FILE), source=str(path or BASELINE_FILE))


def save_baseline(baseline: CorpusBaseline, path: Path) -> None:
    """Write the baseline as canonical JSON (byte-identical for equal baselines)."""
    Path(path).write_bytes(canonical.dump_bytes(baseline_to_dict(baseline)) + b"\n")
