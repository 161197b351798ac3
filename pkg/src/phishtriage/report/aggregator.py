"""Report aggregation and trigger/intent density metrics."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from phishtriage.errors import IndexMismatch
from phishtriage.models import (
    DensityMetrics,
    EmailBody,
    IntentSpan,
    PhishReport,
    ReportMeta,
    Summary,
    TriggerClass,
    TriggerDistribution,
    TriggerProfile,
)

TokenSet = set[tuple[int, int]]  # (sentence_index, token_index)


def trigger_tokens(body: EmailBody, distributions: Sequence[TriggerDistribution]) -> TokenSet:
    """Tokens of every sentence whose most likely class is a trigger."""
    tokens: TokenSet = set()
    for dist in distributions:
        if dist.argmax() is not TriggerClass.NONE:
            sentence = body.sentences[dist.sentence_index]
            tokens.update((sentence.index, t) for t in range(sentence.token_count))
    return tokens


def intent_tokens(spans: Iterable[IntentSpan]) -> TokenSet:
    """Tokens covered by at least one intent span."""
    tokens: TokenSet = set()
    for span in spans:
        tokens.update((span.sentence_index, t) for t in range(span.token_start, span.token_end))
    return tokens


def _fraction(count: int, total: int) -> float:
    return count / total if total else 0.0


def compute_densities(
    body: EmailBody,
    distributions: Sequence[TriggerDistribution],
    spans: Sequence[IntentSpan],
    summary: Summary | None = None,
) -> DensityMetrics:
    """Fractions of the body's tokens flagged by each branch and by either.

    ``summary_density`` is the combined density restricted to the summary's
    sentences.
    """
    triggered = trigger_tokens(body, distributions)
    intended = intent_tokens(spans)
    combined = triggered | intended
    total = body.total_tokens

    summary_density = 0.0
    if summary is not None and summary.selected:
        chosen = set(summary.selected)
        summary_words = sum(body.sentences[i].token_count for i in chosen)
        in_summary = sum(1 for sentence_index, _ in combined if sentence_index in chosen)
        summary_density = _fraction(in_summary, summary_words)

    return DensityMetrics(
        trigger_density=_fraction(len(triggered), total),
        intent_density=_fraction(len(intended), total),
        combined_density=_fraction(len(combined), total),
        summary_density=summary_density,
    )


def check_indices(
    body: EmailBody,
    summary: Summary,
    profile: TriggerProfile,
    spans: Sequence[IntentSpan],
) -> None:
    """Raise IndexMismatch unless every index resolves against ``body``."""
    n = len(body.sentences)
    for index in summary.selected:
        if not (0 <= index < n):
            raise IndexMismatch(f"summary sentence {index} not in a {n}-sentence body")
    if len(profile.distributions) != n:
        raise IndexMismatch(f"{len(profile.distributions)} trigger distributions for {n} sentences")
    for position, dist in enumerate(profile.distributions):
        if dist.sentence_index != position:
            raise IndexMismatch(f"distribution {position} is for sentence {dist.sentence_index}")
    for span in spans:
        if not (0 <= span.sentence_index < n):
            raise IndexMismatch(f"intent span references sentence {span.sentence_index} of {n}")
        count = body.sentences[span.sentence_index].token_count
        if not (0 <= span.token_start < span.token_end <= count):
            raise IndexMismatch(
                f"intent span [{span.token_start}, {span.token_end}) outside 0..{count}",
                sentence_index=span.sentence_index,
            )


def aggregate(
    body: EmailBody,
    summary: Summary,
    profile: TriggerProfile,
    spans: Sequence[IntentSpan],
    meta: ReportMeta,
    email_id: str = "",
) -> PhishReport:
    """Combine the three branch outputs for one email.

    Raises:
        IndexMismatch: If any summary, distribution or span index does not
            resolve against the body
    """
    check_indices(body, summary, profile, spans)
    ordered = sorted(spans, key=lambda s: (s.sentence_index, s.token_start, s.tag))
    return PhishReport(
        email_id=email_id,
        summary=summary,
        summary_sentences=[body.sentence_text(i) for i in summary.selected],
        trigger_profile=profile,
        intent_spans=ordered,
        span_quotes=[body.span_text(span) for span in ordered],
        densities=compute_densities(body, profile.distributions, ordered, summary),
        meta=meta,
        compression_ratio=_fraction(summary.word_count, body.total_tokens),
    )
