"""Task-level checks on backend results before any module accepts them."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

from phishtriage.errors import BackendViolation
from phishtriage.intents.tagger import check_span
from phishtriage.models import (
    BackendTask,
    EmailBody,
    IntentSpan,
    Sentence,
    Summary,
    TagRegistry,
    TriggerDistribution,
)
from phishtriage.summarize.summarizer import validate_summary
from phishtriage.triggers.classifier import check_distribution


def _field(result: dict[str, Any], key: str, kind: type, what: str) -> Any:
    value = result.get(key) if isinstance(result, dict) else None
    if not isinstance(value, kind):
        raise BackendViolation("malformed_result", f"result.{key} must be {what}")
    return value


def validate_trigger_result(result: dict[str, Any], sentences: Sequence[Sentence]) -> list[TriggerDistribution]:
    """``{"distributions": [[7 probs], ...]}`` with one vector per sentence."""
    vectors = _field(result, "distributions", list, "a list of probability vectors")
    if len(vectors) != len(sentences):
        raise BackendViolation(
            "count_mismatch", f"expected {len(sentences)} distributions, got {len(vectors)}"
        )
    validated = []
    for sentence, probs in zip(sentences, vectors):
        if not isinstance(probs, list):
            raise BackendViolation("malformed_result", "distribution must be a list", sentence_index=sentence.index)
        validated.append(check_distribution(probs, sentence.index))
    return validated


def validate_intent_result(
    result: dict[str, Any],
    sentences: Sequence[Sentence],
    registry: TagRegistry,
) -> list[IntentSpan]:
    """``{"spans": [{sentence_index, token_start, token_end, tag, confidence}, ...]}``.

    ``sentence_index`` is the position in ``sentences``.
    """
    entries = _field(result, "spans", list, "a list of spans")
    spans = []
    for entry in entries:
        try:
            position = entry["sentence_index"]
            start, end = entry["token_start"], entry["token_end"]
            tag = entry["tag"]
            confidence = float(entry.get("confidence", 1.0))
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in (position, start, end)):
                raise TypeError("indices must be integers")
            if not isinstance(tag, str):
                raise TypeError("tag must be a string")
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise BackendViolation("malformed_result", f"bad span {entry!r}: {exc}") from exc
        if not (0 <= position < len(sentences)):
            raise BackendViolation(
                "span_out_of_bounds", f"span references sentence {position} of {len(sentences)}"
            )
        sentence = sentences[position]
        span = IntentSpan(sentence.index, start, end, tag, confidence)
        spans.append(check_span(span, sentence, registry))
    return spans


def validate_summary_result(result: dict[str, Any], body: EmailBody, budget: int) -> Summary:
    """``{"selected": [indices], "budget_exceeded": bool}``."""
    selected = _field(result, "selected", list, "a list of sentence indices")
    exceeded = result.get("budget_exceeded", False)
    if not isinstance(exceeded, bool):
        raise BackendViolation("malformed_result", "result.budget_exceeded must be a boolean")
    summary = Summary(selected=list(selected), word_count=0, budget=budget, budget_exceeded=exceeded)
    return validate_summary(summary, body, budget)


def validate_response(task: BackendTask | str, result: dict[str, Any], **context: Any) -> Any:
    """Validate a result for ``task``.

    Context keywords: ``sentences`` for classify_triggers; ``sentences`` and
    ``registry`` for tag_intents; ``body`` and ``budget`` for summarize.

    Raises:
        BackendViolation: With a machine-readable ``reason``
    """
    task = BackendTask(task)
    if task is BackendTask.CLASSIFY_TRIGGERS:
        return validate_trigger_result(result, context["sentences"])
    if task is BackendTask.TAG_INTENTS:
        return validate_intent_result(result, context["sentences"], context.get("registry") or TagRegistry())
    return validate_summary_result(result, context["body"], context["budget"])
