"""Backend seams served by an external model over BackendClient."""

from __future__ import annotations

import logging
from collections.abc import Sequence

from phishtriage.backend.client import BackendClient
from phishtriage.backend.validation import (
    validate_intent_result,
    validate_summary_result,
    validate_trigger_result,
)
from phishtriage.models import (
    TRIGGER_CLASSES,
    BackendTask,
    EmailBody,
    IntentSpan,
    Sentence,
    Summary,
    TagRegistry,
    TriggerDistribution,
)

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE_CUTOFF = 0.5


def _sentence_texts(sentences: Sequence[Sentence]) -> list[str]:
    return [s.display_text() for s in sentences]


class RemoteSummarizer:
    """Summarizer seam over the ``summarize`` task."""

    def __init__(self, client: BackendClient):
        self.client = client
        self.backend_id = f"remote:{client.description}"

    def select(self, body: EmailBody, budget: int) -> Summary:
        payload = {
            "sentences": [body.sentence_text(i) for i in range(len(body.sentences))],
            "token_counts": [s.token_count for s in body.sentences],
            "budget": budget,
        }
        result = self.client.call(BackendTask.SUMMARIZE, payload)
        return validate_summary_result(result, body, budget)


class RemoteTriggerBackend:
    """Trigger seam over the ``classify_triggers`` task."""

    def __init__(self, client: BackendClient):
        self.client = client
        self.backend_id = f"remote:{client.description}"

    def classify(self, sentences: Sequence[Sentence]) -> list[TriggerDistribution]:
        payload = {
            "sentences": _sentence_texts(sentences),
            "classes": [cls.value for cls in TRIGGER_CLASSES],
        }
        result = self.client.call(BackendTask.CLASSIFY_TRIGGERS, payload)
        return validate_trigger_result(result, sentences)


class RemoteIntentBackend:
    """Intent seam over the ``tag_intents`` task.

    Spans below ``confidence_cutoff`` are dropped after validation.
    """

    def __init__(
        self,
        client: BackendClient,
        registry: TagRegistry | None = None,
        confidence_cutoff: float = DEFAULT_CONFIDENCE_CUTOFF,
    ):
        if not (0.0 <= confidence_cutoff <= 1.0):
            raise ValueError(f"confidence cutoff must be in [0, 1], got {confidence_cutoff}")
        self.client = client
        self.registry = registry or TagRegistry()
        self.confidence_cutoff = confidence_cutoff
        self.backend_id = f"remote:{client.description}"

    def tag(self, sentences: Sequence[Sentence]) -> list[IntentSpan]:
        payload = {
            "sentences": _sentence_texts(sentences),
            "tokens": [list(s.tokens) for s in sentences],
            "tags": list(self.registry.labels),
        }
        result = self.client.call(BackendTask.TAG_INTENTS, payload)
        spans = validate_intent_result(result, sentences, self.registry)
        kept = [s for s in spans if s.confidence >= self.confidence_cutoff]
        if len(kept) != len(spans):
            logger.debug("dropped %d spans below confidence %.2f", len(spans) - len(kept), self.confidence_cutoff)
        return kept
