"""Rule-based intent tagging and validation of backend spans."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Sequence
from typing import Protocol

from phishtriage.errors import BackendViolation, EmptySentence, InvalidDataFile
from phishtriage.intents.rules import RuleTable, load_registry, load_rules
from phishtriage.models import EmailBody, IntentRule, IntentSpan, Sentence, TagRegistry


class IntentBackend(Protocol):
    """Anything that emits intent spans for a batch of sentences."""

    backend_id: str

    def tag(self, sentences: Sequence[Sentence]) -> list[IntentSpan]: ...


def _nearest_object(words: list[str], i: int, rule: IntentRule) -> int | None:
    # Closest object term within the gap; on equal distance the one after the trigger
    for distance in range(1, rule.gap + 1):
        for j in (i + distance, i - distance):
            if 0 <= j < len(words) and words[j] in rule.objects:
                return j
    return None


def rule_tag(sentence: Sentence, rules: Iterable[IntentRule]) -> list[IntentSpan]:
    """Emit a span wherever a trigger term has an object term within the rule's gap.

    Each span covers the trigger, its nearest object and the tokens between
    them. Overlapping spans of the same tag are merged.
    """
    words = [t.lower() for t in sentence.tokens]
    spans = []
    for rule in rules:
        for i, word in enumerate(words):
            if word not in rule.triggers:
                continue
            j = _nearest_object(words, i, rule)
            if j is not None:
                spans.append(IntentSpan(sentence.index, min(i, j), max(i, j) + 1, rule.tag, 1.0))
    return merge_spans(spans)


def merge_spans(spans: Iterable[IntentSpan]) -> list[IntentSpan]:
    """Union overlapping spans that share sentence and tag, keeping the max confidence.

    Touching spans stay separate. Output is sorted by (sentence_index, token_start, tag).
    """
    groups: dict[tuple[int, str], list[IntentSpan]] = defaultdict(list)
    for span in spans:
        groups[(span.sentence_index, span.tag)].append(span)

    merged = []
    for (sentence_index, tag), group in groups.items():
        group.sort(key=lambda s: (s.token_start, s.token_end))
        start, end, confidence = group[0].token_start, group[0].token_end, group[0].confidence
        for span in group[1:]:
            if span.token_start < end:
                end = max(end, span.token_end)
                confidence = max(confidence, span.confidence)
                continue
            merged.append(IntentSpan(sentence_index, start, end, tag, confidence))
            start, end, confidence = span.token_start, span.token_end, span.confidence
        merged.append(IntentSpan(sentence_index, start, end, tag, confidence))

    merged.sort(key=lambda s: (s.sentence_index, s.token_start, s.tag))
    return merged


class RuleBackend:
    """Reference backend applying the co-occurrence rule table."""

    def __init__(self, table: RuleTable | None = None, registry: TagRegistry | None = None):
        self.table = table or load_rules()
        registry = registry or load_registry()
        unknown = sorted(self.table.tags - set(registry.labels))
        if unknown:
            raise InvalidDataFile(f"rule table uses unregistered tags: {', '.join(unknown)}")
        self.backend_id = f"rules-{self.table.version}"

    def tag(self, sentences: Sequence[Sentence]) -> list[IntentSpan]:
        spans = []
        for sentence in sentences:
            spans.extend(rule_tag(sentence, self.table.rules))
        return spans


def check_span(span: IntentSpan, sentence: Sentence, registry: TagRegistry) -> IntentSpan:
    """Validate one backend span against its sentence and the registry.

    Raises:
        BackendViolation: If the range is out of bounds, the confidence is
            outside [0, 1] or the tag is not registered
    """
    if not (0 <= span.token_start < span.token_end <= sentence.token_count):
        raise BackendViolation(
            "span_out_of_bounds",
            f"span [{span.token_start}, {span.token_end}) outside 0..{sentence.token_count}",
            sentence_index=sentence.index,
        )
    if not (0.0 <= span.confidence <= 1.0):
        raise BackendViolation(
            "confidence_out_of_range",
            f"confidence {span.confidence} outside [0, 1]",
            sentence_index=sentence.index,
        )
    if span.tag not in registry:
        raise BackendViolation("unregistered_tag", f"tag {span.tag!r} is not registered",
                               sentence_index=sentence.index)
    return span


def tag_sentence(
    sentence: Sentence,
    backend: IntentBackend | None = None,
    registry: TagRegistry | None = None,
) -> list[IntentSpan]:
    """Tag one sentence, validate and merge the backend's spans.

    Raises:
        EmptySentence: If the sentence has no tokens
        BackendViolation: If a span breaks the span contract
    """
    if not sentence.tokens:
        raise EmptySentence("sentence has no tokens", sentence_index=sentence.index)
    registry = registry or load_registry()
    backend = backend or RuleBackend(registry=registry)

    spans = []
    for span in backend.tag([sentence]):
        if span.sentence_index != sentence.index:
            raise BackendViolation(
                "wrong_sentence",
                f"span for sentence {span.sentence_index} returned for sentence {sentence.index}",
                sentence_index=sentence.index,
            )
        spans.append(check_span(span, sentence, registry))
    return merge_spans(spans)


def collect_spans(
    body: EmailBody,
    backend: IntentBackend | None = None,
    registry: TagRegistry | None = None,
) -> list[IntentSpan]:
    """Tag every sentence of a body in one backend call.

    Returns:
        Validated spans ordered by (sentence_index, token_start, tag)
    """
    if not body.sentences:
        return []
    registry = registry or load_registry()
    backend = backend or RuleBackend(registry=registry)

    spans = []
    for span in backend.tag(body.sentences):
        if not (0 <= span.sentence_index < len(body.sentences)):
            raise BackendViolation(
                "span_out_of_bounds",
                f"span references sentence {span.sentence_index} of {len(body.sentences)}",
                sentence_index=span.sentence_index,
            )
        spans.append(check_span(span, body.sentences[span.sentence_index], registry))
    return merge_spans(spans)
