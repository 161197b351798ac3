"""Label files, backend runs and multi-label precision/recall/F1."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

from sklearn.metrics import precision_recall_fscore_support
from sklearn.preprocessing import MultiLabelBinarizer

from phishtriage.errors import InvalidDataFile, PhishTriageError, UnknownLabel, UnpopulatedPredictions
from phishtriage.ingest.segment import tokenize_with_offsets
from phishtriage.intents.tagger import IntentBackend, tag_sentence
from phishtriage.models import (
    TRIGGER_CLASSES,
    ClassMetrics,
    ClassScores,
    EvaluationTask,
    LabeledExample,
    Sentence,
    TagRegistry,
)
from phishtriage.triggers.classifier import TriggerBackend, classify_sentence


def task_labels(task: EvaluationTask | str, registry: TagRegistry | None = None) -> tuple[str, ...]:
    """Allowed labels for a task in their canonical order."""
    if EvaluationTask(task) is EvaluationTask.TRIGGERS:
        return tuple(cls.value for cls in TRIGGER_CLASSES)
    return (registry or TagRegistry()).labels


def load_labels(
    path: str | Path,
    task: EvaluationTask | str,
    registry: TagRegistry | None = None,
) -> list[LabeledExample]:
    """Read ``{"text": ..., "labels": [...]}`` lines.

    Raises:
        InvalidDataFile: If a line is not a valid label record
        UnknownLabel: If a label is not allowed for ``task``
    """
    allowed = set(task_labels(task, registry))
    examples = []
    with Path(path).open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                text, labels = record["text"], record["labels"]
                if not isinstance(text, str) or not isinstance(labels, list):
                    raise TypeError("text must be a string and labels a list")
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InvalidDataFile(f"bad label record: {exc}", source=str(path), line=lineno) from exc
            for label in labels:
                if label not in allowed:
                    raise UnknownLabel(f"label {label!r} is not registered for {EvaluationTask(task).value}",
                                       line=lineno)
            examples.append(LabeledExample(text=text, true_labels=frozenset(labels)))
    return examples


def _as_sentence(text: str) -> Sentence:
    triples = tokenize_with_offsets(text)
    return Sentence(
        index=0,
        char_start=0,
        char_end=len(text),
        tokens=[t for t, _, _ in triples],
        token_offsets=[(s, e) for _, s, e in triples],
        text=text,
    )


def run_backend_on_labels(
    examples: Sequence[LabeledExample],
    backend: TriggerBackend | IntentBackend,
    task: EvaluationTask | str,
    registry: TagRegistry | None = None,
) -> list[LabeledExample]:
    """Fill in predictions: argmax class for triggers, emitted tag set for intents.

    Each example's text is treated as one sentence. Errors carry the example
    index in their context.
    """
    task = EvaluationTask(task)
    filled = []
    for index, example in enumerate(examples):
        sentence = _as_sentence(example.text)
        try:
            if task is EvaluationTask.TRIGGERS:
                predicted = frozenset({classify_sentence(sentence, backend).argmax().value})
            else:
                predicted = frozenset(span.tag for span in tag_sentence(sentence, backend, registry))
        except PhishTriageError as exc:
            exc.at(example=index)
            raise
        filled.append(LabeledExample(example.text, example.true_labels, predicted))
    return filled


def evaluate_classification(
    examples: Sequence[LabeledExample],
    labels: Sequence[str] | None = None,
) -> ClassMetrics:
    """Per-class and pooled precision/recall/F1 over multi-label examples.

    Classes that appear in neither truth nor predictions are left out of the
    per-class table and the macro averages.

    Args:
        examples: Examples with predictions filled in
        labels: Allowed labels in display order; any label when omitted

    Raises:
        UnpopulatedPredictions: If there are no examples or one lacks predictions
        UnknownLabel: If a label is not in ``labels``
    """
    if not examples:
        raise UnpopulatedPredictions("no examples to evaluate")
    for index, example in enumerate(examples):
        if example.predicted is None:
            raise UnpopulatedPredictions("example has no predictions", example=index)

    seen = set()
    for example in examples:
        seen |= example.true_labels | example.predicted
    if labels is not None:
        unknown = sorted(seen - set(labels))
        if unknown:
            raise UnknownLabel(f"unregistered labels: {', '.join(unknown)}")
        classes = [label for label in labels if label in seen]
    else:
        classes = sorted(seen)

    if not classes:
        return ClassMetrics({}, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    binarizer = MultiLabelBinarizer(classes=classes)
    y_true = binarizer.fit_transform([sorted(e.true_labels) for e in examples])
    y_pred = binarizer.transform([sorted(e.predicted) for e in examples])

    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, average=None, zero_division=0
    )
    macro = precision_recall_fscore_support(y_true, y_pred, average="macro", zero_division=0)
    micro = precision_recall_fscore_support(y_true, y_pred, average="micro", zero_division=0)

    per_class = {
        label: ClassScores(float(p), float(r), float(f), int(s))
        for label, p, r, f, s in zip(classes, precision, recall, f1, support)
    }
    return ClassMetrics(
        per_class=per_class,
        macro_precision=float(macro[0]),
        macro_recall=float(macro[1]),
        macro_f1=float(macro[2]),
        micro_precision=float(micro[0]),
        micro_recall=float(micro[1]),
        micro_f1=float(micro[2]),
    )
