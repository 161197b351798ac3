"""JSON and plain-text rendering of reports."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from phishtriage import canonical
from phishtriage.errors import InvalidDataFile
from phishtriage.models import (
    REPORT_SCHEMA,
    TRIGGER_CLASSES,
    DensityMetrics,
    IntentSpan,
    LengthPolicy,
    PhishReport,
    ReportMeta,
    Summary,
    TagRegistry,
    TriggerClass,
    TriggerDistribution,
    TriggerProfile,
)
from phishtriage.triggers.lexicon import TRIGGER_DEFINITIONS


# Trigger display names
CLASS_NAMES = {
    TriggerClass.RECIPROCITY: "Reciprocity",
    TriggerClass.CONSISTENCY: "Consistency",
    TriggerClass.SOCIAL_PROOF: "Social Proof",
    TriggerClass.AUTHORITY: "Authority",
    TriggerClass.LIKING: "Liking",
    TriggerClass.SCARCITY: "Scarcity",
    TriggerClass.NONE: "None",
}

NO_FINDINGS = "no spikes or intent cues detected"


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _span_to_dict(span: IntentSpan, quote: str) -> dict[str, Any]:
    return {
        "sentence_index": span.sentence_index,
        "token_start": span.token_start,
        "token_end": span.token_end,
        "tag": span.tag,
        "confidence": span.confidence,
        "text": quote,
    }


def meta_to_dict(meta: ReportMeta) -> dict[str, Any]:
    return {
        "schema": meta.schema,
        "policy": meta.policy.to_dict(),
        "backends": dict(meta.backends),
        "lexicon_version": meta.lexicon_version,
        "rules_version": meta.rules_version,
        "registry_version": meta.registry_version,
        "baseline_label": meta.baseline_label,
        "z_spike": meta.z_spike,
        "intent_confidence_cutoff": meta.confidence_cutoff,
    }


def report_to_dict(report: PhishReport) -> dict[str, Any]:
    """Plain-data form of a report; class vectors follow the canonical class order."""
    profile = report.trigger_profile
    return {
        "schema": report.meta.schema,
        "email_id": report.email_id,
        "summary": {
            "selected": list(report.summary.selected),
            "sentences": list(report.summary_sentences),
            "word_count": report.summary.word_count,
            "budget": report.summary.budget,
            "budget_exceeded": report.summary.budget_exceeded,
            "compression_ratio": report.compression_ratio,
            "ranking_converged": report.summary.ranking_converged,
        },
        "triggers": {
            "classes": [cls.value for cls in TRIGGER_CLASSES],
            "intensity": list(profile.intensity),
            "peak": list(profile.peak),
            "z": list(profile.z),
            "spikes": [cls.value for cls in profile.spikes],
            "sentences": [list(d.probs) for d in profile.distributions],
        },
        "intents": {
            "spans": [_span_to_dict(s, q) for s, q in zip(report.intent_spans, report.span_quotes)],
            "tag_counts": report.tag_counts,
        },
        "densities": {
            "trigger": report.densities.trigger_density,
            "intent": report.densities.intent_density,
            "combined": report.densities.combined_density,
            "summary": report.densities.summary_density,
        },
        "meta": meta_to_dict(report.meta),
    }


def render_json(report: PhishReport) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, compact, 6 significant digits."""
    return canonical.dump_bytes(report_to_dict(report))


def _policy_from_dict(doc: dict[str, Any]) -> LengthPolicy:
    fraction = doc.get("fraction")
    return LengthPolicy(
        hard_cap_words=doc.get("hard_cap_words"),
        fraction=None if fraction is None else Fraction(fraction),
    )


def _trigger_class(name: str) -> TriggerClass:
    try:
        return TriggerClass(name)
    except ValueError:
        raise InvalidDataFile(f"unknown trigger class {name!r}") from None


def parse_report(data: bytes | str, registry: TagRegistry | None = None) -> PhishReport:
    """Rebuild a report from ``render_json`` output.

    Raises:
        InvalidDataFile: If the document is not a report_v1 report
        UnknownLabel: If a span carries a tag missing from ``registry``
    """
    registry = registry or TagRegistry()
    try:
        doc = json.loads(data)
        if doc.get("schema") != REPORT_SCHEMA:
            raise InvalidDataFile(f"unsupported report schema {doc.get('schema')!r}")
        if doc["triggers"]["classes"] != [cls.value for cls in TRIGGER_CLASSES]:
            raise InvalidDataFile("report class order differs from the canonical order")

        email_id = str(doc["email_id"])
        summary_doc = doc["summary"]
        summary = Summary(
            selected=list(summary_doc["selected"]),
            word_count=summary_doc["word_count"],
            budget=summary_doc["budget"],
            budget_exceeded=summary_doc["budget_exceeded"],
            ranking_converged=summary_doc.get("ranking_converged", True),
        )

        triggers = doc["triggers"]
        profile = TriggerProfile(
            intensity=tuple(canonical.parse_float(v) for v in triggers["intensity"]),
            z=tuple(canonical.parse_float(v) for v in triggers["z"]),
            spikes=tuple(_trigger_class(name) for name in triggers["spikes"]),
            peak=tuple(canonical.parse_float(v) for v in triggers["peak"]),
            distributions=[
                TriggerDistribution(i, tuple(canonical.parse_float(p) for p in probs))
                for i, probs in enumerate(triggers["sentences"])
            ],
        )

        spans, quotes = [], []
        for entry in doc["intents"]["spans"]:
            spans.append(
                IntentSpan(
                    sentence_index=entry["sentence_index"],
                    token_start=entry["token_start"],
                    token_end=entry["token_end"],
                    tag=registry.require(entry["tag"]),
                    confidence=canonical.parse_float(entry["confidence"]),
                )
            )
            quotes.append(entry["text"])

        densities = doc["densities"]
        meta_doc = doc["meta"]
        meta = ReportMeta(
            policy=_policy_from_dict(meta_doc["policy"]),
            backends=dict(meta_doc["backends"]),
            lexicon_version=meta_doc["lexicon_version"],
            rules_version=meta_doc["rules_version"],
            registry_version=meta_doc["registry_version"],
            baseline_label=meta_doc["baseline_label"],
            z_spike=canonical.parse_float(meta_doc["z_spike"]),
            confidence_cutoff=canonical.parse_float(meta_doc["intent_confidence_cutoff"]),
            schema=meta_doc["schema"],
        )
        return PhishReport(
            email_id=email_id,
            summary=summary,
            summary_sentences=list(summary_doc["sentences"]),
            trigger_profile=profile,
            intent_spans=spans,
            span_quotes=quotes,
            densities=DensityMetrics(
                trigger_density=canonical.parse_float(densities["trigger"]),
                intent_density=canonical.parse_float(densities["intent"]),
                combined_density=canonical.parse_float(densities["combined"]),
                summary_density=canonical.parse_float(densities["summary"]),
            ),
            meta=meta,
            compression_ratio=canonical.parse_float(summary_doc["compression_ratio"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidDataFile(f"malformed report: {exc}") from exc


# ---------------------------------------------------------------------------
# Text
# ---------------------------------------------------------------------------


def _format_z(z: float) -> str:
    return "inf" if z == float("inf") else f"{z:.2f}"


def _format_percent(value: float) -> str:
    return f"{value * 100:.1f}%"


def advisory_line(report: PhishReport) -> str:
    """One line naming the spiking triggers and the number of intent cues."""
    spikes = report.trigger_profile.spikes
    count = len(report.intent_spans)
    if not spikes and not count:
        return NO_FINDINGS
    parts = []
    if spikes:
        names = ", ".join(CLASS_NAMES[cls] for cls in spikes)
        parts.append(f"{len(spikes)} trigger spike{'s' if len(spikes) != 1 else ''} ({names})")
    if count:
        parts.append(f"{count} intent cue{'s' if count != 1 else ''}")
    return " and ".join(parts) + "; weigh these before acting on the email"


def render_text(report: PhishReport) -> str:
    """Plain-text report: summary, trigger spikes, intents, densities, advisory.

    Args:
        report: The report to format

    Returns:
        Multi-line string without a trailing newline
    """
    summary = report.summary
    lines = [f"Email: {report.email_id}", ""]

    header = f"Summary ({summary.word_count} words, budget {summary.budget}"
    if summary.budget_exceeded:
        header += ", over budget"
    if not summary.ranking_converged:
        header += ", ranking did not converge"
    header += ")"
    lines.append(header)
    for sentence in report.summary_sentences:
        lines.append(f"  - {sentence}")
    lines.append("")

    lines.append("Trigger spikes")
    profile = report.trigger_profile
    if not profile.spikes:
        lines.append("  none")
    for cls in profile.spikes:
        lines.append(f"  {CLASS_NAMES[cls]} (z={_format_z(profile.z_score(cls))}): {TRIGGER_DEFINITIONS[cls]}")
    lines.append("")

    lines.append("Suspicious intents")
    if not report.intent_spans:
        lines.append("  none")
    for span, quote in zip(report.intent_spans, report.span_quotes):
        lines.append(f"  [{span.tag}] \"{quote}\" (sentence {span.sentence_index + 1})")
    lines.append("")

    d = report.densities
    lines.append("Densities")
    lines.append(
        f"  trigger {_format_percent(d.trigger_density)}, intent {_format_percent(d.intent_density)}, "
        f"combined {_format_percent(d.combined_density)}, within summary {_format_percent(d.summary_density)}"
    )
    lines.append("")

    lines.append(f"Advisory: {advisory_line(report)}")
    return "\n".join(lines)


