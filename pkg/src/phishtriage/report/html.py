"""Self-contained HTML rendering with highlighted intents and trigger outlines."""

from __future__ import annotations

from html import escape

from phishtriage.models import EmailBody, IntentSpan, PhishReport, Sentence, TriggerClass
from phishtriage.report.aggregator import check_indices
from phishtriage.report.formatter import CLASS_NAMES, advisory_line
from phishtriage.triggers.lexicon import TRIGGER_DEFINITIONS

_STYLE = """
body { font-family: sans-serif; max-width: 52rem; margin: 2rem auto; color: #222; }
h1 { font-size: 1.3rem; }
h2 { font-size: 1.1rem; margin-top: 1.5rem; }
.email-body { white-space: pre-wrap; line-height: 1.6; border: 1px solid #ccc; padding: 1rem; }
.sentence.trigger-spike { outline: 2px solid #d9822b; outline-offset: 1px; }
.badge { font-size: 0.7rem; background: #2b6cb0; color: #fff; border-radius: 3px; padding: 0 0.3rem; margin-right: 0.2rem; }
mark.intent { background: #fde68a; }
mark.intent::after { content: " " attr(data-tag); font-size: 0.7rem; color: #92400e; }
.advisory { font-weight: bold; }
table.densities td { padding: 0 1rem 0 0; }
""".strip()


def _highlight_sentence(body: EmailBody, sentence: Sentence, spans: list[IntentSpan]) -> str:
    """Escaped sentence text with intent spans wrapped in <mark> elements."""
    if not spans:
        return escape(body.text[sentence.char_start:sentence.char_end])

    # Character ranges of each span; overlapping tags share one mark per segment
    ranges = []
    for span in spans:
        start = sentence.token_offsets[span.token_start][0]
        end = sentence.token_offsets[span.token_end - 1][1]
        ranges.append((start, end, span.tag))
    cuts = sorted({sentence.char_start, sentence.char_end} | {r[0] for r in ranges} | {r[1] for r in ranges})

    parts = []
    for left, right in zip(cuts, cuts[1:]):
        text = escape(body.text[left:right])
        tags = sorted({tag for start, end, tag in ranges if start <= left and right <= end})
        if tags:
            parts.append(f'<mark class="intent" data-tag="{escape(" ".join(tags))}">{text}</mark>')
        else:
            parts.append(text)
    return "".join(parts)


def render_html(report: PhishReport, body: EmailBody) -> str:
    """Render the report and the full body as one HTML page.

    Intent spans are wrapped in ``<mark class="intent" data-tag=...>``,
    sentences whose most likely trigger spiked are outlined and summary
    sentences carry a badge. All email text is escaped.

    Raises:
        IndexMismatch: If the report does not match ``body``
    """
    check_indices(body, report.summary, report.trigger_profile, report.intent_spans)
    profile = report.trigger_profile
    spiking = set(profile.spikes)
    in_summary = set(report.summary.selected)

    spans_by_sentence: dict[int, list[IntentSpan]] = {}
    for span in report.intent_spans:
        spans_by_sentence.setdefault(span.sentence_index, []).append(span)

    out = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>Email report {escape(report.email_id)}</title>",
        f"<style>\n{_STYLE}\n</style>",
        "</head>",
        "<body>",
        f"<h1>Email report {escape(report.email_id)}</h1>",
        f'<p class="advisory">{escape(advisory_line(report))}</p>',
        "<h2>Summary</h2>",
        "<ul class=\"summary\">",
    ]
    for sentence_text in report.summary_sentences:
        out.append(f"<li>{escape(sentence_text)}</li>")
    out.append("</ul>")

    out.append("<h2>Trigger spikes</h2>")
    if spiking:
        out.append('<ul class="spikes">')
        for cls in profile.spikes:
            z = profile.z_score(cls)
            z_text = "inf" if z == float("inf") else f"{z:.2f}"
            out.append(
                f"<li><strong>{CLASS_NAMES[cls]}</strong> (z={z_text}): {escape(TRIGGER_DEFINITIONS[cls])}</li>"
            )
        out.append("</ul>")
    else:
        out.append("<p>none</p>")

    d = report.densities
    out.append("<h2>Densities</h2>")
    out.append('<table class="densities">')
    for label, value in (
        ("trigger", d.trigger_density),
        ("intent", d.intent_density),
        ("combined", d.combined_density),
        ("within summary", d.summary_density),
    ):
        out.append(f"<tr><td>{label}</td><td>{value * 100:.1f}%</td></tr>")
    out.append("</table>")

    out.append("<h2>Email</h2>")
    body_parts = []
    cursor = 0
    for sentence in body.sentences:
        body_parts.append(escape(body.text[cursor:sentence.char_start]))
        classes = ["sentence"]
        attrs = [f'data-index="{sentence.index}"']
        top = profile.distributions[sentence.index].argmax()
        if top is not TriggerClass.NONE and top in spiking:
            classes.append("trigger-spike")
            attrs.append(f'data-trigger="{top.value}"')
        badge = '<span class="badge">summary</span>' if sentence.index in in_summary else ""
        inner = _highlight_sentence(body, sentence, spans_by_sentence.get(sentence.index, []))
        body_parts.append(f'<span class="{" ".join(classes)}" {" ".join(attrs)}>{badge}{inner}</span>')
        cursor = sentence.char_end
    body_parts.append(escape(body.text[cursor:]))
    out.append(f'<div class="email-body">{"".join(body_parts)}</div>')

    out.extend(["</body>", "</html>"])
    return "\n".join(out) + "\n"
