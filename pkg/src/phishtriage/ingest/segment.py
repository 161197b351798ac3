"""Rule-based sentence segmentation and tokenization."""

from __future__ import annotations

import re
import unicodedata

from phishtriage.models import Sentence


# Words that end in a period but do not end a sentence
ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.",
    "e.g.", "i.e.", "vs.", "no.", "approx.", "dept.",
})

_PARAGRAPH_BREAK = re.compile(r"\n[^\S\n]*\n\s*")
# Terminator run, optional closing quotes/brackets, then whitespace
_BOUNDARY = re.compile(r"[.!?]+[\"'”’)\]]*\s+")
_TOKEN = re.compile(r"\S+")


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def _strip_span(text: str, start: int, end: int) -> tuple[int, int]:
    """Shrink [start, end) past leading and trailing punctuation."""
    while start < end and _is_punct(text[start]):
        start += 1
    while end > start and _is_punct(text[end - 1]):
        end -= 1
    return start, end


def tokenize_with_offsets(text: str, offset: int = 0) -> list[tuple[str, int, int]]:
    """Split on whitespace, strip edge punctuation, drop empty tokens.

    Returns (token, start, end) triples; offsets are shifted by ``offset``.
    """
    tokens = []
    for match in _TOKEN.finditer(text):
        start, end = _strip_span(text, match.start(), match.end())
        if start < end:
            tokens.append((text[start:end], start + offset, end + offset))
    return tokens


def tokenize(text: str) -> list[str]:
    """Tokens of ``text`` under the shared word-count rule."""
    return [token for token, _, _ in tokenize_with_offsets(text)]


def _ends_with_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end].lstrip("\"'(“‘[").lower()
    return word in ABBREVIATIONS


def _split_paragraph(text: str, start: int, end: int) -> list[tuple[int, int]]:
    pieces = []
    cursor = start
    for match in _BOUNDARY.finditer(text, start, end):
        if match.end() >= end:
            break
        following = text[match.end()]
        if not (following.isupper() or following.isdigit()):
            continue
        terminator_end = match.start() + len(match.group().rstrip())
        if _ends_with_abbreviation(text, terminator_end):
            continue
        pieces.append((cursor, terminator_end))
        cursor = match.end()
    pieces.append((cursor, end))
    return pieces


def _paragraphs(text: str) -> list[tuple[int, int]]:
    spans = []
    cursor = 0
    for match in _PARAGRAPH_BREAK.finditer(text):
        spans.append((cursor, match.start()))
        cursor = match.end()
    spans.append((cursor, len(text)))
    return spans


def segment_sentences(text: str) -> list[Sentence]:
    """Split ``text`` into sentences with exact character offsets.

    A sentence ends after '.', '!' or '?' (optionally followed by closing
    quotes or brackets) when whitespace and then an uppercase letter or a
    digit follow, unless the word before the terminator is a known
    abbreviation. A blank line always ends a sentence; a single newline
    never does. Sentences without tokens are dropped.

    Args:
        text: Plain text to segment

    Returns:
        Sentences in document order, indexed from 0
    """
    sentences: list[Sentence] = []
    for para_start, para_end in _paragraphs(text):
        for start, end in _split_paragraph(text, para_start, para_end):
            chunk = text[start:end]
            stripped = chunk.strip()
            if not stripped:
                continue
            start += len(chunk) - len(chunk.lstrip())
            end = start + len(stripped)
            triples = tokenize_with_offsets(text[start:end], offset=start)
            if not triples:
                continue
            sentences.append(
                Sentence(
                    index=len(sentences),
                    char_start=start,
                    char_end=end,
                    tokens=[t for t, _, _ in triples],
                    token_offsets=[(s, e) for _, s, e in triples],
                    text=stripped,
                )
            )
    return sentences
