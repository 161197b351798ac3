"""Message parsing, HTML stripping and body extraction."""

from __future__ import annotations

import email
import hashlib
import json
import logging
import re
from email import policy
from email.errors import HeaderParseError
from email.header import decode_header, make_header

from bs4 import BeautifulSoup, Comment

from phishtriage.errors import EmptyBody, UnparseableMessage, UnsupportedFormat
from phishtriage.ingest.segment import segment_sentences
from phishtriage.models import BodyPart, EmailBody, MessageFormat, RawEmail

logger = logging.getLogger(__name__)


# Elements whose content never reaches the reader
HIDDEN_TAGS = ("script", "style", "head", "title", "noscript", "template")

# Elements that start a new block; their edges become paragraph breaks
BLOCK_TAGS = (
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt",
    "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li",
    "main", "nav", "ol", "p", "pre", "section", "table", "tbody", "td", "tfoot",
    "th", "thead", "tr", "ul",
)

_BLOCK_MARK = "\u2029"  # paragraph separator, never produced by get_text() of real markup
_BLANK_LINE = re.compile(r"\n[^\S\n]*\n")
_MARKUP = re.compile(r"</?[A-Za-z][^>]*>")
_HEADER_SEPARATOR = re.compile(rb"\r?\n\r?\n")


def _decode_header_value(value: object) -> str:
    try:
        return str(make_header(decode_header(str(value))))
    except (UnicodeError, LookupError, HeaderParseError):
        return str(value)


def _message_id(raw_bytes: bytes, fmt: MessageFormat) -> str:
    return f"{fmt.value}:{hashlib.sha256(raw_bytes).hexdigest()[:12]}"


def _parse_rfc822(raw_bytes: bytes, email_id: str | None) -> RawEmail:
    if not _HEADER_SEPARATOR.search(raw_bytes):
        raise UnparseableMessage("no header/body separator found")

    message = email.message_from_bytes(raw_bytes, policy=policy.compat32)
    headers = [(name, _decode_header_value(value)) for name, value in message.items()]

    parts: list[BodyPart] = []
    for part in message.walk():
        if part.is_multipart():
            continue
        payload = part.get_payload(decode=True)
        if not payload:
            continue
        parts.append(
            BodyPart(
                content_type=part.get_content_type(),
                content=payload,
                charset=part.get_content_charset() or "",
            )
        )

    return RawEmail(
        id=email_id or _message_id(raw_bytes, MessageFormat.RFC822),
        headers=headers,
        body_parts=parts,
    )


def _parse_jsonl_record(raw_bytes: bytes, email_id: str | None) -> RawEmail:
    try:
        record = json.loads(raw_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UnparseableMessage(f"invalid JSON record: {exc}") from exc
    if not isinstance(record, dict) or not isinstance(record.get("body", ""), str):
        raise UnparseableMessage("record must be an object with a string 'body'")

    raw_headers = record.get("headers") or {}
    if not isinstance(raw_headers, dict):
        raise UnparseableMessage("'headers' must be an object")
    headers = [(str(name), str(value)) for name, value in raw_headers.items()]

    body = record.get("body", "")
    parts = [BodyPart("text/plain", body.encode("utf-8"), "utf-8")] if body else []
    record_id = record.get("id")
    return RawEmail(
        id=email_id or (str(record_id) if record_id else _message_id(raw_bytes, MessageFormat.JSONL_RECORD)),
        headers=headers,
        body_parts=parts,
    )


def parse_email(
    raw_bytes: bytes,
    format: MessageFormat | str = MessageFormat.RFC822,
    email_id: str | None = None,
) -> RawEmail:
    """Parse one message into headers and decoded leaf parts.

    Args:
        raw_bytes: The message as stored on disk
        format: ``rfc822`` or ``jsonl_record``
        email_id: Explicit id; derived from the content hash when omitted

    Returns:
        RawEmail with one BodyPart per non-empty leaf part

    Raises:
        UnparseableMessage: If the bytes are empty or have no header/body separator
        UnsupportedFormat: If the format is unknown
    """
    try:
        fmt = MessageFormat(format)
    except ValueError as exc:
        raise UnsupportedFormat(f"unknown message format {format!r}") from exc
    if not raw_bytes:
        raise UnparseableMessage("empty message")

    if fmt is MessageFormat.RFC822:
        return _parse_rfc822(raw_bytes, email_id)
    return _parse_jsonl_record(raw_bytes, email_id)


def decode_part(part: BodyPart) -> str:
    """Decode a part with its declared charset, then UTF-8, then Latin-1."""
    for charset in (part.charset, "utf-8"):
        if not charset:
            continue
        try:
            return part.content.decode(charset)
        except (UnicodeDecodeError, LookupError):
            continue
    logger.debug("falling back to latin-1 for %s part (declared %r)", part.content_type, part.charset)
    return part.content.decode("latin-1", errors="replace")


def _collapse(chunk: str) -> str:
    return " ".join(chunk.split())


def _strip_once(html: str) -> str:
    soup = BeautifulSoup(html, "html.parser")
    for element in soup.find_all(HIDDEN_TAGS):
        element.decompose()
    for comment in soup.find_all(string=lambda s: isinstance(s, Comment)):
        comment.extract()
    for element in soup.find_all(BLOCK_TAGS):
        element.insert_before(_BLOCK_MARK)
        element.insert_after(_BLOCK_MARK)

    text = soup.get_text()
    blocks = []
    for block in text.split(_BLOCK_MARK):
        for paragraph in _BLANK_LINE.split(block):
            collapsed = _collapse(paragraph)
            if collapsed:
                blocks.append(collapsed)
    return "\n\n".join(blocks)


def strip_html(html: str) -> str:
    """Convert HTML to plain text.

    Drops script/style/head content, decodes entities, collapses whitespace
    inside each block to single spaces and separates blocks with one blank
    line so that sentence segmentation never glues two blocks together.
    Passes repeat until the text is stable, since decoded entities such as
    ``&lt;p&gt;`` can spell out further markup; the result is a fixed point.

    Args:
        html: HTML source, possibly malformed

    Returns:
        Plain text without tags
    """
    text = _strip_once(html)
    while True:
        again = _strip_once(text)
        if again == text:
            return text
        text = again


def _select_text(email_msg: RawEmail) -> str:
    plain = [p for p in email_msg.body_parts if p.content_type == "text/plain"]
    for part in plain:
        text = decode_part(part)
        if text.strip():
            return strip_html(text) if _MARKUP.search(text) else text

    for part in email_msg.body_parts:
        if part.content_type == "text/html":
            text = strip_html(decode_part(part))
            if text.strip():
                return text

    others = [
        decode_part(p)
        for p in email_msg.body_parts
        if p.content_type.startswith("text/") and p.content_type not in ("text/plain", "text/html")
    ]
    return "\n\n".join(t for t in others if t.strip())


def extract_body(email_msg: RawEmail) -> EmailBody:
    """Select the readable body of an email and split it into sentences.

    Preference order: text/plain, then stripped text/html, then the
    concatenation of any other text parts.

    Raises:
        EmptyBody: If no part yields text with at least one token
    """
    text = _select_text(email_msg).replace("\r\n", "\n").replace("\r", "\n").strip()
    sentences = segment_sentences(text)
    if not sentences:
        raise EmptyBody(f"email {email_msg.id} has no textual content")

    subject = email_msg.get_header("Subject", "") or ""
    return EmailBody.from_sentences(text, sentences, subject=subject)
