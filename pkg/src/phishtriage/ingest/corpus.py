"""Streaming corpus readers and seeded sampling."""

from __future__ import annotations

import logging
import random
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import TypeVar

from phishtriage.errors import CorpusNotFound, PhishTriageError, UnsupportedFormat
from phishtriage.ingest.parser import parse_email
from phishtriage.models import CorpusFormat, MessageFormat, RawEmail

logger = logging.getLogger(__name__)

T = TypeVar("T")

_FROM_QUOTED = re.compile(rb"^>+From ")


@dataclass
class CorpusEntry:
    """One message slot of a corpus: either a parsed email or the reason it was skipped."""

    email_id: str
    email: RawEmail | None = None
    error: PhishTriageError | None = None

    @property
    def ok(self) -> bool:
        return self.email is not None


def _unquote_from(line: bytes) -> bytes:
    # mboxrd: ">From " -> "From ", ">>From " -> ">From "
    if _FROM_QUOTED.match(line):
        return line[1:]
    return line


def _iter_mbox(path: Path) -> Iterator[tuple[str, bytes]]:
    ordinal = 0
    lines: list[bytes] | None = None
    with path.open("rb") as handle:
        for line in handle:
            if line.startswith(b"From "):
                if lines is not None:
                    yield f"mbox:{ordinal}", b"".join(lines)
                    ordinal += 1
                lines = []
                continue
            if lines is None:
                # Preamble before the first envelope line
                continue
            lines.append(_unquote_from(line))
    if lines is not None:
        yield f"mbox:{ordinal}", b"".join(lines)


def _iter_eml_dir(path: Path) -> Iterator[tuple[str, bytes]]:
    for file in sorted(p for p in path.iterdir() if p.is_file()):
        yield f"eml_dir:{file.name}", file.read_bytes()


def _iter_jsonl(path: Path) -> Iterator[tuple[str, bytes]]:
    ordinal = 0
    with path.open("rb") as handle:
        for line in handle:
            if not line.strip():
                continue
            yield f"jsonl:{ordinal}", line.rstrip(b"\r\n")
            ordinal += 1


class CorpusReader:
    """Single-pass stream over a corpus on disk.

    Iterating yields RawEmails; malformed messages are logged, counted in
    ``skipped_count`` and skipped. ``entries()`` yields every message slot,
    including the skipped ones, in corpus order.
    ``empty_body_count`` is kept by consumers that drop parsed emails without
    text; those emails stay counted in ``yielded_count``.
    """

    def __init__(self, path: Path, format: CorpusFormat):
        self.path = path
        self.format = format
        self.skipped_count = 0
        self.yielded_count = 0
        self.empty_body_count = 0

    @property
    def message_count(self) -> int:
        return self.skipped_count + self.yielded_count

    def _raw_messages(self) -> Iterator[tuple[str, bytes]]:
        if self.format is CorpusFormat.MBOX:
            return _iter_mbox(self.path)
        if self.format is CorpusFormat.EML_DIR:
            return _iter_eml_dir(self.path)
        return _iter_jsonl(self.path)

    def entries(self) -> Iterator[CorpusEntry]:
        message_format = (
            MessageFormat.JSONL_RECORD if self.format is CorpusFormat.JSONL else MessageFormat.RFC822
        )
        for email_id, raw in self._raw_messages():
            try:
                email_msg = parse_email(raw, message_format, email_id=email_id)
            except PhishTriageError as exc:
                self.skipped_count += 1
                logger.warning("skipping %s: %s", email_id, exc)
                yield CorpusEntry(email_id=email_id, error=exc)
                continue
            self.yielded_count += 1
            yield CorpusEntry(email_id=email_id, email=email_msg)

    def __iter__(self) -> Iterator[RawEmail]:
        for entry in self.entries():
            if entry.email is not None:
                yield entry.email


def load_corpus(path: str | Path, format: CorpusFormat | str) -> CorpusReader:
    """Open a corpus for streaming.

    Args:
        path: mbox file, directory of .eml files, or JSONL file
        format: ``mbox``, ``eml_dir`` or ``jsonl``

    Returns:
        A CorpusReader; nothing is read until it is iterated

    Raises:
        CorpusNotFound: If the path does not exist or has the wrong kind
        UnsupportedFormat: If the format is unknown
    """
    try:
        fmt = CorpusFormat(format)
    except ValueError as exc:
        raise UnsupportedFormat(f"unknown corpus format {format!r}") from exc

    corpus_path = Path(path)
    if not corpus_path.exists():
        raise CorpusNotFound(f"corpus not found: {corpus_path}")
    if fmt is CorpusFormat.EML_DIR and not corpus_path.is_dir():
        raise CorpusNotFound(f"eml_dir corpus must be a directory: {corpus_path}")
    if fmt is not CorpusFormat.EML_DIR and not corpus_path.is_file():
        raise CorpusNotFound(f"{fmt.value} corpus must be a file: {corpus_path}")
    return CorpusReader(corpus_path, fmt)


def sample_corpus(corpus: Iterable[T], n: int, seed: int) -> list[T]:
    """Uniform reservoir sample of ``min(n, len(corpus))`` items.

    Deterministic for a given corpus order, ``n`` and ``seed``. The result
    keeps the corpus order of the sampled items.
    """
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")

    rng = random.Random(seed)
    reservoir: list[tuple[int, T]] = []
    for index, item in enumerate(corpus):
        if index < n:
            reservoir.append((index, item))
            continue
        slot = rng.randint(0, index)
        if slot < n:
            reservoir[slot] = (index, item)

    reservoir.sort(key=lambda pair: pair[0])
    return [item for _, item in reservoir]
