"""Shared pytest fixtures for phishtriage tests."""

from __future__ import annotations

import json
import shlex
import sys
from collections.abc import Callable
from pathlib import Path

import pytest

from phishtriage.ingest.parser import extract_body, parse_email
from phishtriage.ingest.segment import segment_sentences
from phishtriage.models import EmailBody
from phishtriage.pipeline import Analyzer

FIXTURES = Path(__file__).parent / "fixtures"
MOCK_BACKEND = FIXTURES / "mock_backend.py"

BENIGN_SENTENCES = [
    "The quarterly planning meeting moves to Thursday afternoon.",
    "Please bring your notes on the garden project.",
    "Lunch will be pizza and salad in the small kitchen.",
    "The printer on the second floor works again.",
    "Thanks for the photos from the trip.",
    "Our new colleagues start on Monday.",
    "The library closes early because of the holiday.",
    "Remember the team dinner next week.",
]

PHISHING_SENTENCES = [
    "Dear customer, we were unable to verify your account details.",
    "Your account will be suspended if it is not verified within 24 hours.",
    "Click the link to verify your account within 24 hours.",
    "Use the secure link in this message to avoid any interruption.",
    "Thank you for your cooperation, Customer Support Team.",
]


def corpus_message(index: int) -> bytes:
    """Deterministic test email; every fifth one is phishing."""
    if index % 5 == 0:
        sentences = PHISHING_SENTENCES
    else:
        start = index % len(BENIGN_SENTENCES)
        sentences = [BENIGN_SENTENCES[(start + k) % len(BENIGN_SENTENCES)] for k in range(3)]
    text = (
        f"From: sender{index}@example.org\n"
        f"To: reader@example.org\n"
        f"Subject: Note {index}\n"
        f"Message-ID: <{index}@corpus.example>\n"
        "Content-Type: text/plain; charset=utf-8\n"
        "\n" + "\n".join(sentences) + "\n"
    )
    return text.encode("utf-8")


def write_mbox(path: Path, messages: list[bytes]) -> Path:
    """Write messages as an mbox; an empty message stands for a malformed slot."""
    with path.open("wb") as handle:
        for message in messages:
            handle.write(b"From sender@example.org Mon Oct  5 09:00:00 2026\n")
            if message:
                handle.write(message + b"\n")
    return path


@pytest.fixture
def phishing_bytes() -> bytes:
    """Raw bytes of the bundled phishing fixture."""
    return (FIXTURES / "phishing.eml").read_bytes()


@pytest.fixture
def benign_bytes() -> bytes:
    """Raw bytes of the bundled benign fixture."""
    return (FIXTURES / "benign.eml").read_bytes()


@pytest.fixture
def phishing_body(phishing_bytes: bytes) -> EmailBody:
    """Cleaned body of the phishing fixture (5 sentences, 52 tokens)."""
    return extract_body(parse_email(phishing_bytes))


@pytest.fixture
def benign_body(benign_bytes: bytes) -> EmailBody:
    """Cleaned body of the benign fixture."""
    return extract_body(parse_email(benign_bytes))


@pytest.fixture
def make_body() -> Callable[[str], EmailBody]:
    """Factory building an EmailBody straight from plain text."""

    def _make(text: str) -> EmailBody:
        return EmailBody.from_sentences(text, segment_sentences(text))

    return _make


@pytest.fixture
def analyzer():
    """Reference analyzer over the bundled data files."""
    with Analyzer.reference() as instance:
        yield instance


@pytest.fixture
def corpus_messages() -> list[bytes]:
    """Fifty deterministic emails, ten of them phishing."""
    return [corpus_message(i) for i in range(50)]


@pytest.fixture
def mbox_corpus(tmp_path: Path, corpus_messages: list[bytes]) -> Path:
    """The fifty-email corpus as an mbox file."""
    return write_mbox(tmp_path / "corpus.mbox", corpus_messages)


@pytest.fixture
def mbox_with_malformed(tmp_path: Path, corpus_messages: list[bytes]) -> Path:
    """Fifty slots, the fourth of which is an empty message."""
    messages = list(corpus_messages)
    messages[3] = b""
    return write_mbox(tmp_path / "malformed.mbox", messages)


@pytest.fixture
def eml_dir_corpus(tmp_path: Path, corpus_messages: list[bytes]) -> Path:
    """The first ten emails as files of a directory."""
    directory = tmp_path / "eml"
    directory.mkdir()
    for i, message in enumerate(corpus_messages[:10]):
        (directory / f"{i:03d}.eml").write_bytes(message)
    return directory


@pytest.fixture
def jsonl_corpus(tmp_path: Path) -> Path:
    """Three JSON records and one broken line."""
    records = [
        {"id": "a", "headers": {"Subject": "First"}, "body": " ".join(BENIGN_SENTENCES[:2])},
        {"id": "b", "headers": {"Subject": "Second"}, "body": " ".join(PHISHING_SENTENCES)},
    ]
    lines = [json.dumps(r) for r in records]
    lines.insert(1, "this is not json")
    lines.append(json.dumps({"body": BENIGN_SENTENCES[4]}))
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + "\n\n", encoding="utf-8")
    return path


@pytest.fixture
def mock_transport() -> Callable[[str], str]:
    """Factory for a ``stdio:`` transport running the mock backend in a mode."""

    def _transport(mode: str = "echo") -> str:
        return "stdio:" + shlex.join([sys.executable, str(MOCK_BACKEND), mode])

    return _transport
