"""Tests for corpus readers and seeded sampling."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from phishtriage.errors import CorpusNotFound, UnsupportedFormat
from phishtriage.ingest.corpus import load_corpus, sample_corpus
from phishtriage.models import CorpusFormat


class TestLoadCorpus:
    """Tests for load_corpus and CorpusReader."""

    def test_mbox_yields_every_message_in_order(self, mbox_corpus: Path) -> None:
        emails = list(load_corpus(mbox_corpus, "mbox"))
        assert len(emails) == 50
        assert [e.id for e in emails[:3]] == ["mbox:0", "mbox:1", "mbox:2"]
        assert emails[7].get_header("Subject") == "Note 7"

    def test_mbox_skips_malformed(self, mbox_with_malformed: Path) -> None:
        """Malformed slots are counted and skipped, not fatal."""
        reader = load_corpus(mbox_with_malformed, CorpusFormat.MBOX)
        emails = list(reader)
        assert len(emails) == 49
        assert reader.skipped_count == 1
        assert reader.yielded_count == 49
        assert reader.message_count == 50

    def test_entries_keep_error_slots(self, mbox_with_malformed: Path) -> None:
        entries = list(load_corpus(mbox_with_malformed, "mbox").entries())
        assert len(entries) == 50
        assert not entries[3].ok
        assert entries[3].email_id == "mbox:3"
        assert entries[3].error.code == "unparseable_message"
        assert all(e.ok for i, e in enumerate(entries) if i != 3)

    def test_mbox_unquotes_from_lines(self, tmp_path: Path) -> None:
        path = tmp_path / "quoted.mbox"
        path.write_bytes(
            b"From a@example.org Mon Oct  5 09:00:00 2026\n"
            b"Subject: quoted\n\n"
            b">From the desk of the editor.\n"
            b">>From nested.\n"
        )
        (email_msg,) = list(load_corpus(path, "mbox"))
        assert email_msg.body_parts[0].content == b"From the desk of the editor.\n>From nested.\n"

    def test_eml_dir_sorted_by_name(self, eml_dir_corpus: Path) -> None:
        emails = list(load_corpus(eml_dir_corpus, "eml_dir"))
        assert [e.id for e in emails] == [f"eml_dir:{i:03d}.eml" for i in range(10)]

    def test_jsonl_skips_blank_and_broken_lines(self, jsonl_corpus: Path) -> None:
        reader = load_corpus(jsonl_corpus, "jsonl")
        emails = list(reader)
        assert len(emails) == 3
        assert reader.skipped_count == 1
        assert emails[0].get_header("Subject") == "First"

    def test_missing_path(self, tmp_path: Path) -> None:
        with pytest.raises(CorpusNotFound):
            load_corpus(tmp_path / "nope.mbox", "mbox")

    def test_wrong_kind_of_path(self, tmp_path: Path, mbox_corpus: Path) -> None:
        """eml_dir needs a directory, the others need a file."""
        with pytest.raises(CorpusNotFound):
            load_corpus(mbox_corpus, "eml_dir")
        with pytest.raises(CorpusNotFound):
            load_corpus(tmp_path, "jsonl")

    def test_unknown_format(self, mbox_corpus: Path) -> None:
        with pytest.raises(UnsupportedFormat):
            load_corpus(mbox_corpus, "maildir")


class TestSampleCorpus:
    """Tests for sample_corpus."""

    def test_deterministic_for_seed(self) -> None:
        items = list(range(100))
        assert sample_corpus(items, 10, seed=7) == sample_corpus(items, 10, seed=7)

    def test_keeps_corpus_order(self) -> None:
        sample = sample_corpus(range(100), 10, seed=3)
        assert len(sample) == 10
        assert sample == sorted(sample)
        assert len(set(sample)) == 10

    def test_different_seeds_differ(self) -> None:
        samples = {tuple(sample_corpus(range(1000), 5, seed=s)) for s in range(5)}
        assert len(samples) > 1

    def test_n_larger_than_corpus_returns_everything(self) -> None:
        assert sample_corpus(["a", "b", "c"], 10, seed=0) == ["a", "b", "c"]

    def test_n_must_be_positive(self) -> None:
        with pytest.raises(ValueError):
            sample_corpus([1, 2], 0, seed=0)

    def test_roughly_uniform(self) -> None:
        """Every item is drawn with probability close to n / N."""
        counts = [0] * 20
        rng = random.Random(11)
        trials = 2000
        for _ in range(trials):
            for item in sample_corpus(range(20), 5, seed=rng.randrange(2**32)):
                counts[item] += 1
        expected = trials * 5 / 20
        assert all(abs(c - expected) < expected * 0.2 for c in counts)

    def test_streams_a_corpus_reader(self, mbox_corpus: Path) -> None:
        first = [e.id for e in sample_corpus(load_corpus(mbox_corpus, "mbox"), 10, seed=7)]
        second = [e.id for e in sample_corpus(load_corpus(mbox_corpus, "mbox"), 10, seed=7)]
        assert first == second
        assert len(first) == 10
