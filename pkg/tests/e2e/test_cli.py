"""End-to-end tests driving the command line through main()."""

from __future__ import annotations

import io
import json
import logging
from collections.abc import Callable, Iterator
from pathlib import Path

import pytest

from phishtriage.main import main
from tests.conftest import corpus_message, write_mbox

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(autouse=True)
def restore_logging() -> Iterator[None]:
    """main() reconfigures the root logger; put it back after each test."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def summary_line(err: str) -> dict:
    return json.loads(err.strip().splitlines()[-1])


class TestAnalyze:
    """Tests for the analyze command."""

    def test_json_report(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["analyze", str(FIXTURES / "phishing.eml")]) == 0
        out = capsys.readouterr().out
        assert out.endswith("\n")
        report = json.loads(out)
        assert report["triggers"]["spikes"] == ["Scarcity"]
        assert len(report["intents"]["spans"]) == 3

    def test_text_report(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["analyze", str(FIXTURES / "benign.eml"), "--format", "text"]) == 0
        assert "Advisory: no spikes or intent cues detected" in capsys.readouterr().out

    def test_html_to_file(self, tmp_path: Path) -> None:
        target = tmp_path / "report.html"
        assert main(["analyze", str(FIXTURES / "phishing.eml"), "--format", "html", "--output", str(target)]) == 0
        assert '<mark class="intent" data-tag="click_link">' in target.read_text(encoding="utf-8")

    def test_stdin(self, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]) -> None:
        data = (FIXTURES / "phishing.eml").read_bytes()
        monkeypatch.setattr("sys.stdin", io.TextIOWrapper(io.BytesIO(data)))
        assert main(["analyze"]) == 0
        assert json.loads(capsys.readouterr().out)["summary"]["selected"] == [2]

    def test_jsonl_record(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = tmp_path / "record.json"
        path.write_text(json.dumps({"id": "r7", "body": "Click here to pay the invoice fee."}), encoding="utf-8")
        assert main(["analyze", str(path), "--input-format", "jsonl_record"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["email_id"] == "r7"
        assert report["intents"]["tag_counts"] == {"click_link": 1, "make_payment": 1}

    def test_same_input_same_bytes(self, capsys: pytest.CaptureFixture[str]) -> None:
        main(["analyze", str(FIXTURES / "phishing.eml")])
        first = capsys.readouterr().out
        main(["analyze", str(FIXTURES / "phishing.eml")])
        assert capsys.readouterr().out == first

    def test_empty_body_exits_2(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["analyze", str(FIXTURES / "headers_only.eml")]) == 2
        assert "empty_body" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path: Path) -> None:
        assert main(["analyze", str(tmp_path / "nope.eml")]) == 2

    def test_invalid_config_exits_2(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["analyze", str(FIXTURES / "phishing.eml"), "--backend-trig", "external"]) == 2
        assert "invalid_config" in capsys.readouterr().err

    def test_unreachable_backend_exits_3(self) -> None:
        argv = ["analyze", str(FIXTURES / "phishing.eml"), "--backend-trig", "external",
                "--transport", "tcp:127.0.0.1:1", "--timeout", "2"]
        assert main(argv) == 3

    def test_backend_violation_exits_3(self, mock_transport: Callable[[str], str]) -> None:
        argv = ["analyze", str(FIXTURES / "phishing.eml"), "--backend-trig", "external",
                "--transport", mock_transport("bad_sum")]
        assert main(argv) == 3

    def test_config_file(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"policy": "words25", "output_format": "text"}), encoding="utf-8")
        assert main(["analyze", str(FIXTURES / "phishing.eml"), "--config", str(config)]) == 0
        assert "budget 25" in capsys.readouterr().out


class TestBatch:
    """Tests for the batch command."""

    def test_jobs_do_not_change_output(self, tmp_path: Path, mbox_corpus: Path,
                                       capsys: pytest.CaptureFixture[str]) -> None:
        one, four = tmp_path / "one.jsonl", tmp_path / "four.jsonl"
        assert main(["batch", str(mbox_corpus), "--jobs", "1", "--output", str(one)]) == 0
        stats = summary_line(capsys.readouterr().err)
        assert main(["batch", str(mbox_corpus), "--jobs", "4", "--output", str(four)]) == 0
        assert one.read_bytes() == four.read_bytes()
        lines = one.read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["email_id"] for line in lines] == [f"mbox:{i}" for i in range(50)]
        assert stats["processed"] == 50
        assert stats["skipped"] == 0
        assert stats["spiked"] >= 10

    def test_malformed_slot_becomes_error_record(self, mbox_with_malformed: Path,
                                                 capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["batch", str(mbox_with_malformed)]) == 0
        captured = capsys.readouterr()
        records = [json.loads(line) for line in captured.out.splitlines()]
        assert len(records) == 50
        assert records[3]["email_id"] == "mbox:3"
        assert records[3]["error"]["code"] == "unparseable_message"
        assert summary_line(captured.err)["skipped"] == 1

    def test_seeded_sample(self, mbox_corpus: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["batch", str(mbox_corpus), "--sample", "10", "--seed", "7"])
        first = capsys.readouterr().out
        main(["batch", str(mbox_corpus), "--sample", "10", "--seed", "7"])
        assert capsys.readouterr().out == first
        ids = [int(json.loads(line)["email_id"].split(":")[1]) for line in first.splitlines()]
        assert len(ids) == 10
        assert ids == sorted(ids)

    def test_eml_dir(self, eml_dir_corpus: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["batch", str(eml_dir_corpus), "--corpus-format", "eml_dir"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 10

    def test_backend_failures_exit_3(self, tmp_path: Path, mock_transport: Callable[[str], str],
                                     capsys: pytest.CaptureFixture[str]) -> None:
        corpus = write_mbox(tmp_path / "small.mbox", [corpus_message(i) for i in range(3)])
        argv = ["batch", str(corpus), "--backend-trig", "external", "--transport", mock_transport("bad_sum")]
        assert main(argv) == 3
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [r["error"]["code"] for r in records] == ["backend_violation"] * 3

    def test_missing_corpus_exits_2(self, tmp_path: Path) -> None:
        assert main(["batch", str(tmp_path / "none.mbox")]) == 2


class TestFitBaseline:
    """Tests for the fit-baseline command."""

    def test_rerun_is_byte_identical(self, tmp_path: Path, mbox_corpus: Path,
                                     capsys: pytest.CaptureFixture[str]) -> None:
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["fit-baseline", str(mbox_corpus), "--output", str(first), "--label", "fixture"]) == 0
        assert json.loads(capsys.readouterr().out) == {"corpus_label": "fixture", "n_emails": 50}
        assert main(["fit-baseline", str(mbox_corpus), "--output", str(second), "--label", "fixture"]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_fitted_baseline_is_usable(self, tmp_path: Path, mbox_corpus: Path,
                                       capsys: pytest.CaptureFixture[str]) -> None:
        baseline = tmp_path / "baseline.json"
        main(["fit-baseline", str(mbox_corpus), "--output", str(baseline), "--label", "fixture"])
        capsys.readouterr()
        assert main(["analyze", str(FIXTURES / "phishing.eml"), "--baseline", str(baseline)]) == 0
        assert json.loads(capsys.readouterr().out)["meta"]["baseline_label"] == "fixture"

    def test_single_email_corpus_exits_2(self, tmp_path: Path) -> None:
        corpus = write_mbox(tmp_path / "one.mbox", [corpus_message(1)])
        assert main(["fit-baseline", str(corpus), "--output", str(tmp_path / "b.json")]) == 2
        assert not (tmp_path / "b.json").exists()


class TestLabelSample:
    """Tests for the label-sample command."""

    def test_emits_unlabeled_sentences(self, mbox_corpus: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["label-sample", str(mbox_corpus), "-n", "3", "--seed", "1"]) == 0
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len({r["email_id"] for r in records}) == 3
        assert all(r["labels"] == [] and r["text"] for r in records)

    def test_small_corpus_emits_everything(self, eml_dir_corpus: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["label-sample", str(eml_dir_corpus), "--corpus-format", "eml_dir", "-n", "100"]) == 0
        captured = capsys.readouterr()
        assert len({json.loads(line)["email_id"] for line in captured.out.splitlines()}) == 10
        assert "only 10" in captured.err


class TestEvaluate:
    """Tests for the evaluate command."""

    def test_trigger_scores(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        labels = tmp_path / "labels.jsonl"
        records = [
            {"text": "Your manager has approved this; comply immediately", "labels": ["Authority"]},
            {"text": "Urgent: your mailbox will be suspended", "labels": ["Scarcity"]},
            {"text": "See you at lunch", "labels": ["None"]},
            {"text": "The director needs the report", "labels": ["Scarcity"]},
        ]
        labels.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
        assert main(["evaluate", str(labels), "--task", "triggers"]) == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["per_class"]["Authority"]["precision"] == 0.5
        assert metrics["per_class"]["Authority"]["recall"] == 1.0
        assert metrics["per_class"]["None"]["f1"] == 1.0

    def test_unknown_label_exits_2(self, tmp_path: Path) -> None:
        labels = tmp_path / "labels.jsonl"
        labels.write_text(json.dumps({"text": "hi", "labels": ["Greed"]}) + "\n", encoding="utf-8")
        assert main(["evaluate", str(labels), "--task", "triggers"]) == 2
