"""Command-line entry point: analyze, batch, fit-baseline, label-sample, evaluate."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, BinaryIO

from phishtriage import canonical
from phishtriage.config import RunConfig, load_config
from phishtriage.errors import BackendFailure, PhishTriageError
from phishtriage.evaluate.metrics import evaluate_classification, load_labels, run_backend_on_labels, task_labels
from phishtriage.ingest.corpus import CorpusEntry, load_corpus, sample_corpus
from phishtriage.ingest.parser import extract_body
from phishtriage.models import CorpusFormat, EvaluationTask, MessageFormat
from phishtriage.pipeline import Analyzer
from phishtriage.report.formatter import render_json, render_text
from phishtriage.report.html import render_html
from phishtriage.summarize.budget import PRESET_POLICIES
from phishtriage.triggers.profile import fit_baseline, save_baseline

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# CLI flag -> RunConfig field
CONFIG_FLAGS = {
    "backend_summ": "summarizer_backend",
    "backend_trig": "trigger_backend",
    "backend_intent": "intent_backend",
    "transport": "transport",
    "timeout": "backend_timeout",
    "policy": "policy",
    "policy_cap": "policy_cap",
    "policy_fraction": "policy_fraction",
    "z_spike": "z_spike",
    "confidence_cutoff": "intent_confidence_cutoff",
    "stopwords": "stopwords_path",
    "lexicon": "lexicon_path",
    "rules": "rules_path",
    "registry": "registry_path",
    "baseline": "baseline_path",
    "format": "output_format",
    "seed": "seed",
    "jobs": "jobs",
    "sample": "sample",
    "log_level": "log_level",
}


def configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run options")
    group.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    group.add_argument("--backend-summ", choices=["reference", "external"])
    group.add_argument("--backend-trig", choices=["reference", "external"])
    group.add_argument("--backend-intent", choices=["reference", "external"])
    group.add_argument("--transport", help="stdio:<command> or tcp:<host>:<port>")
    group.add_argument("--timeout", type=float, help="seconds to wait for each backend reply")
    group.add_argument("--policy", choices=sorted(PRESET_POLICIES), help="named length preset")
    group.add_argument("--policy-cap", type=int, help="hard cap on summary words")
    group.add_argument("--policy-fraction", help="summary fraction of the body, e.g. 1/5 or 0.2")
    group.add_argument("--z-spike", type=float, help="z-score at which a trigger spikes")
    group.add_argument("--confidence-cutoff", type=float, help="minimum confidence of external intent spans")
    group.add_argument("--stopwords", type=Path)
    group.add_argument("--lexicon", type=Path)
    group.add_argument("--rules", type=Path)
    group.add_argument("--registry", type=Path)
    group.add_argument("--baseline", type=Path)
    group.add_argument("--seed", type=int)
    group.add_argument("--log-level", help="DEBUG, INFO, WARNING (default) or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phishtriage",
        description="Summarize emails and highlight persuasion triggers and requested actions.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="analyze one email")
    analyze.add_argument("email", nargs="?", default="-", help="email file, or - for stdin")
    analyze.add_argument("--input-format", choices=[f.value for f in MessageFormat], default="rfc822")
    analyze.add_argument("--format", choices=["json", "text", "html"])
    analyze.add_argument("--output", type=Path, help="write the report here instead of stdout")
    _add_run_options(analyze)

    batch = commands.add_parser("batch", help="analyze every email of a corpus as JSONL")
    batch.add_argument("corpus", type=Path)
    batch.add_argument("--corpus-format", choices=[f.value for f in CorpusFormat], default="mbox")
    batch.add_argument("--sample", type=int, help="analyze a seeded random sample of this size")
    batch.add_argument("--jobs", type=int, help="worker threads (default 1)")
    batch.add_argument("--output", type=Path)
    _add_run_options(batch)

    fit = commands.add_parser("fit-baseline", help="fit trigger statistics over a benign corpus")
    fit.add_argument("corpus", type=Path)
    fit.add_argument("--corpus-format", choices=[f.value for f in CorpusFormat], default="mbox")
    fit.add_argument("--output", type=Path, required=True, help="baseline JSON file to write")
    fit.add_argument("--label", default="custom", help="corpus label stored in the baseline")
    _add_run_options(fit)

    label = commands.add_parser("label-sample", help="emit sampled sentences for manual labeling")
    label.add_argument("corpus", type=Path)
    label.add_argument("--corpus-format", choices=[f.value for f in CorpusFormat], default="mbox")
    label.add_argument("-n", "--sample", type=int, required=True, help="number of emails")
    label.add_argument("--output", type=Path)
    _add_run_options(label)

    evaluate = commands.add_parser("evaluate", help="score a backend against labeled sentences")
    evaluate.add_argument("labels", type=Path)
    evaluate.add_argument("--task", choices=[t.value for t in EvaluationTask], required=True)
    evaluate.add_argument("--output", type=Path)
    _add_run_options(evaluate)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {field: getattr(args, flag, None) for flag, field in CONFIG_FLAGS.items()}
    return load_config(args.config, overrides)


def _open_output(path: Path | None) -> BinaryIO:
    if path is None:
        return sys.stdout.buffer
    return path.open("wb")


def _write(path: Path | None, data: bytes) -> None:
    out = _open_output(path)
    try:
        out.write(data)
        out.flush()
    finally:
        if path is not None:
            out.close()


def _read_input(source: str) -> bytes:
    if source == "-":
        return sys.stdin.buffer.read()
    return Path(source).read_bytes()


def _error_record(email_id: str, exc: PhishTriageError) -> dict[str, Any]:
    return {"email_id": email_id, "error": {"code": exc.code, "message": str(exc)}}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args: argparse.Namespace, config: RunConfig) -> int:
    raw = _read_input(args.email)

    with Analyzer.from_config(config) as analyzer:
        report, body = analyzer.analyze(raw, args.input_format)

    if config.output_format == "text":
        data = render_text(report).encode("utf-8") + b"\n"
    elif config.output_format == "html":
        data = render_html(report, body).encode("utf-8")
    else:
        data = render_json(report) + b"\n"
    _write(args.output, data)
    return 0


def cmd_batch(args: argparse.Namespace, config: RunConfig) -> int:
    corpus = load_corpus(args.corpus, args.corpus_format)
    entries: Iterable[CorpusEntry] = corpus.entries()
    if config.sample is not None:
        entries = sample_corpus(entries, config.sample, config.seed)

    processed = skipped = spiked = 0
    backend_failed = False
    with Analyzer.from_config(config) as analyzer:
        out = _open_output(args.output)
        try:
            for entry, report, error in analyzer.analyze_entries(entries, config.jobs):
                if error is not None:
                    skipped += 1
                    backend_failed = backend_failed or isinstance(error, BackendFailure)
                    out.write(canonical.dump_bytes(_error_record(entry.email_id, error)) + b"\n")
                    continue
                processed += 1
                if report.trigger_profile.spikes:
                    spiked += 1
                out.write(render_json(report) + b"\n")
            out.flush()
        finally:
            if args.output is not None:
                out.close()

    sys.stderr.write(canonical.dumps({"processed": processed, "skipped": skipped, "spiked": spiked}) + "\n")
    return 3 if backend_failed else 0


def cmd_fit_baseline(args: argparse.Namespace, config: RunConfig) -> int:
    corpus = load_corpus(args.corpus, args.corpus_format)
    with Analyzer.from_config(config) as analyzer:
        baseline = fit_baseline(analyzer.iter_bodies(corpus), analyzer.trigger_backend, corpus_label=args.label)
    save_baseline(baseline, args.output)
    sys.stdout.write(canonical.dumps({"corpus_label": baseline.corpus_label, "n_emails": baseline.n_emails}) + "\n")
    return 0


def cmd_label_sample(args: argparse.Namespace, config: RunConfig) -> int:
    corpus = load_corpus(args.corpus, args.corpus_format)
    sampled = sample_corpus(corpus, config.sample, config.seed)
    if len(sampled) < config.sample:
        logger.warning("asked for %d emails but the corpus has only %d; emitting all of them",
                       config.sample, len(sampled))

    lines = []
    for email_msg in sampled:
        try:
            body = extract_body(email_msg)
        except PhishTriageError as exc:
            logger.warning("skipping %s: %s", email_msg.id, exc)
            continue
        for sentence in body.sentences:
            record = {
                "email_id": email_msg.id,
                "sentence_index": sentence.index,
                "text": body.sentence_text(sentence.index),
                "labels": [],
            }
            lines.append(canonical.dump_bytes(record) + b"\n")
    _write(args.output, b"".join(lines))
    return 0


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    task = EvaluationTask(args.task)
    with Analyzer.from_config(config) as analyzer:
        examples = load_labels(args.labels, task, analyzer.registry)
        backend = analyzer.trigger_backend if task is EvaluationTask.TRIGGERS else analyzer.intent_backend
        filled = run_backend_on_labels(examples, backend, task, analyzer.registry)
    metrics = evaluate_classification(filled, task_labels(task, analyzer.registry))
    _write(args.output, canonical.dump_bytes(metrics.to_dict()) + b"\n")
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "batch": cmd_batch,
    "fit-baseline": cmd_fit_baseline,
    "label-sample": cmd_label_sample,
    "evaluate": cmd_evaluate,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code: 0 ok, 2 input error, 3 backend error."""
    args = build_parser().parse_args(argv)
    configure_logging("WARNING")
    try:
        config = config_from_args(args)
        configure_logging(config.log_level)
        return COMMANDS[args.command](args, config)
    except PhishTriageError as exc:
        logger.error("%s: %s", exc.code, exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
