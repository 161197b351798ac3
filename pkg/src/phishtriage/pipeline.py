"""Per-email analyzer wiring ingest, the three branches and the aggregator."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Iterator
from concurrent.futures import Future, ThreadPoolExecutor

from phishtriage.backend.client import BackendClient
from phishtriage.backend.remote import RemoteIntentBackend, RemoteSummarizer, RemoteTriggerBackend
from phishtriage.config import RunConfig
from phishtriage.errors import PhishTriageError
from phishtriage.ingest.corpus import CorpusEntry, CorpusReader
from phishtriage.ingest.parser import extract_body, parse_email
from phishtriage.intents.rules import load_registry, load_rules
from phishtriage.intents.tagger import IntentBackend, RuleBackend, collect_spans
from phishtriage.models import (
    CorpusBaseline,
    EmailBody,
    LengthPolicy,
    MessageFormat,
    PhishReport,
    RawEmail,
    ReportMeta,
    TagRegistry,
)
from phishtriage.report.aggregator import aggregate
from phishtriage.summarize.summarizer import CentralitySummarizer, SummarizerBackend, summarize
from phishtriage.triggers.classifier import LexiconBackend, TriggerBackend, classify_body
from phishtriage.triggers.lexicon import load_lexicon
from phishtriage.triggers.profile import DEFAULT_Z_SPIKE, compute_profile, load_baseline

logger = logging.getLogger(__name__)


class Analyzer:
    """Turns one email into a PhishReport using a fixed set of backends.

    Reference backends are reentrant and an external client is thread-safe,
    so one Analyzer may serve a batch worker pool.
    """

    def __init__(
        self,
        summarizer: SummarizerBackend,
        trigger_backend: TriggerBackend,
        intent_backend: IntentBackend,
        registry: TagRegistry,
        baseline: CorpusBaseline,
        meta: ReportMeta,
        client: BackendClient | None = None,
    ):
        self.summarizer = summarizer
        self.trigger_backend = trigger_backend
        self.intent_backend = intent_backend
        self.registry = registry
        self.baseline = baseline
        self.meta = meta
        self.client = client

    @property
    def policy(self) -> LengthPolicy:
        return self.meta.policy

    @classmethod
    def from_config(cls, config: RunConfig | None = None) -> Analyzer:
        """Build the backends a run config selects.

        External pipelines share one BackendClient opened on the configured
        transport.

        Raises:
            InvalidPolicy: If the length policy is invalid
            InvalidDataFile: If a lexicon, rule, registry or baseline file is malformed
            BackendUnavailable: If the external backend cannot be reached
        """
        config = config or RunConfig()
        policy = config.length_policy()

        lexicon = load_lexicon(config.lexicon_path)
        rules = load_rules(config.rules_path)
        registry = load_registry(config.registry_path)
        baseline = load_baseline(config.baseline_path)

        client = None
        if config.uses_external:
            client = BackendClient.connect(config.transport, timeout=config.backend_timeout)

        try:
            summarizer: SummarizerBackend = (
                RemoteSummarizer(client)
                if config.summarizer_backend == "external"
                else CentralitySummarizer(config.stopwords_path)
            )
            trigger_backend: TriggerBackend = (
                RemoteTriggerBackend(client)
                if config.trigger_backend == "external"
                else LexiconBackend(lexicon)
            )
            intent_backend: IntentBackend = (
                RemoteIntentBackend(client, registry, config.intent_confidence_cutoff)
                if config.intent_backend == "external"
                else RuleBackend(rules, registry)
            )
        except PhishTriageError:
            if client is not None:
                client.close()
            raise

        meta = ReportMeta(
            policy=policy,
            backends={
                "summarizer": summarizer.backend_id,
                "triggers": trigger_backend.backend_id,
                "intents": intent_backend.backend_id,
            },
            lexicon_version=lexicon.version,
            rules_version=rules.version,
            registry_version=registry.version,
            baseline_label=baseline.corpus_label,
            z_spike=config.z_spike,
            confidence_cutoff=config.intent_confidence_cutoff,
        )
        return cls(summarizer, trigger_backend, intent_backend, registry, baseline, meta, client)

    @classmethod
    def reference(cls, policy: LengthPolicy | None = None, z_spike: float = DEFAULT_Z_SPIKE) -> Analyzer:
        """Analyzer over the bundled data and reference backends."""
        config = RunConfig(z_spike=z_spike)
        analyzer = cls.from_config(config)
        if policy is not None:
            analyzer.meta.policy = policy
        return analyzer

    def analyze(
        self,
        message: bytes | RawEmail,
        input_format: MessageFormat | str = MessageFormat.RFC822,
    ) -> tuple[PhishReport, EmailBody]:
        """Analyze one email.

        Args:
            message: Raw message bytes or an already parsed RawEmail
            input_format: Format of ``message`` when it is bytes

        Returns:
            The report and the body it indexes into (needed for HTML output)

        Raises:
            UnparseableMessage: If the bytes cannot be parsed
            EmptyBody: If the email has no textual content
            BackendFailure: If a backend fails or breaks its contract
        """
        email_msg = message if isinstance(message, RawEmail) else parse_email(message, input_format)
        body = extract_body(email_msg)

        summary = summarize(body, self.policy, self.summarizer)
        distributions = classify_body(body, self.trigger_backend)
        profile = compute_profile(distributions, self.baseline, self.meta.z_spike)
        spans = collect_spans(body, self.intent_backend, self.registry)

        report = aggregate(body, summary, profile, spans, self.meta, email_id=email_msg.id)
        logger.debug(
            "analyzed %s: %d sentences, %d spikes, %d spans",
            email_msg.id, len(body.sentences), len(profile.spikes), len(spans),
        )
        return report, body

    def analyze_entry(self, entry: CorpusEntry) -> tuple[PhishReport | None, PhishTriageError | None]:
        """Analyze one corpus slot, returning the report or the error that stopped it."""
        if entry.error is not None:
            return None, entry.error
        try:
            report, _ = self.analyze(entry.email)
        except PhishTriageError as exc:
            logger.warning("failed %s: %s", entry.email_id, exc)
            return None, exc
        return report, None

    def analyze_entries(
        self, entries: Iterable[CorpusEntry], jobs: int = 1
    ) -> Iterator[tuple[CorpusEntry, PhishReport | None, PhishTriageError | None]]:
        """Analyze corpus slots on a thread pool, yielding outcomes in corpus order.

        At most ``2 * jobs`` slots are in flight at any time.
        """
        window: deque[tuple[CorpusEntry, Future]] = deque()
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for entry in entries:
                window.append((entry, pool.submit(self.analyze_entry, entry)))
                if len(window) >= 2 * jobs:
                    done, future = window.popleft()
                    yield (done, *future.result())
            while window:
                done, future = window.popleft()
                yield (done, *future.result())

    def iter_bodies(self, corpus: CorpusReader) -> Iterator[EmailBody]:
        """Bodies of a corpus, skipping emails without text."""
        for email_msg in corpus:
            try:
                yield extract_body(email_msg)
            except PhishTriageError as exc:
                corpus.empty_body_count += 1
                logger.warning("skipping %s: %s", email_msg.id, exc)

    def close(self) -> None:
        if self.client is not None:
            self.client.close()
            self.client = None

    def __enter__(self) -> Analyzer:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
