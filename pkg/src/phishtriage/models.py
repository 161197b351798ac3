"""Data models for phishtriage."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from phishtriage.errors import InvalidPolicy, UnknownLabel


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------


class MessageFormat(Enum):
    """Encodings accepted by ``parse_email``."""

    RFC822 = "rfc822"
    JSONL_RECORD = "jsonl_record"


class CorpusFormat(Enum):
    """On-disk corpus layouts accepted by ``load_corpus``."""

    MBOX = "mbox"
    EML_DIR = "eml_dir"
    JSONL = "jsonl"


@dataclass(frozen=True)
class BodyPart:
    """One decoded leaf part of a message."""

    content_type: str  # e.g., "text/plain"
    content: bytes  # transfer-decoded payload
    charset: str = ""  # declared charset, "" when absent


@dataclass
class RawEmail:
    """A parsed but not yet cleaned email."""

    id: str
    headers: list[tuple[str, str]] = field(default_factory=list)
    body_parts: list[BodyPart] = field(default_factory=list)

    def get_header(self, name: str, default: str | None = None) -> str | None:
        """Return the first value of a header, matched case-insensitively."""
        wanted = name.lower()
        for key, value in self.headers:
            if key.lower() == wanted:
                return value
        return default

    def get_all(self, name: str) -> list[str]:
        """Return every value of a header in message order."""
        wanted = name.lower()
        return [value for key, value in self.headers if key.lower() == wanted]


@dataclass
class Sentence:
    """A sentence of an email body with its tokens."""

    index: int
    char_start: int
    char_end: int
    tokens: list[str]
    token_offsets: list[tuple[int, int]] = field(default_factory=list)  # into EmailBody.text
    text: str = ""  # verbatim, empty when built from tokens alone

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def display_text(self) -> str:
        """Verbatim text, or the tokens joined by spaces when none was kept."""
        return self.text or " ".join(self.tokens)


@dataclass
class EmailBody:
    """Cleaned plain-text body of one email."""

    text: str
    sentences: list[Sentence]
    total_tokens: int
    subject: str = ""

    @classmethod
    def from_sentences(cls, text: str, sentences: list[Sentence], subject: str = "") -> EmailBody:
        return cls(
            text=text,
            sentences=sentences,
            total_tokens=sum(s.token_count for s in sentences),
            subject=subject,
        )

    def sentence_text(self, index: int) -> str:
        """Verbatim text of a sentence."""
        sentence = self.sentences[index]
        return self.text[sentence.char_start:sentence.char_end]

    def span_text(self, span: IntentSpan) -> str:
        """Verbatim substring of the body covered by an intent span."""
        sentence = self.sentences[span.sentence_index]
        start = sentence.token_offsets[span.token_start][0]
        end = sentence.token_offsets[span.token_end - 1][1]
        return self.text[start:end]


# ---------------------------------------------------------------------------
# Summarize
# ---------------------------------------------------------------------------


DEFAULT_FRACTION = Fraction(1, 5)


@dataclass(frozen=True)
class LengthPolicy:
    """Summary length limits: a hard word cap, a fraction of the email, or both."""

    hard_cap_words: int | None = None
    fraction: Fraction | None = DEFAULT_FRACTION

    def __post_init__(self) -> None:
        if self.fraction is not None and not isinstance(self.fraction, Fraction):
            object.__setattr__(self, "fraction", Fraction(self.fraction))
        self.validate()

    def validate(self) -> None:
        """Raise InvalidPolicy if the policy cannot produce a budget."""
        if self.hard_cap_words is None and self.fraction is None:
            raise InvalidPolicy("policy needs a hard cap, a fraction, or both")
        if self.fraction is not None and not (0 < self.fraction <= 1):
            raise InvalidPolicy(f"fraction must be in (0, 1], got {self.fraction}")
        if self.hard_cap_words is not None and self.hard_cap_words < 1:
            raise InvalidPolicy(f"hard cap must be at least 1 word, got {self.hard_cap_words}")

    def to_dict(self) -> dict[str, object]:
        return {
            "hard_cap_words": self.hard_cap_words,
            "fraction": None if self.fraction is None else str(self.fraction),
        }


@dataclass
class Summary:
    """An extractive summary: indices of selected sentences in document order.

    ``ranking_converged`` is False when the scores behind the selection come
    from the best iterate of a ranking that hit its iteration limit.
    """

    selected: list[int]
    word_count: int
    budget: int
    budget_exceeded: bool = False
    ranking_converged: bool = True


# ---------------------------------------------------------------------------
# Triggers
# ---------------------------------------------------------------------------


class TriggerClass(Enum):
    """Persuasion triggers plus the catch-all None class, in canonical order."""

    RECIPROCITY = "Reciprocity"
    CONSISTENCY = "Consistency"
    SOCIAL_PROOF = "SocialProof"
    AUTHORITY = "Authority"
    LIKING = "Liking"
    SCARCITY = "Scarcity"
    NONE = "None"


TRIGGER_CLASSES: tuple[TriggerClass, ...] = tuple(TriggerClass)
TRIGGERS: tuple[TriggerClass, ...] = TRIGGER_CLASSES[:6]
NONE_INDEX = TRIGGER_CLASSES.index(TriggerClass.NONE)


@dataclass(frozen=True)
class TriggerDistribution:
    """Probability of each trigger class for one sentence."""

    sentence_index: int
    probs: tuple[float, ...]  # canonical class order, length 7

    def prob(self, cls: TriggerClass) -> float:
        return self.probs[TRIGGER_CLASSES.index(cls)]

    def argmax(self) -> TriggerClass:
        """Most likely class; ties go to the earlier class in canonical order."""
        best = max(range(len(self.probs)), key=lambda i: (self.probs[i], -i))
        return TRIGGER_CLASSES[best]


@dataclass(frozen=True)
class CorpusBaseline:
    """Per-class intensity statistics of a reference (benign) corpus."""

    mean: tuple[float, ...]
    stddev: tuple[float, ...]
    n_emails: int
    corpus_label: str


@dataclass
class TriggerProfile:
    """Per-email trigger intensities and spike flags."""

    intensity: tuple[float, ...]  # 7 classes
    z: tuple[float, ...]  # 6 triggers
    spikes: tuple[TriggerClass, ...]  # canonical order
    peak: tuple[float, ...] = ()  # per-class max over sentences
    distributions: list[TriggerDistribution] = field(default_factory=list)

    def z_score(self, cls: TriggerClass) -> float:
        return self.z[TRIGGERS.index(cls)]


# ---------------------------------------------------------------------------
# Intents
# ---------------------------------------------------------------------------


DEFAULT_INTENT_TAGS = (
    "click_link",
    "download_file",
    "open_attachment",
    "provide_credentials",
    "reply_with_info",
    "call_number",
    "make_payment",
)


@dataclass(frozen=True)
class TagRegistry:
    """The closed set of intent tags allowed in one run."""

    labels: tuple[str, ...] = DEFAULT_INTENT_TAGS
    version: str = "builtin"

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def require(self, label: str) -> str:
        """Return the label or raise UnknownLabel."""
        if label not in self.labels:
            raise UnknownLabel(f"intent tag {label!r} is not registered")
        return label


@dataclass(frozen=True)
class IntentRule:
    """Co-occurrence rule: a trigger term near an object term evokes ``tag``."""

    tag: str
    triggers: frozenset[str]
    objects: frozenset[str]
    gap: int = 4


@dataclass(frozen=True)
class IntentSpan:
    """Half-open token range within a sentence that carries an intent."""

    sentence_index: int
    token_start: int
    token_end: int
    tag: str
    confidence: float = 1.0

    @property
    def length(self) -> int:
        return self.token_end - self.token_start

    def overlaps(self, other: IntentSpan) -> bool:
        return (
            self.sentence_index == other.sentence_index
            and self.token_start < other.token_end
            and other.token_start < self.token_end
        )


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


REPORT_SCHEMA = "report_v1"


@dataclass(frozen=True)
class DensityMetrics:
    """Fractions of the email's tokens flagged by the trigger and intent branches."""

    trigger_density: float
    intent_density: float
    combined_density: float
    summary_density: float = 0.0


@dataclass
class ReportMeta:
    """Everything needed to reproduce a report."""

    policy: LengthPolicy
    backends: dict[str, str]  # pipeline -> backend id
    lexicon_version: str
    rules_version: str
    registry_version: str
    baseline_label: str
    z_spike: float
    confidence_cutoff: float
    schema: str = REPORT_SCHEMA


@dataclass
class PhishReport:
    """Aggregated findings for one email."""

    email_id: str
    summary: Summary
    summary_sentences: list[str]
    trigger_profile: TriggerProfile
    intent_spans: list[IntentSpan]
    span_quotes: list[str]  # verbatim text of each intent span, same order
    densities: DensityMetrics
    meta: ReportMeta
    compression_ratio: float = 0.0

    @property
    def tag_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for span in self.intent_spans:
            counts[span.tag] = counts.get(span.tag, 0) + 1
        return counts


# ---------------------------------------------------------------------------
# Backend protocol
# ---------------------------------------------------------------------------


PROTOCOL_VERSION = 1


class BackendTask(Enum):
    """Tasks an external backend can serve."""

    SUMMARIZE = "summarize"
    CLASSIFY_TRIGGERS = "classify_triggers"
    TAG_INTENTS = "tag_intents"


@dataclass(frozen=True)
class BackendRequest:
    id: int
    task: BackendTask
    payload: dict


@dataclass(frozen=True)
class BackendErrorInfo:
    code: str
    message: str


@dataclass(frozen=True)
class BackendResponse:
    id: int
    result: dict | None = None
    error: BackendErrorInfo | None = None


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class EvaluationTask(Enum):
    TRIGGERS = "triggers"
    INTENTS = "intents"


@dataclass
class LabeledExample:
    """A labelled sentence; ``predicted`` is filled in by the harness."""

    text: str
    true_labels: frozenset[str]
    predicted: frozenset[str] | None = None


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ClassMetrics:
    """Per-class and aggregate precision/recall/F1."""

    per_class: dict[str, ClassScores]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float

    def to_dict(self) -> dict[str, object]:
        return {
            "per_class": {
                label: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for label, s in self.per_class.items()
            },
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall, "f1": self.macro_f1},
            "micro": {"precision": self.micro_precision, "recall": self.micro_recall, "f1": self.micro_f1},
        }
