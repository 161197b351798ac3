"""Error hierarchy for phishtriage.

Every error carries the CLI exit code it maps to: 2 for input and contract
errors, 3 for anything caused by an external backend or its transport.
"""

from __future__ import annotations

from typing import Any


class PhishTriageError(Exception):
    """Base class for all phishtriage errors."""

    exit_code = 2
    code = "error"

    def __init__(self, message: str = "", **context: Any):
        self.message = message or self.code
        self.context: dict[str, Any] = dict(context)
        super().__init__(self._render())

    def _render(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"

    def at(self, **context: Any) -> PhishTriageError:
        """Attach location context (e.g. sentence_index) and return self."""
        self.context.update(context)
        self.args = (self._render(),)
        return self


# Input / contract errors (exit 2)


class UnparseableMessage(PhishTriageError):
    code = "unparseable_message"


class UnsupportedFormat(PhishTriageError):
    code = "unsupported_format"


class EmptyBody(PhishTriageError):
    code = "empty_body"


class CorpusNotFound(PhishTriageError):
    code = "corpus_not_found"


class InvalidPolicy(PhishTriageError):
    code = "invalid_policy"


class EmptySentence(PhishTriageError):
    code = "empty_sentence"


class NoSentences(PhishTriageError):
    code = "no_sentences"


class InsufficientCorpus(PhishTriageError):
    code = "insufficient_corpus"


class IndexMismatch(PhishTriageError):
    code = "index_mismatch"


class UnknownLabel(PhishTriageError):
    code = "unknown_label"


class UnpopulatedPredictions(PhishTriageError):
    code = "unpopulated_predictions"


class InvalidConfig(PhishTriageError):
    code = "invalid_config"


class InvalidDataFile(PhishTriageError):
    code = "invalid_data_file"


# Backend / transport errors (exit 3)


class BackendFailure(PhishTriageError):
    """Base class for errors originating from an external backend."""

    exit_code = 3
    code = "backend_failure"


class BackendError(BackendFailure):
    """The backend answered with an error object."""

    code = "backend_error"


class BackendUnavailable(BackendFailure):
    code = "backend_unavailable"


class BackendTimeout(BackendFailure):
    code = "backend_timeout"


class ProtocolError(BackendFailure):
    code = "protocol_error"


class BackendViolation(BackendFailure):
    """A backend result broke the consuming module's contract.

    ``reason`` is a stable machine-readable code such as
    ``sum_out_of_tolerance`` or ``unregistered_tag``.
    """

    code = "backend_violation"

    def __init__(self, reason: str, message: str = "", **context: Any):
        self.reason = reason
        super().__init__(message or reason, **context)

    def _render(self) -> str:
        return f"[{self.reason}] {super()._render()}"
