"""Greedy extractive selection and the summarizer backend seam."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
from typing import Protocol

from phishtriage.errors import BackendViolation, EmptyBody
from phishtriage.models import EmailBody, LengthPolicy, Summary
from phishtriage.summarize.budget import compute_budget
from phishtriage.summarize.ranking import (
    DAMPING,
    MAX_ITERATIONS,
    build_similarity_matrix,
    load_stopwords,
    rank_sentences,
)

# Scores closer than this are ties
SCORE_DECIMALS = 12


class SummarizerBackend(Protocol):
    """Anything that can pick summary sentences for a body under a word budget."""

    backend_id: str

    def select(self, body: EmailBody, budget: int) -> Summary: ...


def select_summary(body: EmailBody, scores: Sequence[float], budget: int) -> Summary:
    """Greedily pick the best-scored sentences that fit the budget.

    Sentences are visited by descending score (earlier sentence first on
    ties) and taken whenever they still fit. If nothing fits, the top
    sentence is taken alone and ``budget_exceeded`` is set.
    """
    if len(scores) != len(body.sentences):
        raise ValueError(f"got {len(scores)} scores for {len(body.sentences)} sentences")
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")

    order = sorted(range(len(scores)), key=lambda i: (-round(float(scores[i]), SCORE_DECIMALS), i))
    selected: list[int] = []
    words = 0
    for index in order:
        count = body.sentences[index].token_count
        if words + count <= budget:
            selected.append(index)
            words += count

    if not selected and order:
        top = order[0]
        return Summary(
            selected=[top],
            word_count=body.sentences[top].token_count,
            budget=budget,
            budget_exceeded=True,
        )
    return Summary(selected=sorted(selected), word_count=words, budget=budget)


class CentralitySummarizer:
    """Reference backend: similarity-graph centrality plus greedy selection."""

    backend_id = "centrality-v1"

    def __init__(
        self,
        stopwords_path: Path | None = None,
        damping: float = DAMPING,
        max_iterations: int = MAX_ITERATIONS,
    ):
        self.stopwords = load_stopwords(stopwords_path)
        self.damping = damping
        self.max_iterations = max_iterations

    def select(self, body: EmailBody, budget: int) -> Summary:
        sim = build_similarity_matrix(body, self.stopwords)
        ranking = rank_sentences(sim, damping=self.damping, max_iterations=self.max_iterations)
        summary = select_summary(body, ranking.scores, budget)
        summary.ranking_converged = ranking.converged
        return summary


def validate_summary(summary: Summary, body: EmailBody, budget: int) -> Summary:
    """Check a backend's summary against the body and budget.

    Returns a Summary with the word count recomputed from the body.

    Raises:
        BackendViolation: If the indices or the budget flag break the summary contract
    """
    n = len(body.sentences)
    selected = list(summary.selected)
    if not selected:
        raise BackendViolation("empty_selection", "summary selects no sentences")
    for index in selected:
        if not isinstance(index, int) or isinstance(index, bool) or not (0 <= index < n):
            raise BackendViolation("index_out_of_range", f"sentence index {index!r} not in [0, {n})")
    if any(a >= b for a, b in zip(selected, selected[1:])):
        raise BackendViolation("not_ascending", f"sentence indices not strictly ascending: {selected}")

    words = sum(body.sentences[i].token_count for i in selected)
    if summary.budget_exceeded:
        if len(selected) != 1 or words <= budget:
            raise BackendViolation(
                "invalid_fallback",
                "budget_exceeded requires exactly one sentence longer than the budget",
            )
    elif words > budget:
        raise BackendViolation("over_budget", f"summary uses {words} words, budget is {budget}")

    return Summary(
        selected=selected,
        word_count=words,
        budget=budget,
        budget_exceeded=summary.budget_exceeded,
        ranking_converged=summary.ranking_converged,
    )


def summarize(
    body: EmailBody,
    policy: LengthPolicy | None = None,
    backend: SummarizerBackend | None = None,
) -> Summary:
    """Summarize a body under a length policy.

    Args:
        body: Email body with at least one sentence
        policy: Length policy; one fifth of the body by default
        backend: Sentence selector; the centrality reference backend by default

    Returns:
        A validated Summary

    Raises:
        EmptyBody: If the body has no tokens
        BackendViolation: If the backend's output breaks the summary contract
    """
    if not body.sentences or body.total_tokens == 0:
        raise EmptyBody("cannot summarize an empty body")
    policy = policy or LengthPolicy()
    backend = backend or CentralitySummarizer()

    budget = compute_budget(body.total_tokens, policy)
    return validate_summary(backend.select(body, budget), body, budget)
