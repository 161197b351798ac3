"""Sentence similarity graph and centrality ranking."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.metrics.pairwise import cosine_similarity

from phishtriage.data import STOPWORDS_FILE, read_text
from phishtriage.models import EmailBody

logger = logging.getLogger(__name__)


DAMPING = 0.85
TOLERANCE = 1e-6
MAX_ITERATIONS = 200


@dataclass
class Ranking:
    """Stationary scores of the sentence graph plus convergence diagnostics."""

    scores: np.ndarray
    iterations: int
    converged: bool


def parse_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=8)
def load_stopwords(path: Path | None = None) -> frozenset[str]:
    """Load a stop-word list (one word per line, ``#`` comments); bundled list by default."""
    return parse_stopwords(read_text(path, STOPWORDS_FILE))


def _identity(tokens: list[str]) -> list[str]:
    return tokens


def build_similarity_matrix(body: EmailBody, stopwords: frozenset[str] | None = None) -> np.ndarray:
    """Pairwise cosine similarity of sentence term-frequency vectors.

    Tokens are lowercased and stop words removed before counting. The result
    is symmetric, has a zero diagonal and entries in [0, 1]. Sentences left
    without terms have zero similarity to everything.

    Args:
        body: Email body with at least one sentence
        stopwords: Words to ignore; the bundled list when omitted

    Returns:
        n x n matrix for n sentences
    """
    if not body.sentences:
        raise ValueError("cannot build a similarity matrix for a body without sentences")
    if stopwords is None:
        stopwords = load_stopwords()

    docs = [[t.lower() for t in s.tokens if t.lower() not in stopwords] for s in body.sentences]
    n = len(docs)
    if not any(docs):
        return np.zeros((n, n))

    counts = CountVectorizer(analyzer=_identity, lowercase=False).fit_transform(docs)
    sim = np.clip(cosine_similarity(counts), 0.0, 1.0)
    sim = (sim + sim.T) / 2
    np.fill_diagonal(sim, 0.0)
    return sim


def _transition_matrix(sim: np.ndarray) -> np.ndarray:
    """Row-stochastic matrix; rows without out-weight jump uniformly."""
    n = sim.shape[0]
    out_weight = sim.sum(axis=1, keepdims=True)
    uniform = np.full_like(sim, 1.0 / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(out_weight > 0, sim / np.where(out_weight > 0, out_weight, 1.0), uniform)


def _check_square(sim: np.ndarray) -> np.ndarray:
    sim = np.asarray(sim, dtype=float)
    if sim.ndim != 2 or sim.shape[0] != sim.shape[1] or sim.shape[0] == 0:
        raise ValueError(f"similarity matrix must be square and non-empty, got shape {sim.shape}")
    if (sim < 0).any():
        raise ValueError("similarity matrix has negative entries")
    return sim


def rank_sentences(
    sim: np.ndarray,
    damping: float = DAMPING,
    tolerance: float = TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> Ranking:
    """Damped random-walk centrality by power iteration.

    Iteration stops once ``d/(1-d) * ||x_t - x_{t-1}||_1`` drops below the
    tolerance, which bounds the L1 distance to the fixed point. When the
    iteration limit is hit first, the iterate with the smallest step is
    returned with ``converged=False``.

    Args:
        sim: Symmetric non-negative similarity matrix with zero diagonal
        damping: Probability of following an edge rather than teleporting
        tolerance: L1 tolerance
        max_iterations: Iteration limit

    Returns:
        Ranking whose scores sum to 1
    """
    sim = _check_square(sim)
    n = sim.shape[0]
    transposed = _transition_matrix(sim).T
    teleport = (1.0 - damping) / n
    bound_factor = damping / (1.0 - damping)

    x = np.full(n, 1.0 / n)
    best, best_step = x, float("inf")
    for iteration in range(1, max_iterations + 1):
        nxt = teleport + damping * (transposed @ x)
        step = float(np.abs(nxt - x).sum())
        x = nxt
        if step < best_step:
            best, best_step = x, step
        if bound_factor * step < tolerance:
            return Ranking(scores=x / x.sum(), iterations=iteration, converged=True)

    logger.warning(
        "power iteration did not converge after %d iterations (last step %.3g)",
        max_iterations,
        best_step,
    )
    return Ranking(scores=best / best.sum(), iterations=max_iterations, converged=False)


def stationary_scores(sim: np.ndarray, damping: float = DAMPING) -> np.ndarray:
    """Exact stationary vector of the same random walk, by a dense linear solve."""
    sim = _check_square(sim)
    n = sim.shape[0]
    system = np.eye(n) - damping * _transition_matrix(sim).T
    x = np.linalg.solve(system, np.full(n, (1.0 - damping) / n))
    return x / x.sum()
