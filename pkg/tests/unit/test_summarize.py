"""Tests for word budgets, centrality ranking and greedy summary selection."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from phishtriage.errors import BackendViolation, EmptyBody, InvalidPolicy
from phishtriage.models import EmailBody, LengthPolicy, Summary
from phishtriage.summarize.budget import PRESET_POLICIES, compute_budget, parse_fraction, policy_from_preset
from phishtriage.summarize.ranking import (
    build_similarity_matrix,
    parse_stopwords,
    rank_sentences,
    stationary_scores,
)
from phishtriage.summarize.summarizer import (
    CentralitySummarizer,
    select_summary,
    summarize,
    validate_summary,
)

WORDS = "account verify payment meeting garden report invoice team link holiday budget coffee".split()


def random_body(rng: random.Random, make_body, sentences: int, max_words: int = 12) -> EmailBody:
    text = " ".join(
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, max_words))).capitalize() + "."
        for _ in range(sentences)
    )
    return make_body(text)


def body_with_tokens(rng: random.Random, make_body, total: int) -> EmailBody:
    """A body of exactly ``total`` tokens in sentences of 1 to 25 words."""
    sentences = []
    remaining = total
    while remaining:
        n = min(remaining, rng.randint(1, 25))
        sentences.append(" ".join(rng.choice(WORDS) for _ in range(n)).capitalize() + ".")
        remaining -= n
    return make_body(" ".join(sentences))


class TestComputeBudget:
    """Tests for compute_budget."""

    def test_fraction_floors(self) -> None:
        assert compute_budget(52, LengthPolicy()) == 10

    def test_fraction_never_below_one(self) -> None:
        assert compute_budget(3, LengthPolicy()) == 1

    def test_cap_and_fraction_take_minimum(self) -> None:
        assert compute_budget(1000, LengthPolicy(hard_cap_words=50)) == 50
        assert compute_budget(100, LengthPolicy(hard_cap_words=50)) == 20

    def test_cap_only(self) -> None:
        assert compute_budget(1000, LengthPolicy(hard_cap_words=25, fraction=None)) == 25
        assert compute_budget(10, LengthPolicy(hard_cap_words=25, fraction=None)) == 25

    def test_total_must_be_positive(self) -> None:
        with pytest.raises(ValueError):
            compute_budget(0, LengthPolicy())

    def test_policy_needs_a_limit(self) -> None:
        with pytest.raises(InvalidPolicy):
            LengthPolicy(hard_cap_words=None, fraction=None)

    def test_policy_rejects_bad_values(self) -> None:
        with pytest.raises(InvalidPolicy):
            LengthPolicy(fraction=Fraction(3, 2))
        with pytest.raises(InvalidPolicy):
            LengthPolicy(hard_cap_words=0)


class TestPolicies:
    """Tests for presets and fraction parsing."""

    def test_presets(self) -> None:
        assert policy_from_preset("words25") == LengthPolicy(hard_cap_words=25, fraction=None)
        assert policy_from_preset("fifth").fraction == Fraction(1, 5)
        assert set(PRESET_POLICIES) == {"words25", "words50", "words100", "fifth"}

    def test_unknown_preset(self) -> None:
        with pytest.raises(InvalidPolicy):
            policy_from_preset("words10")

    @pytest.mark.parametrize("text,expected", [("1/5", Fraction(1, 5)), ("0.25", Fraction(1, 4)), ("1", Fraction(1))])
    def test_parse_fraction(self, text: str, expected: Fraction) -> None:
        assert parse_fraction(text) == expected

    @pytest.mark.parametrize("text", ["0", "6/5", "-1/5", "abc", "1/0"])
    def test_parse_fraction_rejects(self, text: str) -> None:
        with pytest.raises(InvalidPolicy):
            parse_fraction(text)


class TestSimilarityMatrix:
    """Tests for build_similarity_matrix."""

    def test_symmetric_zero_diagonal_bounded(self, phishing_body: EmailBody) -> None:
        sim = build_similarity_matrix(phishing_body)
        assert sim.shape == (5, 5)
        assert np.allclose(sim, sim.T)
        assert np.all(np.diag(sim) == 0)
        assert sim.min() >= 0 and sim.max() <= 1

    def test_known_similarities(self, phishing_body: EmailBody) -> None:
        """Shared content words after stop-word removal drive the cosine."""
        sim = build_similarity_matrix(phishing_body)
        # "account 24 hours" shared by five- and six-term sentences
        assert sim[1, 2] == pytest.approx(3 / np.sqrt(30))
        assert sim[0, 2] == pytest.approx(2 / 6)
        assert sim[1, 3] == 0

    def test_stopword_only_sentences_are_isolated(self, make_body) -> None:
        body = make_body("It is what it is. Account verify now. Verify account today.")
        sim = build_similarity_matrix(body)
        assert sim[0].sum() == 0
        assert sim[1, 2] > 0

    def test_all_stopwords(self, make_body) -> None:
        body = make_body("It is. It was.")
        assert np.array_equal(build_similarity_matrix(body), np.zeros((2, 2)))

    def test_custom_stopwords(self, make_body) -> None:
        body = make_body("Garden party. Garden tools.")
        assert build_similarity_matrix(body, parse_stopwords("# none\ngarden\n")).sum() == 0


class TestRankSentences:
    """Tests for rank_sentences."""

    def test_scores_sum_to_one(self, phishing_body: EmailBody) -> None:
        ranking = rank_sentences(build_similarity_matrix(phishing_body))
        assert ranking.converged
        assert ranking.scores.sum() == pytest.approx(1.0)
        assert int(np.argmax(ranking.scores)) == 2

    def test_matches_dense_solve(self, make_body) -> None:
        """Power iteration agrees with the linear-solve oracle."""
        rng = random.Random(5)
        for _ in range(200):
            body = random_body(rng, make_body, rng.randint(1, 10))
            sim = build_similarity_matrix(body)
            ranking = rank_sentences(sim)
            assert np.max(np.abs(ranking.scores - stationary_scores(sim))) < 1e-6

    def test_edgeless_graph_is_uniform(self) -> None:
        ranking = rank_sentences(np.zeros((4, 4)))
        assert np.allclose(ranking.scores, 0.25)

    def test_single_sentence(self) -> None:
        assert rank_sentences(np.zeros((1, 1))).scores.tolist() == [1.0]

    def test_non_convergence_returns_best_iterate(self, caplog: pytest.LogCaptureFixture) -> None:
        sim = np.array([[0, 1, 0.2], [1, 0, 0.7], [0.2, 0.7, 0]])
        ranking = rank_sentences(sim, max_iterations=1, tolerance=1e-30)
        assert not ranking.converged
        assert ranking.scores.sum() == pytest.approx(1.0)
        assert "did not converge" in caplog.text

    def test_rejects_bad_matrices(self) -> None:
        with pytest.raises(ValueError):
            rank_sentences(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            rank_sentences(np.array([[0, -1], [-1, 0]]))


class TestSelectSummary:
    """Tests for greedy selection."""

    def test_skips_sentences_that_do_not_fit(self, make_body) -> None:
        body = make_body("One two three four five. Six seven. Eight nine ten.")
        summary = select_summary(body, [0.5, 0.3, 0.2], budget=5)
        assert summary.selected == [0]
        summary = select_summary(body, [0.1, 0.5, 0.4], budget=5)
        assert summary.selected == [1, 2]
        assert summary.word_count == 5

    def test_output_in_document_order(self, make_body) -> None:
        body = make_body("Alpha beta. Gamma delta. Epsilon zeta.")
        assert select_summary(body, [0.1, 0.2, 0.7], budget=4).selected == [1, 2]

    def test_ties_prefer_earlier_sentence(self, make_body) -> None:
        body = make_body("Alpha beta. Gamma delta.")
        assert select_summary(body, [0.5, 0.5 + 1e-15], budget=2).selected == [0]

    def test_fallback_when_nothing_fits(self, make_body) -> None:
        body = make_body("One two three. Four five six seven.")
        summary = select_summary(body, [0.4, 0.6], budget=2)
        assert summary == Summary(selected=[1], word_count=4, budget=2, budget_exceeded=True)

    def test_length_mismatch(self, make_body) -> None:
        with pytest.raises(ValueError):
            select_summary(make_body("One. Two."), [1.0], budget=3)


class TestValidateSummary:
    """Tests for validate_summary."""

    @pytest.mark.parametrize(
        "selected,exceeded,reason",
        [
            ([], False, "empty_selection"),
            ([5], False, "index_out_of_range"),
            ([2, 0], False, "not_ascending"),
            ([0, 0], False, "not_ascending"),
            ([0, 1], True, "invalid_fallback"),
            ([1], False, "over_budget"),
        ],
    )
    def test_rejects(self, make_body, selected: list[int], exceeded: bool, reason: str) -> None:
        body = make_body("One two. Three four five six. Seven.")
        with pytest.raises(BackendViolation) as info:
            validate_summary(Summary(selected, 0, 3, exceeded), body, budget=3)
        assert info.value.reason == reason

    def test_recomputes_word_count(self, make_body) -> None:
        body = make_body("One two. Three four five six. Seven.")
        checked = validate_summary(Summary([0, 2], 99, 3), body, budget=3)
        assert checked.word_count == 3


class TestSummarize:
    """Tests for the summarize operation."""

    def test_phishing_fixture(self, phishing_body: EmailBody) -> None:
        summary = summarize(phishing_body)
        assert summary == Summary(selected=[2], word_count=10, budget=10)

    @pytest.mark.slow
    def test_word_count_within_budget(self, make_body) -> None:
        """Over 1000 random bodies of 5 to 2000 tokens the budget holds except flagged fallbacks."""
        rng = random.Random(1)
        summarizer = CentralitySummarizer()
        for _ in range(1000):
            body = body_with_tokens(rng, make_body, rng.randint(5, 2000))
            policy = LengthPolicy(hard_cap_words=rng.choice([25, 50, 100]))
            summary = summarize(body, policy, summarizer)
            budget = min(policy.hard_cap_words, max(1, body.total_tokens // 5))
            assert summary.budget == budget
            if summary.budget_exceeded:
                assert len(summary.selected) == 1
                assert all(s.token_count > budget for s in body.sentences)
            else:
                assert summary.word_count <= budget

    def test_ranking_limit_is_flagged(self, make_body, caplog: pytest.LogCaptureFixture) -> None:
        """A ranking cut off at its iteration limit still summarizes, with the flag cleared."""
        body = make_body("Verify your account now. Verify your account password today. Call the office.")
        policy = LengthPolicy(hard_cap_words=5, fraction=None)
        summary = summarize(body, policy, CentralitySummarizer(max_iterations=1))
        assert not summary.ranking_converged
        assert summary.word_count <= 5
        assert "did not converge" in caplog.text
        assert summarize(body, policy).ranking_converged

    def test_empty_body(self) -> None:
        with pytest.raises(EmptyBody):
            summarize(EmailBody(text="", sentences=[], total_tokens=0))
