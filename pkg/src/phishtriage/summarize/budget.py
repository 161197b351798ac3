"""Summary word budgets."""

from __future__ import annotations

import math
from fractions import Fraction

from phishtriage.errors import InvalidPolicy
from phishtriage.models import DEFAULT_FRACTION, LengthPolicy


# Named policies: the fixed word limits and the one-fifth fraction
PRESET_POLICIES: dict[str, LengthPolicy] = {
    "words25": LengthPolicy(hard_cap_words=25, fraction=None),
    "words50": LengthPolicy(hard_cap_words=50, fraction=None),
    "words100": LengthPolicy(hard_cap_words=100, fraction=None),
    "fifth": LengthPolicy(hard_cap_words=None, fraction=DEFAULT_FRACTION),
}


def parse_fraction(text: str | float | Fraction) -> Fraction:
    """Parse ``"1/5"``, ``"0.2"`` or a number into a Fraction in (0, 1]."""
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidPolicy(f"not a fraction: {text!r}") from exc
    if not (0 < value <= 1):
        raise InvalidPolicy(f"fraction must be in (0, 1], got {value}")
    return value


def policy_from_preset(name: str) -> LengthPolicy:
    try:
        return PRESET_POLICIES[name]
    except KeyError:
        known = ", ".join(sorted(PRESET_POLICIES))
        raise InvalidPolicy(f"unknown policy preset {name!r} (known: {known})") from None


def compute_budget(total_words: int, policy: LengthPolicy) -> int:
    """Number of words a summary may use.

    The fraction gives ``max(1, floor(total_words * fraction))``; when a hard
    cap is also set the smaller of the two wins.

    Args:
        total_words: Token count of the whole body, at least 1
        policy: Length policy

    Returns:
        Positive word budget

    Raises:
        ValueError: If total_words < 1
        InvalidPolicy: If the policy is malformed
    """
    if total_words < 1:
        raise ValueError(f"total_words must be at least 1, got {total_words}")
    policy.validate()

    limits = []
    if policy.fraction is not None:
        limits.append(max(1, math.floor(total_words * policy.fraction)))
    if policy.hard_cap_words is not None:
        limits.append(policy.hard_cap_words)
    return min(limits)
