"""Canonical JSON: sorted keys, compact separators, 6 significant digits."""

from __future__ import annotations

import json
import math
from numbers import Integral, Real
from typing import Any

SIGNIFICANT_DIGITS = 6


def round_float(value: float) -> float | str:
    """Round to 6 significant digits; infinities become ``"inf"``/``"-inf"``."""
    if math.isnan(value):
        raise ValueError("NaN has no canonical form")
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    rounded = float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return 0.0 if rounded == 0 else rounded


def parse_float(value: float | int | str) -> float:
    """Inverse of round_float for values read back from JSON."""
    if isinstance(value, str):
        if value not in ("inf", "-inf"):
            raise ValueError(f"not a number: {value!r}")
        return math.inf if value == "inf" else -math.inf
    return float(value)


def canonicalize(obj: Any) -> Any:
    """Recursively convert ``obj`` into JSON-ready canonical values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Integral):
        return int(obj)
    if isinstance(obj, Real):
        return round_float(float(obj))
    if isinstance(obj, dict):
        return {str(key): canonicalize(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(item) for item in obj]
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(canonicalize(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dump_bytes(obj: Any) -> bytes:
    return dumps(obj).encode("utf-8")
