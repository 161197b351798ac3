"""Loading of the intent rule table and the tag registry."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from phishtriage.data import REGISTRY_FILE, RULES_FILE, read_text
from phishtriage.errors import InvalidDataFile
from phishtriage.models import IntentRule, TagRegistry

DEFAULT_GAP = 4

_SNAKE_CASE = re.compile(r"^[a-z][a-z0-9]*(?:_[a-z0-9]+)*$")


@dataclass(frozen=True)
class RuleTable:
    rules: tuple[IntentRule, ...]
    version: str

    @property
    def tags(self) -> set[str]:
        return {rule.tag for rule in self.rules}


def _version(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def _terms(value: object, what: str, source: str, index: int) -> frozenset[str]:
    if not isinstance(value, list) or not value or not all(isinstance(t, str) and t.strip() for t in value):
        raise InvalidDataFile(f"rule {what} must be a non-empty list of strings", source=source, rule=index)
    return frozenset(t.strip().lower() for t in value)


def parse_rules(text: str, source: str = "<rules>") -> RuleTable:
    """Parse a JSON list of ``{tag, triggers, objects, gap}`` objects."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDataFile(f"rule table is not JSON: {exc}", source=source) from exc
    if not isinstance(doc, list) or not doc:
        raise InvalidDataFile("rule table must be a non-empty JSON list", source=source)

    rules = []
    for index, entry in enumerate(doc):
        if not isinstance(entry, dict) or not isinstance(entry.get("tag"), str):
            raise InvalidDataFile("rule must be an object with a string tag", source=source, rule=index)
        gap = entry.get("gap", DEFAULT_GAP)
        if isinstance(gap, bool) or not isinstance(gap, int) or gap < 1:
            raise InvalidDataFile(f"rule gap must be a positive integer, got {gap!r}", source=source, rule=index)
        rules.append(
            IntentRule(
                tag=entry["tag"],
                triggers=_terms(entry.get("triggers"), "triggers", source, index),
                objects=_terms(entry.get("objects"), "objects", source, index),
                gap=gap,
            )
        )
    return RuleTable(rules=tuple(rules), version=_version(text))


def parse_registry(text: str, source: str = "<registry>") -> TagRegistry:
    """Parse a JSON list of lowercase snake_case tag names."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDataFile(f"tag registry is not JSON: {exc}", source=source) from exc
    if not isinstance(doc, list) or not doc:
        raise InvalidDataFile("tag registry must be a non-empty JSON list", source=source)
    for label in doc:
        if not isinstance(label, str) or not _SNAKE_CASE.match(label):
            raise InvalidDataFile(f"tag {label!r} is not lowercase snake_case", source=source)
    if len(set(doc)) != len(doc):
        raise InvalidDataFile("tag registry has duplicates", source=source)
    return TagRegistry(labels=tuple(doc), version=_version(text))


@lru_cache(maxsize=8)
def load_rules(path: Path | None = None) -> RuleTable:
    """Load a rule table file, or the bundled one when ``path`` is None."""
    return parse_rules(read_text(path, RULES_FILE), source=str(path or RULES_FILE))


@lru_cache(maxsize=8)
def load_registry(path: Path | None = None) -> TagRegistry:
    """Load a tag registry file, or the bundled one when ``path`` is None."""
    return parse_registry(read_text(path, REGISTRY_FILE), source=str(path or REGISTRY_FILE))
