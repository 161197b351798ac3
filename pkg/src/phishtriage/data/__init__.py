"""Bundled data files (stop words, lexicon, intent rules, default baseline)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

STOPWORDS_FILE = "stopwords.txt"
LEXICON_FILE = "lexicon.tsv"
RULES_FILE = "intent_rules.json"
REGISTRY_FILE = "intent_registry.json"
BASELINE_FILE = "baseline_default.json"


def read_bundled(name: str) -> str:
    """Read a bundled data file as UTF-8 text."""
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def read_text(path: Path | None, bundled_name: str) -> str:
    """Read ``path`` if given, else the bundled file of the same role."""
    if path is None:
        return read_bundled(bundled_name)
    return Path(path).read_text(encoding="utf-8")
