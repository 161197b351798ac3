"""Run configuration: CLI flags over a JSON config file over environment over defaults."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from phishtriage.backend.client import TransportSpec
from phishtriage.errors import InvalidConfig, InvalidPolicy
from phishtriage.models import LengthPolicy
from phishtriage.summarize.budget import PRESET_POLICIES, parse_fraction

BackendChoice = Literal["reference", "external"]


class RunConfig(BaseSettings):
    """Settings for one CLI run, also readable from ``PHISHTRIAGE_*`` variables."""

    model_config = SettingsConfigDict(
        env_prefix="PHISHTRIAGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Backends
    summarizer_backend: BackendChoice = "reference"
    trigger_backend: BackendChoice = "reference"
    intent_backend: BackendChoice = "reference"
    transport: str | None = None
    backend_timeout: float = Field(default=30.0, gt=0)

    # Summary length
    policy: str | None = None
    policy_cap: int | None = Field(default=None, ge=1)
    policy_fraction: str = "1/5"

    # Thresholds
    z_spike: float = Field(default=2.0, gt=0)
    intent_confidence_cutoff: float = Field(default=0.5, ge=0, le=1)

    # Data files (None means the bundled file)
    stopwords_path: Path | None = None
    lexicon_path: Path | None = None
    rules_path: Path | None = None
    registry_path: Path | None = None
    baseline_path: Path | None = None

    # Output and batch
    output_format: Literal["json", "text", "html"] = "json"
    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    sample: int | None = Field(default=None, ge=1)
    log_level: str = "WARNING"

    @field_validator("policy_fraction")
    @classmethod
    def _fraction_in_range(cls, value: str) -> str:
        try:
            parse_fraction(value)
        except InvalidPolicy as exc:
            raise ValueError(exc.message) from exc
        return value

    @field_validator("policy")
    @classmethod
    def _known_preset(cls, value: str | None) -> str | None:
        if value is not None and value not in PRESET_POLICIES:
            raise ValueError(f"unknown policy preset {value!r} (known: {', '.join(sorted(PRESET_POLICIES))})")
        return value

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @model_validator(mode="after")
    def _check_backends_and_paths(self) -> RunConfig:
        if self.uses_external and not self.transport:
            raise ValueError("an external backend is selected but no transport is configured")
        if self.transport:
            TransportSpec.parse(self.transport)
        for name in ("stopwords_path", "lexicon_path", "rules_path", "registry_path", "baseline_path"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise ValueError(f"{name} does not exist: {path}")
        return self

    @property
    def uses_external(self) -> bool:
        return "external" in (self.summarizer_backend, self.trigger_backend, self.intent_backend)

    def length_policy(self) -> LengthPolicy:
        """The configured policy; an explicit cap overrides a preset's cap."""
        if self.policy is not None:
            preset = PRESET_POLICIES[self.policy]
            if self.policy_cap is None:
                return preset
            return LengthPolicy(hard_cap_words=self.policy_cap, fraction=preset.fraction)
        return LengthPolicy(hard_cap_words=self.policy_cap, fraction=parse_fraction(self.policy_fraction))


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON object of RunConfig fields."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file is not JSON: {exc}", path=str(path)) from exc
    if not isinstance(doc, dict):
        raise InvalidConfig("config file must contain a JSON object", path=str(path))
    return doc


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus flag overrides.

    Overrides whose value is None are ignored so unset flags fall through
    to the file, then the environment, then the defaults.

    Raises:
        InvalidConfig: If the file is unreadable or any value is invalid
    """
    values: dict[str, Any] = read_config_file(path) if path is not None else {}
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in error['loc']) or 'config'}: {error['msg']}" for error in exc.errors()
        )
        raise InvalidConfig(problems) from exc
