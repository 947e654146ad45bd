"""Runtime settings for resilient-ham."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from resilient_ham import PACKAGE_NAME, __version__


class ScaleConfig(BaseModel):
    """Every asymptotic constant of the construction, made explicit.

    Multipliers scale the textbook values (k = 3 ln n, walk length 10 ln n);
    the optional integer fields override the resolved value outright.
    """

    model_config = ConfigDict(extra="forbid")

    strategy: Literal["greedy", "doubling", "greedy-then-doubling"] = Field(default="greedy-then-doubling")

    absorber_k_mult: float = Field(default=1 / 3, gt=0.0)
    absorber_k: int | None = Field(default=None, ge=1)
    chord_length_mult: float = Field(default=0.2, gt=0.0)
    chord_length: int | None = Field(default=None, ge=2)
    backbone_length_mult: float = Field(default=0.2, gt=0.0)
    backbone_length: int | None = Field(default=None, ge=2)
    final_length_mult: float = Field(default=0.2, gt=0.0)
    final_length: int | None = Field(default=None, ge=2)
    min_walk_length: int = Field(default=2, ge=2)

    v1_divisor: int = Field(default=64, ge=1)
    v1_size: int | None = Field(default=None, ge=1)
    v2_size: int | None = Field(default=None, ge=1)
    v3_size: int | None = Field(default=None, ge=1)
    v4_size: int | None = Field(default=None, ge=1)
    segment_floor: int = Field(default=8, ge=2)
    segment_size: int | None = Field(default=None, ge=2)

    reservoir_factor: float = Field(default=4.0, gt=0.0)
    reservoir_slack: float = Field(default=1.25, ge=1.0)
    walk_target: float = Field(default=4.0, gt=0.0)
    final_pairs: int = Field(default=2, ge=1)
    window_tolerance: float = Field(default=0.2, ge=0.0, le=1.0)
    threshold_mult: float = Field(default=1.0, gt=0.0)
    gamma: float = Field(default=0.1, gt=0.0, lt=1.0)
    level_factor: float = Field(default=1.0, gt=0.0)
    level_size: int | None = Field(default=None, ge=2)

    partition_retries: int = Field(default=10, ge=1)
    connect_restarts: int = Field(default=3, ge=1)
    doubling_retries: int = Field(default=2, ge=1)
    pipeline_restarts: int = Field(default=3, ge=1)
    extraction_budget: int = Field(default=20_000, ge=1)
    bridge_attempts: int = Field(default=64, ge=1)

    merge_rounds: int = Field(default=4, ge=0)

    debug_invariants: bool = Field(default=True)
    enforce_p1: bool = Field(default=True)
    heuristic: bool = Field(default=True)

    def overrides(self) -> dict[str, object]:
        """Fields that differ from the defaults, for run metadata."""
        defaults = ScaleConfig()
        return {
            name: value
            for name, value in self.model_dump().items()
            if value != getattr(defaults, name)
        }


class CheckerConfig(BaseModel):
    """Pseudorandomness checker settings."""

    exact_limit: int = Field(default=14, ge=1, le=20)
    sampled_trials: int = Field(default=10_000, ge=1)
    q2_tolerance: float = Field(default=0.2, ge=0.0, le=1.0)


class OracleLimit(BaseModel):
    """Size limits for the brute-force oracles."""

    max_n_heldkarp: int = Field(default=20, ge=1, le=26)
    max_n_permutation: int = Field(default=9, ge=1, le=12)
    max_sigma_length: int = Field(default=4, ge=1)
    max_sigma_n: int = Field(default=30, ge=1)

    @model_validator(mode="after")
    def _permutation_within_heldkarp(self) -> OracleLimit:
        if self.max_n_permutation > self.max_n_heldkarp:
            raise ValueError("max_n_permutation must not exceed max_n_heldkarp")
        return self


class TelemetryConfig(BaseModel):
    """OpenTelemetry configuration."""

    enabled: bool = Field(default=False)
    otlp_endpoint: str = Field(default="http://127.0.0.1:4318")
    otlp_timeout_seconds: float = Field(default=10.0, gt=0.0, le=120.0)
    metrics_export_interval_ms: int = Field(default=5000, ge=250, le=60000)
    sample_ratio: float = Field(default=1.0, ge=0.0, le=1.0)
    otlp_headers: dict[str, str] = Field(default_factory=dict)


class Settings(BaseSettings):
    """Process settings loaded from environment."""

    model_config = SettingsConfigDict(
        env_prefix="RESILIENT_HAM_",
        env_nested_delimiter="__",
    )

    service_name: str = Field(default=PACKAGE_NAME)
    service_version: str = Field(default=__version__)

    threads: int | None = Field(default=None, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(default="INFO")

    scale: ScaleConfig = Field(default_factory=ScaleConfig)
    checker: CheckerConfig = Field(default_factory=CheckerConfig)
    oracle: OracleLimit = Field(default_factory=OracleLimit)
    telemetry: TelemetryConfig = Field(default_factory=TelemetryConfig)


_settings: Settings | None = None


def get_settings() -> Settings:
    """Get cached settings."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Reset settings cache (test helper)."""
    global _settings
    _settings = None
