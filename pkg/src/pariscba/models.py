"""Types and models for the pariscba project."""

import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

JOB_STATES = Literal["queued", "running", "done", "failed"]

OUTPUT_DIR_ENV = "PARISCBA_OUTPUT_DIR"


def _default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "output"))


class RunConfig(BaseModel):
    """Validated settings shared by every subcommand.

    Values come from, in order of precedence: command-line flags, a flat
    ``key = value`` TOML config file, the environment (output directory
    only) and the defaults below.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    baseline: str = "ssp585_like"
    policy: Optional[str] = None
    target: Optional[float] = 2.0
    discount_rate: float = Field(default=0.03, ge=0.0)
    eta: float = Field(default=0.0, ge=0.0)
    n_draws: int = Field(default=0, ge=0)
    seed: Optional[int] = None
    output_dir: Path = Field(default_factory=_default_output_dir)
    cost_multiplier: float = Field(default=1.0, gt=0.0)
    coverage_fraction: float = Field(default=0.0, ge=0.0, lt=1.0)
    geometric_rates: bool = False
    invert: bool = False
    plot: bool = False
    workers: int = Field(default=4, ge=1)

    @field_validator("target", mode="before")
    @classmethod
    def _parse_target(cls, value):
        if value is None or (isinstance(value, str) and value.lower() == "none"):
            return None
        value = float(value)
        if value not in (1.5, 2.0):
            raise ValueError(f"target must be 1.5, 2.0 or none, got {value}")
        return value

    @model_validator(mode="after")
    def _seed_required_for_draws(self):
        if self.n_draws > 0 and self.seed is None:
            raise ValueError("seed is required when n_draws > 0")
        return self
