"""Experiment configuration.

JSON config keys mirror the :class:`ExperimentConfig` field names exactly; unknown
keys are rejected.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from deepnets.activation import SigmoidKind
from deepnets.exceptions import ConfigError
from deepnets.netcore import PhiBounds

__all__ = ["ExperimentConfig", "load_config", "TASKS"]

logger = logging.getLogger(__name__)

TASKS = ("localize", "approx", "capacity", "learn", "sweep")

_U64_MAX = 2**64 - 1


class ExperimentConfig(BaseModel):
    """Everything one batch run needs."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    task: Literal["localize", "approx", "capacity", "learn", "sweep"] = "sweep"
    d: int = Field(1, ge=1)
    r: float = 1.0
    c0: float = Field(1.0, gt=0)
    N: int = Field(1, ge=1)
    s: int = Field(1, ge=1)
    tau: float = Field(0.1, ge=0)
    m_grid: List[int] = Field(default_factory=lambda: [256, 512, 1024, 2048, 4096, 8192])
    trials: int = 16
    seed: int = 0
    sigma: SigmoidKind = SigmoidKind.LOGISTIC
    output: str = "results.csv"
    format: Literal["csv", "json"] = "csv"

    svg: bool = False
    target: Literal["lipschitz", "sparse"] = "lipschitz"
    shared_target: bool = False
    n: Optional[int] = Field(None, ge=1)
    n_values: List[int] = Field(default_factory=lambda: [1, 2, 3])
    cell: Optional[List[int]] = None
    epsilon: Optional[float] = Field(None, gt=0, lt=0.5)
    gain: Optional[float] = Field(None, gt=0)
    grid_points: Optional[int] = Field(None, ge=3)
    epsilons: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2])
    sample_size: int = Field(2000, ge=1)
    bounds: List[float] = Field(default_factory=lambda: [2.0, 1.0, 4.0])
    mc_points: int = Field(4096, ge=1)
    schedule: Literal["dense", "sparse"] = "dense"
    slope_tolerance: float = Field(0.2, gt=0)
    compare_dense: bool = False
    advantage_slack: float = Field(3.0, gt=0)
    advantage_min_m: int = Field(1024, ge=1)
    workers: int = Field(1, ge=1)

    @field_validator("m_grid")
    @classmethod
    def _strictly_increasing(cls, v: List[int]) -> List[int]:
        if any(m < 1 for m in v):
            raise ValueError("sample sizes must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("m_grid must be strictly increasing")
        return v

    @field_validator("trials")
    @classmethod
    def _trials_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("trials must be at least 1")
        return v

    @field_validator("r")
    @classmethod
    def _smoothness(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("r must lie in (0, 1]")
        return v

    @field_validator("seed")
    @classmethod
    def _seed_u64(cls, v: int) -> int:
        if not 0 <= v <= _U64_MAX:
            raise ValueError("seed must fit an unsigned 64-bit integer")
        return v

    @field_validator("bounds")
    @classmethod
    def _bound_triple(cls, v: List[float]) -> List[float]:
        if len(v) != 3 or min(v) < 0:
            raise ValueError("bounds must be [B_n, C_n, Xi_n], all nonnegative")
        return v

    @field_validator("epsilons")
    @classmethod
    def _radii(cls, v: List[float]) -> List[float]:
        if not v or min(v) <= 0:
            raise ValueError("epsilons must be a nonempty list of positive radii")
        return v

    @model_validator(mode="after")
    def _sparsity(self) -> "ExperimentConfig":
        if self.s > self.N**self.d:
            raise ValueError(f"s={self.s} exceeds N^d={self.N ** self.d}")
        if self.cell is not None and len(self.cell) != self.d:
            raise ValueError(f"cell must have {self.d} coordinates")
        return self

    @property
    def phi_bounds(self) -> PhiBounds:
        return PhiBounds(*self.bounds)

    @property
    def output_path(self) -> Path:
        return Path(self.output)

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """A validated copy with the non-``None`` entries of ``changes`` applied."""
        data = self.model_dump()
        data.update({k: v for k, v in changes.items() if v is not None})
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(_describe(exc)) from exc

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "config"
        parts.append(f"{where}: {err['msg']}")
    return "invalid config: " + "; ".join(parts)


def load_config(source: Union[str, Path, Dict[str, Any], None] = None) -> ExperimentConfig:
    """Load and validate a config from a JSON file, a mapping, or defaults.

    :raises ConfigError: If the file cannot be read or the content does not validate
    """
    if source is None:
        data: Dict[str, Any] = {}
    elif isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        logger.debug("loaded config from %s", path)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
