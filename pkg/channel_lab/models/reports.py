"""Result and configuration records produced by measures, reductions and commands."""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from channel_lab.utils.config import get_settings

MONOTONE_SLACK = 1e-12


class OptimizerConfig(BaseModel):
    """Restart and convergence controls shared by every seesaw optimizer."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0)
    restarts: int = Field(default_factory=lambda: get_settings().default_restarts, ge=1)
    max_iters: int = Field(default_factory=lambda: get_settings().default_max_iters, ge=1)
    conv_tol: float = Field(default_factory=lambda: get_settings().default_conv_tol, gt=0.0)

    def restart_generators(self) -> List[np.random.Generator]:
        """One independent generator per restart, derived from ``seed``."""

        children = np.random.SeedSequence(self.seed).spawn(self.restarts)
        return [np.random.default_rng(child) for child in children]


class MeasureResult(BaseModel):
    """Best objective over restarts together with the maximizing witness.

    ``iterations`` always records the maximized objective; minimizations
    (``sense == "min"``) store the negated quantity and report its negation.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: float
    bound: Literal["lower", "upper", "exact"] = "lower"
    sense: Literal["max", "min"] = "max"
    witness: Dict[str, np.ndarray] = Field(default_factory=dict)
    iterations: List[List[float]] = Field(default_factory=list)
    best_restart: int = 0
    seed: int = 0

    @model_validator(mode="after")
    def _check_traces(self) -> "MeasureResult":
        for index, trace in enumerate(self.iterations):
            for before, after in zip(trace, trace[1:]):
                if after < before - MONOTONE_SLACK * max(1.0, abs(before)):
                    raise ValueError(f"restart {index} trace is not monotone")
        if self.iterations:
            best = max(trace[-1] for trace in self.iterations)
            expected = best if self.sense == "max" else -best
            if abs(expected - self.value) > MONOTONE_SLACK * max(1.0, abs(best)):
                raise ValueError("value does not match the best restart")
        return self


class ReductionReport(BaseModel):
    """Parameters and predicted relations of a construction, plus optional measurements."""

    model_config = ConfigDict(frozen=True)

    kind: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    parameters: Dict[str, Any] = Field(default_factory=dict)
    predicted: Dict[str, Any] = Field(default_factory=dict)
    measured: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    artifacts: Dict[str, str] = Field(default_factory=dict)
    padding: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_seed(self) -> "ReductionReport":
        if self.measured and self.seed is None:
            raise ValueError("measured values must carry the seed they were produced with")
        if "relation" not in self.predicted:
            raise ValueError("a reduction report must state its predicted relation")
        return self


class ProtocolRun(BaseModel):
    """Exact acceptance probability of one simulated protocol run."""

    model_config = ConfigDict(frozen=True)

    circuits: Dict[str, str] = Field(default_factory=dict)
    strategy: Literal["honest", "grid", "fixed"]
    resolution: Optional[int] = None
    trials: int = Field(default=0, ge=0)
    seed: int = 0
    acceptance: float = Field(ge=0.0, le=1.0)
    distance_estimate: Optional[float] = None
    sampled_acceptance: Optional[float] = None


class PropertyCheck(BaseModel):
    """One verified property: the worst observed slack against its allowance."""

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    worst: float
    allowed: float
    samples: int = 1


class SuiteReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    suite: str
    seed: int
    checks: List[PropertyCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class JsonReport(BaseModel):
    """Top-level record written by every command."""

    model_config = ConfigDict(frozen=True)

    tool_version: str
    command: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    results: Dict[str, Any] = Field(default_factory=dict)
    timings_ms: Dict[str, float] = Field(default_factory=dict)
