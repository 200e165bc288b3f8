"""Shared fixtures for the channel_lab test-suite."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import OptimizerConfig
from channel_lab.services.circuits import parse, serialize


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so every randomized test is reproducible."""

    return np.random.default_rng(20240917)


@pytest.fixture
def fast_cfg() -> OptimizerConfig:
    """Small but reliable optimizer budget for qubit-sized channels."""

    return OptimizerConfig(seed=7, restarts=8, max_iters=300)


@pytest.fixture
def identity_circuit() -> Circuit:
    """One-qubit identity channel."""

    return parse("qubits 1\n")


@pytest.fixture
def x_circuit() -> Circuit:
    """One-qubit bit flip."""

    return parse("qubits 1\ngate X 0\n")


@pytest.fixture
def depolarizing_circuit() -> Circuit:
    """Completely depolarizing qubit channel."""

    return parse("qubits 1\ndepolarize 0\n")


@pytest.fixture
def write_circuit(tmp_path: Path) -> Callable[[str, Circuit], Path]:
    """Write a circuit under ``tmp_path`` and return its path."""

    def _write(name: str, circuit: Circuit) -> Path:
        path = tmp_path / name
        path.write_text(serialize(circuit), encoding="utf-8")
        return path

    return _write
