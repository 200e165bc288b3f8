"""Tests for the degradable and antidegradable embeddings."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import OptimizerConfig
from channel_lab.services.channels import apply_array, verify_antidegrading, verify_degrading
from channel_lab.services.circuits import parse, random_circuit
from channel_lab.services.degradable import (
    antidegradable_embed,
    degradable_embed,
    embed,
    embedding_circuits,
    measure_embedding,
)
from channel_lab.services.linalg import random_density
from channel_lab.services.simulator import GATE_MATRICES, to_channel

ZERO = np.diag([1.0, 0.0]).astype(complex)
ONE = np.diag([0.0, 1.0]).astype(complex)


def test_degradable_embedding_output(rng: np.random.Generator, x_circuit: Circuit) -> None:
    """rho -> |0><0| (x) rho / 2 + |1><1| (x) X rho X / 2."""

    c, _, report = embed(x_circuit)
    assert report.kind == "degradable"
    assert set(report.artifacts) == {"c", "degrader"}
    rho = random_density(rng, (2,)).array
    x = GATE_MATRICES["X"]
    expected = 0.5 * np.kron(ZERO, rho) + 0.5 * np.kron(ONE, x @ rho @ x)
    assert_allclose(apply_array(to_channel(c), rho), expected, atol=1e-12)


def test_antidegradable_embedding_output(rng: np.random.Generator, x_circuit: Circuit) -> None:
    """The unflagged branch outputs |0><0| instead of the input."""

    c, _, report = embed(x_circuit, antidegradable=True)
    assert report.kind == "antidegradable"
    assert set(report.artifacts) == {"c", "antidegrader"}
    rho = random_density(rng, (2,)).array
    x = GATE_MATRICES["X"]
    expected = 0.5 * np.kron(ZERO, ZERO) + 0.5 * np.kron(ONE, x @ rho @ x)
    assert_allclose(apply_array(to_channel(c), rho), expected, atol=1e-12)


def test_degrading_maps_verify_on_random_circuits(rng: np.random.Generator) -> None:
    """Embedded random circuits come with working degrading and antidegrading maps."""

    for _ in range(5):
        q = random_circuit(rng, 1, n_ancillas=1, n_gates=8, n_traced=1)
        c, degrader, _ = degradable_embed(q)
        assert verify_degrading(degrader, to_channel(c)).passed
        c, antidegrader, _ = antidegradable_embed(q)
        assert verify_antidegrading(antidegrader, to_channel(c)).passed


def test_embedding_squares_a_widening_circuit() -> None:
    """A one-to-two qubit circuit gets one discarded input."""

    q = parse("qubits 1\nancilla 1\ngate CNOT 0 1\n")
    c, degrader, report = degradable_embed(q)
    assert report.padding == {"inputs": 1, "outputs": 0}
    assert c.n_inputs == 2
    assert len(c.output_wires) == 3
    assert verify_degrading(degrader, to_channel(c)).passed


def test_embedding_circuits_match_embed(x_circuit: Circuit) -> None:
    """The circuit-only helper agrees with the full embedding."""

    c, helper = embedding_circuits(x_circuit, antidegradable=True)
    expected_c, expected_helper, _ = embed(x_circuit, antidegradable=True)
    assert (c, helper) == (expected_c, expected_helper)


@pytest.mark.parametrize("antidegradable", [False, True])
def test_embedding_halves_the_distance(
    identity_circuit: Circuit, fast_cfg: OptimizerConfig, antidegradable: bool
) -> None:
    """Identity against S sits at distance sqrt 2; the embedded pair at half that."""

    s_gate = parse("qubits 1\ngate T 0\ngate T 0\n")
    _, _, report = embed(identity_circuit, antidegradable=antidegradable)
    measured = measure_embedding(report, identity_circuit, s_gate, fast_cfg).measured
    assert measured["input_distance"] == pytest.approx(math.sqrt(2), abs=1e-6)
    assert measured["embedded_distance"] == pytest.approx(measured["predicted_value"], abs=2e-3)
    assert measured["map_residual"] < 1e-9
