"""Tests for mixed-unitary approximations and the ancilla-mixing circuit."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel_lab.errors import MissingRepresentationError
from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import OptimizerConfig
from channel_lab.services.channels import apply_array, depolarizing_channel
from channel_lab.services.circuits import iter_gates, parse
from channel_lab.services.linalg import random_density
from channel_lab.services.mixed_unitary import (
    ancilla_mixing_residual,
    measure_mixed_unitary_approx,
    measure_mixed_unitary_circuit,
    mixed_unitary_approx,
    mixed_unitary_circuit,
    mixed_unitary_pair,
    random_complement_state,
    simulation_residual,
    structured_distance_bracket,
    subspace_mixing_distance,
    unitality_residual,
)
from channel_lab.services.simulator import GATE_MATRICES, simulate_array, to_channel

DEPHASER = parse("qubits 1\nancilla 1\ngate CNOT 0 1\ntraceout 1\n")
BIT_FLIP = parse("qubits 1\nancilla 1\ngate H 1\ngate CNOT 1 0\ntraceout 1\n")


# ----- Channel construction -----

@pytest.mark.parametrize("extra", [0, 1])
def test_approximation_simulates_and_is_unital(rng: np.random.Generator, extra: int) -> None:
    """On |0> ancillas it reproduces the channel next to I/dB, and it fixes the identity."""

    phi = to_channel(DEPHASER)
    phi_prime, report = mixed_unitary_approx(phi, extra)
    assert report.parameters["dim_a"] == report.parameters["dim_b"] == 2 ** (1 + extra)
    assert len(phi_prime.mixed_unitary) == 4
    assert simulation_residual(phi, phi_prime) < 1e-10
    assert unitality_residual(phi_prime) < 1e-10
    rho = random_complement_state(rng, phi_prime, phi.in_dim)
    assert subspace_mixing_distance(phi_prime, rho) <= report.predicted["subspace_mixing_bound"] + 1e-9


def test_approximation_outputs_depolarized_environment(rng: np.random.Generator) -> None:
    """Any input leaves the B register maximally mixed."""

    phi_prime, _ = mixed_unitary_approx(to_channel(BIT_FLIP))
    output = apply_array(phi_prime, random_density(rng, (2, 2)).array)
    marginal = np.trace(output.reshape(2, 2, 2, 2), axis1=0, axis2=2)
    assert_allclose(marginal, np.eye(2) / 2, atol=1e-12)


def test_approximation_needs_a_dilation() -> None:
    """Channels without a dilation and negative padding are refused."""

    with pytest.raises(MissingRepresentationError):
        mixed_unitary_approx(depolarizing_channel(2))
    with pytest.raises(ValueError):
        mixed_unitary_approx(to_channel(DEPHASER), -1)


def test_measured_sandwiches_hold(fast_cfg: OptimizerConfig) -> None:
    """The shifted entropy and scaled norm land inside their predicted brackets."""

    phi = to_channel(BIT_FLIP)
    phi_prime, report = mixed_unitary_approx(phi, 1)
    measured = measure_mixed_unitary_approx(report, phi, phi_prime, fast_cfg).measured
    assert measured["smin_lower"] - 1e-6 <= measured["smin_prime_shifted"] <= measured["smin"] + 1e-6
    assert measured["nu"] - 1e-6 <= measured["nu_prime_scaled"] <= measured["nu_upper"] + 1e-6
    assert measured["p"] == 2.0


# ----- Circuit construction -----

def test_circuit_uses_only_mixtures_of_unitaries() -> None:
    """The environment is scrambled by X and Z mixtures, never by a bare depolarizer."""

    circuit, report = mixed_unitary_circuit(BIT_FLIP, 2)
    assert report.parameters["ancillas"] == 3
    assert report.predicted["epsilon"] == pytest.approx(1.0)
    assert circuit.n_inputs == 4
    assert len(circuit.output_wires) == 4
    for instruction in iter_gates(circuit.instructions):
        assert instruction.is_unitary or instruction.kind in ("MIXU", "CDEPOL")


def test_zero_ancillas_run_the_circuit(rng: np.random.Generator) -> None:
    """With A in |000> the output is Q(rho) next to a maximally mixed environment."""

    circuit, _ = mixed_unitary_circuit(BIT_FLIP, 2)
    rho = random_density(rng, (2,)).array
    zero = np.zeros((8, 8), dtype=complex)
    zero[0, 0] = 1.0
    output = simulate_array(circuit, np.kron(zero, rho))
    x = GATE_MATRICES["X"]
    expected = np.kron(0.5 * (rho + x @ rho @ x), np.eye(8) / 8)
    assert_allclose(output, expected, atol=1e-12)


def test_scrambled_ancillas_give_nearly_mixed_outputs(rng: np.random.Generator) -> None:
    """Every nonzero ancilla basis state lands within the branch bound of I/d."""

    circuit, report = mixed_unitary_circuit(BIT_FLIP, 2)
    rho = random_density(rng, (2,))
    for k in range(1, 8):
        assert ancilla_mixing_residual(circuit, k, rho) <= report.predicted["branch_bound"] + 1e-9
    with pytest.raises(ValueError):
        ancilla_mixing_residual(circuit, 8, rho)


def test_measured_single_circuit(fast_cfg: OptimizerConfig) -> None:
    """A lone constructed circuit reports its honest and scrambled residuals."""

    circuit, report = mixed_unitary_circuit(BIT_FLIP, 2)
    measured = measure_mixed_unitary_circuit(report, BIT_FLIP, circuit, fast_cfg)
    assert measured.seed == fast_cfg.seed
    assert measured.measured["honest_residual"] < 1e-9
    assert measured.measured["worst_mixing_residual"] <= measured.measured["branch_bound"] + 1e-9


def test_circuit_construction_guards(x_circuit: Circuit) -> None:
    """Non-normal circuits, missing ancillas and negative padding are refused."""

    with pytest.raises(ValueError, match="normal form"):
        mixed_unitary_circuit(parse("qubits 1\nmeasure 0\n"))
    with pytest.raises(ValueError, match="at least one ancilla"):
        mixed_unitary_circuit(x_circuit)
    with pytest.raises(ValueError):
        mixed_unitary_circuit(x_circuit, -1)


def test_pair_distance_bracket(identity_circuit: Circuit, x_circuit: Circuit, fast_cfg: OptimizerConfig) -> None:
    """The honest branch keeps the distance and no branch exceeds it by more than epsilon."""

    c1, c2, report = mixed_unitary_pair(identity_circuit, x_circuit, 2)
    assert c1.n_inputs == c2.n_inputs == 3
    assert set(report.artifacts) == {"c1", "c2"}
    measured = structured_distance_bracket(report, identity_circuit, x_circuit, c1, c2, fast_cfg).measured
    assert measured["honest_branch"] == pytest.approx(2.0, abs=1e-6)
    assert measured["input_distance"] - 1e-6 <= measured["constructed_distance"] <= measured["upper"] + 1e-6
    assert measured["direct_distance"] == pytest.approx(2.0, abs=2e-3)
