"""Tests for the Close Images reductions."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel_lab.models.circuit import Circuit
from channel_lab.models.matrices import DensityMatrix, PureState
from channel_lab.models.reports import OptimizerConfig
from channel_lab.services.circuits import depth, parse
from channel_lab.services.close_images import (
    ci_to_logdepth,
    ci_to_qcd,
    flag_probabilities,
    fmax_close_images_grid,
    honest_logdepth_input,
    measure_ci_to_logdepth,
    measure_ci_to_qcd,
    measure_qip_to_close_images,
    qcd_witness_gap,
    qip_to_close_images,
)
from channel_lab.services.linalg import ptrace_array
from channel_lab.services.optimizers import diamond_distance, max_output_fidelity
from channel_lab.services.simulator import simulate, to_channel

ACCEPTING = parse("qubits 2\ngate CNOT 1 0\n")
REJECTING = parse("qubits 2\n")
CONSTANT_ZERO = parse("qubits 1\nancilla 1\ngate SWAP 0 1\ntraceout 1\n")
CONSTANT_ONE = parse("qubits 1\nancilla 1\ngate SWAP 0 1\ngate X 0\ntraceout 1\n")


# ----- Verifier to Close Images -----

def test_accepting_verifier_gives_intersecting_images(fast_cfg: OptimizerConfig) -> None:
    """Message |1> flips the accept flag, so both images contain |1><1|."""

    q1, q2, report = qip_to_close_images(ACCEPTING, ACCEPTING, ([0], [1]))
    assert q1.n_inputs == q2.n_inputs == 1
    assert report.padding["q1_inputs"] == 0
    assert max_output_fidelity(to_channel(q1), to_channel(q2), fast_cfg).value == pytest.approx(1.0, abs=1e-6)
    measured = measure_qip_to_close_images(report, q1, q2, fast_cfg).measured
    assert measured["acceptance"] == pytest.approx(1.0, abs=1e-6)
    assert measured["grid_acceptance"] == pytest.approx(1.0, abs=1e-6)


def test_rejecting_verifier_gives_disjoint_images(fast_cfg: OptimizerConfig) -> None:
    """A verifier that never accepts yields images with no overlap."""

    q1, q2, _ = qip_to_close_images(REJECTING, REJECTING, ([0], [1]))
    assert max_output_fidelity(to_channel(q1), to_channel(q2), fast_cfg).value == pytest.approx(0.0, abs=1e-9)


def test_wider_private_space_pads_the_first_circuit() -> None:
    """Two private wires leave one message wire and pad q1 by one input."""

    verifier = parse("qubits 3\ngate CNOT 2 0\ngate H 1\n")
    q1, q2, report = qip_to_close_images(verifier, verifier, ([0, 1], [2]))
    assert q1.n_inputs == q2.n_inputs == 2
    assert len(q1.output_wires) == len(q2.output_wires) == 2
    assert report.padding["q1_inputs"] == 1
    assert report.parameters == {"private": [0, 1], "message": [2]}


@pytest.mark.parametrize(
    ("v1", "spaces"),
    [
        (ACCEPTING, ([], [0, 1])),
        (ACCEPTING, ([0], [2])),
        (parse("qubits 3\n"), ([0], [1])),
        (parse("qubits 2\nmeasure 1\n"), ([0], [1])),
    ],
)
def test_qip_to_close_images_rejects_bad_verifiers(v1: Circuit, spaces: tuple) -> None:
    """Overlapping or incomplete wire splits are rejected."""

    with pytest.raises(ValueError):
        qip_to_close_images(v1, ACCEPTING, spaces)


# ----- Grid prover -----

def test_grid_prover_examples(identity_circuit: Circuit, x_circuit: Circuit, depolarizing_circuit: Circuit) -> None:
    """Overlapping images give 1, orthogonal constants 0, and I/2 against |0> gives 1/sqrt 2."""

    assert fmax_close_images_grid(identity_circuit, x_circuit, 4) == pytest.approx(1.0, abs=1e-6)
    assert fmax_close_images_grid(CONSTANT_ZERO, CONSTANT_ONE, 4) == pytest.approx(0.0, abs=1e-7)
    assert fmax_close_images_grid(depolarizing_circuit, CONSTANT_ZERO, 4) == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_grid_prover_needs_one_qubit_inputs() -> None:
    """The grid search refuses wider inputs."""

    with pytest.raises(ValueError):
        fmax_close_images_grid(parse("qubits 2\n"), parse("qubits 2\n"), 4)


# ----- Log-depth construction -----

def test_single_gate_pair_needs_no_boundaries() -> None:
    """A one-piece pair has no swap tests and no flags."""

    c1, c2, report = ci_to_logdepth(parse("qubits 1\ngate H 0\n"), parse("qubits 1\ngate X 0\n"))
    assert report.parameters["pieces"] == 1
    assert report.parameters["flags"] == 0
    assert c1.n_inputs == c2.n_inputs == 1


def test_honest_input_simulates_the_circuit() -> None:
    """On the honest input the last piece outputs Q(psi) and no test fires."""

    q1 = parse("qubits 1\ngate H 0\ngate T 0\n")
    q2 = parse("qubits 1\ngate X 0\ngate Z 0\n")
    c1, c2, report = ci_to_logdepth(q1, q2)
    assert report.parameters["pieces"] == 2
    assert report.parameters["flags"] == 4
    psi = PureState.from_array(np.array([0.6, 0.8j]))
    for circuit, source, first in ((c1, q1, True), (c2, q2, False)):
        honest = honest_logdepth_input(q1, q2, psi, first=first)
        output = simulate(circuit, honest.projector())
        assert output.dims == (2,) * 5
        assert_allclose(flag_probabilities(output, 4), [0.0] * 4, atol=1e-10)
        expected = simulate(source, psi.projector()).array
        assert_allclose(ptrace_array(output.array, output.dims, [0]), expected, atol=1e-10)


def test_dishonest_input_trips_a_test() -> None:
    """Supplying |0> and |1> as the two copies of the intermediate state is caught."""

    q1 = parse("qubits 1\ngate H 0\ngate T 0\n")
    c1, _, _ = ci_to_logdepth(q1, parse("qubits 1\ngate X 0\ngate Z 0\n"))
    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    cheat = np.kron(np.kron(zero, zero), one)
    output = simulate(c1, DensityMatrix.from_array(np.outer(cheat, cheat), (2, 2, 2)))
    assert max(flag_probabilities(output, 4)) > 0.1


def test_measured_logdepth_report(fast_cfg: OptimizerConfig) -> None:
    """Honest inputs leave no residual, a seeded mismatch clears the failure floor."""

    q1 = parse("qubits 1\ngate H 0\ngate T 0\n")
    q2 = parse("qubits 1\ngate X 0\ngate Z 0\n")
    c1, c2, report = ci_to_logdepth(q1, q2)
    measured = measure_ci_to_logdepth(report, q1, q2, c1, c2, fast_cfg)
    assert measured.seed == fast_cfg.seed
    values = measured.measured
    assert values["honest_residual"] < 1e-9
    assert values["honest_flag_max"] < 1e-9
    assert 0.0 < values["mismatch_distance"] <= 1.0
    assert values["mismatch_flag_max"] >= values["mismatch_floor"]
    assert values["depth_within_bound"] is True


@pytest.mark.parametrize("gates", [4, 8, 16])
def test_depth_grows_at_most_logarithmically(gates: int) -> None:
    """The constructed depth stays under alpha log2(size) + beta."""

    q1 = parse("qubits 1\n" + "gate H 0\ngate T 0\n" * (gates // 2))
    q2 = parse("qubits 1\n" + "gate X 0\ngate Z 0\n" * (gates // 2))
    c1, c2, report = ci_to_logdepth(q1, q2)
    assert report.parameters["size"] == gates
    assert report.parameters["depth"] == max(depth(c1), depth(c2))
    assert report.parameters["depth"] <= report.predicted["depth_bound"]
    assert report.predicted["depth_bound"] == pytest.approx(2 * math.log2(gates) + 12)


@pytest.mark.parametrize("distance", [0.1, 0.5, 0.9, 1.0])
def test_mismatched_copies_fail_with_the_promised_probability(distance: float) -> None:
    """Copies at trace distance t trip the first test with probability t^2 / 4."""

    q1 = parse("qubits 1\ngate H 0\ngate T 0\n")
    c1, _, report = ci_to_logdepth(q1, parse("qubits 1\ngate X 0\ngate Z 0\n"))
    angle = math.asin(distance)
    copy = np.array([1.0, 0.0])
    other = np.array([math.cos(angle), math.sin(angle)])
    state = np.kron(np.kron(np.array([0.6, 0.8]), copy), other)
    output = simulate(c1, DensityMatrix.from_array(np.outer(state, state), (2, 2, 2)))
    flags = flag_probabilities(output, 4)
    assert max(flags) >= report.predicted["failure_constant"] * distance**2
    assert flags[0] == pytest.approx(distance**2 / 4, abs=1e-9)


def test_logdepth_requires_normal_form() -> None:
    """Circuits with mid-circuit measurement are rejected."""

    with pytest.raises(ValueError, match="normal form"):
        ci_to_logdepth(parse("qubits 1\nmeasure 0\n"), parse("qubits 1\n"))


# ----- Close Images to distinguishability -----

def test_qcd_pair_of_overlapping_unitaries(identity_circuit: Circuit, x_circuit: Circuit, fast_cfg: OptimizerConfig) -> None:
    """Identity and X have fmax 1, so the pair is perfectly distinguishable."""

    c1, c2, report = ci_to_qcd(identity_circuit, x_circuit)
    assert c1.n_inputs == 2
    assert report.parameters["environment"] == 0
    assert diamond_distance(to_channel(c1), to_channel(c2), fast_cfg).value == pytest.approx(2.0, abs=1e-6)
    measured = measure_ci_to_qcd(report, identity_circuit, x_circuit, c1, c2, fast_cfg).measured
    assert measured["gap"] < 2e-3


def test_qcd_pair_of_orthogonal_constants(fast_cfg: OptimizerConfig) -> None:
    """Disjoint images decohere the control, leaving nothing to distinguish."""

    c1, c2, _ = ci_to_qcd(CONSTANT_ZERO, CONSTANT_ONE)
    assert diamond_distance(to_channel(c1), to_channel(c2), fast_cfg).value == pytest.approx(0.0, abs=1e-6)


def test_qcd_witness_gap(identity_circuit: Circuit, x_circuit: Circuit) -> None:
    """Inputs with overlapping images reach the full gap; others none."""

    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert qcd_witness_gap(identity_circuit, x_circuit, zero, one, 0.5) == pytest.approx(2.0)
    assert qcd_witness_gap(identity_circuit, x_circuit, zero, zero, 0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        qcd_witness_gap(identity_circuit, x_circuit, zero, one, 1.5)
