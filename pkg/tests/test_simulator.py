"""Tests for density-matrix simulation and circuit compilation."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel_lab.errors import DimensionCapError
from channel_lab.models.circuit import Circuit
from channel_lab.models.matrices import DensityMatrix
from channel_lab.services.channels import (
    channel_distance,
    choi,
    dephasing_channel,
    kraus_from_stinespring,
    unitary_channel,
)
from channel_lab.services.circuits import controlled_block, gate, parse, random_circuit
from channel_lab.services.linalg import bell_projector, random_density
from channel_lab.services.simulator import (
    GATE_MATRICES,
    circuit_unitary,
    simulate,
    simulate_array,
    stinespring_rep,
    to_channel,
    zero_input_output,
)
from channel_lab.utils.config import Settings


def test_gate_matrices_are_unitary() -> None:
    """Every gate matrix is unitary."""

    for name, matrix in GATE_MATRICES.items():
        assert_allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), atol=1e-12, err_msg=name)


def test_eight_t_gates_are_the_identity() -> None:
    """T has order eight."""

    assert_allclose(circuit_unitary([gate("T", 0)] * 8, [0]), np.eye(2), atol=1e-12)


def test_hadamard_circuit_compiles_to_hadamard() -> None:
    """A lone H compiles to the Hadamard channel."""

    phi = to_channel(parse("qubits 1\ngate H 0\n"))
    assert channel_distance(phi, unitary_channel(GATE_MATRICES["H"])) < 1e-12


def test_circuit_unitary_wire_order() -> None:
    """The first listed wire is the most significant factor."""

    cnot = GATE_MATRICES["CNOT"]
    swap = GATE_MATRICES["SWAP"]
    assert_allclose(circuit_unitary([gate("CNOT", 0, 1)], [0, 1]), cnot, atol=1e-12)
    assert_allclose(circuit_unitary([gate("CNOT", 1, 0)], [0, 1]), swap @ cnot @ swap, atol=1e-12)
    assert_allclose(circuit_unitary([controlled_block(0, [gate("X", 1)])], [0, 1]), cnot, atol=1e-12)


def test_circuit_unitary_rejects_non_unitary() -> None:
    """Non-unitary instructions have no unitary."""

    with pytest.raises(ValueError):
        circuit_unitary(parse("qubits 1\nmeasure 0\n").instructions, [0])


def test_x_flips_the_zero_input(x_circuit: Circuit) -> None:
    """X maps |0> to |1>."""

    assert_allclose(zero_input_output(x_circuit).array, np.diag([0.0, 1.0]), atol=1e-12)


@pytest.mark.parametrize(
    "text",
    [
        "qubits 1\nancilla 1\ngate CNOT 0 1\ntraceout 1\n",
        "qubits 1\nmeasure 0\n",
    ],
)
def test_copying_into_a_discarded_ancilla_dephases(text: str) -> None:
    """CNOT onto a traced ancilla and a measurement both kill coherences."""

    assert channel_distance(to_channel(parse(text)), dephasing_channel(2)) < 1e-12


def test_depolarize_statement_has_flat_choi(depolarizing_circuit: Circuit) -> None:
    """The depolarize statement compiles to the flat Choi matrix I / 2."""

    assert_allclose(choi(to_channel(depolarizing_circuit)).data, np.eye(4) / 2, atol=1e-12)


def test_mixu_averages_with_the_identity(rng: np.random.Generator) -> None:
    """mixu { X } is rho -> (rho + X rho X) / 2."""

    rho = random_density(rng, (2,))
    out = simulate(parse("qubits 1\nmixu {\n  gate X 0\n}\n"), rho)
    x = GATE_MATRICES["X"]
    assert_allclose(out.array, (rho.array + x @ rho.array @ x) / 2, atol=1e-12)


def test_cdepol_depolarizes_only_under_control(rng: np.random.Generator) -> None:
    """Control |1> depolarizes the target and control |0> leaves it alone."""

    circuit = parse("qubits 2\ncdepol 0 1\n")
    target = random_density(rng, (2,)).array
    off = simulate(circuit, DensityMatrix.from_array(np.kron(np.diag([1.0, 0.0]), target), (2, 2)))
    assert_allclose(off.array, np.kron(np.diag([1.0, 0.0]), target), atol=1e-12)
    on = simulate(circuit, DensityMatrix.from_array(np.kron(np.diag([0.0, 1.0]), target), (2, 2)))
    assert_allclose(on.array, np.kron(np.diag([0.0, 1.0]), np.eye(2) / 2), atol=1e-12)


def test_simulate_with_reference_system() -> None:
    """A Bell pair through an idle wire is unchanged."""

    bell = DensityMatrix.from_array(bell_projector(2), (2, 2))
    out = simulate(parse("qubits 1\n"), bell, ref_dims=(2,))
    assert out.dims == (2, 2)
    assert_allclose(out.array, bell_projector(2), atol=1e-12)


def test_simulate_rejects_wrong_dimensions(rng: np.random.Generator) -> None:
    """Input states must match the circuit's input count."""

    with pytest.raises(ValueError):
        simulate(parse("qubits 2\n"), random_density(rng, (2,)))
    with pytest.raises(ValueError):
        simulate_array(parse("qubits 1\n"), np.eye(4))


def test_compiled_channels_keep_their_dilation(rng: np.random.Generator) -> None:
    """The Stinespring unitary read off the circuit reproduces the Choi matrix."""

    circuit = random_circuit(rng, 2, n_ancillas=1, n_gates=15, n_traced=2)
    phi = to_channel(circuit)
    assert phi.stinespring is not None
    assert channel_distance(kraus_from_stinespring(phi), phi) < 1e-10
    rep = stinespring_rep(circuit)
    assert rep.anc_dims == (2,)
    assert rep.env_dims == (2, 2)


def test_normal_form_of_measurement_has_one_environment_qubit() -> None:
    """A measurement dilates with one ancilla and one environment qubit."""

    rep = stinespring_rep(parse("qubits 1\nmeasure 0\n"))
    assert rep.anc_dims == (2,)
    assert rep.env_dims == (2,)


def test_compilation_cap() -> None:
    """Channels on too many qubits are refused before any allocation."""

    with pytest.raises(DimensionCapError) as excinfo:
        to_channel(parse("qubits 7\n"))
    assert excinfo.value.requested == 7
    assert excinfo.value.cap == 6


def test_simulation_cap() -> None:
    """The peak live dimension times the reference must stay under the cap."""

    with pytest.raises(DimensionCapError):
        simulate_array(parse("qubits 13\n"), np.eye(1))


def test_caps_follow_settings(monkeypatch: pytest.MonkeyPatch) -> None:
    """Lowering the compilation cap refuses a two-qubit channel."""

    monkeypatch.setattr("channel_lab.services.simulator.get_settings", lambda: Settings(choi_max_qubits=1))
    with pytest.raises(DimensionCapError) as excinfo:
        to_channel(parse("qubits 2\n"))
    assert excinfo.value.cap == 1
