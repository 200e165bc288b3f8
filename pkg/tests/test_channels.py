"""Tests for channel representations and their conversions."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel_lab.errors import MissingRepresentationError
from channel_lab.models.matrices import DensityMatrix
from channel_lab.services.channels import (
    Channel,
    MixedUnitaryRep,
    apply,
    apply_array,
    channel_distance,
    choi,
    complement,
    compose,
    controlled_weyl_channel,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    kraus_from_choi,
    kraus_from_stinespring,
    random_channel,
    tensor_channels,
    unitary_channel,
    verify_degrading,
)
from channel_lab.services.circuits import parse, random_circuit
from channel_lab.services.linalg import bell_projector, ptrace_array, random_density, random_unitary, swap_array
from channel_lab.services.simulator import to_channel

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
ZERO = np.diag([1.0, 0.0]).astype(complex)
ONE = np.diag([0.0, 1.0]).astype(complex)


def _constant_zero_channel() -> Channel:
    """Swap the input into the environment; the output is the fresh ancilla."""

    return Channel.from_stinespring(swap_array(2), (2,), (2,), anc_dims=(2,), env_dims=(2,))


# ----- Application -----

def test_identity_channel_leaves_states_alone(rng: np.random.Generator) -> None:
    """Id(rho) == rho, also with a reference system attached."""

    rho = random_density(rng, (2, 3))
    out = apply(identity_channel((2,)), rho, ref_dims=(3,))
    assert out.dims == (2, 3)
    assert_allclose(out.array, rho.array, atol=1e-12)


def test_depolarizer_outputs_maximally_mixed(rng: np.random.Generator) -> None:
    """The completely depolarizing channel sends every state to I/d."""

    rho = random_density(rng, (3,))
    assert_allclose(apply(depolarizing_channel(3), rho).array, np.eye(3) / 3, atol=1e-10)


def test_unitary_flip_maps_zero_to_one() -> None:
    """X-conjugation of |0><0| is |1><1|."""

    out = apply(unitary_channel(PAULI_X), DensityMatrix.from_array(ZERO))
    assert_allclose(out.array, ONE, atol=1e-12)


def test_apply_rejects_dimension_mismatch(rng: np.random.Generator) -> None:
    """The state must live on in_dims ++ ref_dims."""

    with pytest.raises(ValueError, match="do not match"):
        apply(identity_channel((2,)), random_density(rng, (3,)))


# ----- Choi matrices -----

def test_choi_of_identity_is_twice_bell_projector() -> None:
    """J(Id) is the unnormalized maximally entangled projector."""

    assert_allclose(choi(identity_channel((2,))).data, 2 * bell_projector(2), atol=1e-12)


def test_choi_of_qubit_depolarizer() -> None:
    """J(depolarizer) == I4 / 2."""

    assert_allclose(choi(depolarizing_channel(2)).data, np.eye(4) / 2, atol=1e-12)


def test_choi_of_random_circuit_is_valid(rng: np.random.Generator) -> None:
    """Compiled circuits have PSD Choi matrices whose output marginal is the identity."""

    circuit = random_circuit(rng, 2, n_ancillas=1, n_gates=12, n_traced=1)
    phi = to_channel(circuit)
    assert np.linalg.eigvalsh(phi.choi_matrix)[0] > -1e-10
    marginal = ptrace_array(phi.choi_matrix, (phi.out_dim, phi.in_dim), [1])
    assert_allclose(marginal, np.eye(4), atol=1e-10)


def test_non_trace_preserving_choi_is_rejected() -> None:
    """A Choi matrix with the wrong marginal is not a channel."""

    with pytest.raises(ValueError, match="trace preserving"):
        Channel.from_choi(np.eye(4), (2,), (2,))


# ----- Kraus conversions -----

def test_kraus_from_trivial_stinespring() -> None:
    """U = I with a one-dimensional environment gives the single Kraus operator I."""

    phi = kraus_from_stinespring(identity_channel((2,)))
    assert phi.kraus.shape == (1, 2, 2)
    assert_allclose(phi.kraus[0], np.eye(2), atol=1e-12)


def test_kraus_from_swap_stinespring_is_constant_channel(rng: np.random.Generator) -> None:
    """Swapping input and ancilla realizes rho -> |0><0|."""

    phi = kraus_from_stinespring(_constant_zero_channel())
    assert phi.kraus.shape[0] == 2
    for _ in range(3):
        rho = random_density(rng, (2,)).array
        out = sum(k @ rho @ k.conj().T for k in phi.kraus)
        assert_allclose(out, ZERO, atol=1e-12)


def test_kraus_from_stinespring_needs_the_rep() -> None:
    """Channels built from mixtures carry no dilation."""

    with pytest.raises(MissingRepresentationError):
        kraus_from_stinespring(depolarizing_channel(2))


def test_kraus_from_identity_choi_is_a_phase() -> None:
    """The identity's Choi matrix has rank one; its Kraus operator is I up to phase."""

    phi = kraus_from_choi(Channel.from_choi(2 * bell_projector(2), (2,), (2,)))
    assert phi.kraus.shape == (1, 2, 2)
    operator = phi.kraus[0]
    assert abs(operator[0, 0]) == pytest.approx(1.0)
    assert_allclose(operator / operator[0, 0], np.eye(2), atol=1e-10)


def test_kraus_from_depolarizer_choi(rng: np.random.Generator) -> None:
    """I4/2 gives four Kraus operators reproducing the depolarizer."""

    phi = kraus_from_choi(Channel.from_choi(np.eye(4) / 2, (2,), (2,)))
    assert phi.kraus.shape[0] == 4
    rho = random_density(rng, (2,)).array
    out = sum(k @ rho @ k.conj().T for k in phi.kraus)
    assert_allclose(out, np.eye(2) / 2, atol=1e-12)


def test_kraus_round_trip_of_random_channel(rng: np.random.Generator) -> None:
    """choi -> kraus -> choi recovers the matrix."""

    phi = random_channel(rng, (2,), (3,), (2,))
    recovered = kraus_from_choi(Channel.from_choi(phi.choi_matrix, phi.in_dims, phi.out_dims))
    vectors = recovered.kraus.reshape(recovered.kraus.shape[0], -1)
    assert recovered.kraus.shape[0] <= 2 * 3
    assert np.max(np.abs(vectors.T @ vectors.conj() - phi.choi_matrix)) < 1e-9


# ----- Complements -----

def test_complement_of_constant_channel_is_identity() -> None:
    """The environment of the swap dilation holds the input."""

    assert_allclose(complement(_constant_zero_channel()).choi_matrix, 2 * bell_projector(2), atol=1e-12)


def test_complement_of_identity_is_the_trace(rng: np.random.Generator) -> None:
    """With a trivial environment the complement outputs the scalar trace."""

    trace = complement(identity_channel((2,)))
    assert trace.out_dim == 1
    rho = random_density(rng, (2,)).array
    assert_allclose(apply_array(trace, rho), [[1.0]], atol=1e-12)


def test_double_complement_recovers_the_channel(rng: np.random.Generator) -> None:
    """Swapping output and environment twice is the identity on channels."""

    phi = random_channel(rng, (2,), (2,), (2,))
    assert channel_distance(complement(complement(phi)), phi) < 1e-10


# ----- Composition -----

def test_compose_with_identity(rng: np.random.Generator) -> None:
    """Id o phi == phi."""

    phi = random_channel(rng, (2,), (2,), (3,))
    assert channel_distance(compose(identity_channel((2,)), phi), phi) < 1e-10


def test_compose_unitary_with_inverse(rng: np.random.Generator) -> None:
    """U^dagger o U is the identity channel."""

    u = random_unitary(rng, 3)
    joined = compose(unitary_channel(u.conj().T), unitary_channel(u))
    assert channel_distance(joined, identity_channel((3,))) < 1e-10


def test_compose_rejects_mismatch(rng: np.random.Generator) -> None:
    """The inner output must feed the outer input."""

    with pytest.raises(ValueError):
        compose(identity_channel((2,)), random_channel(rng, (2,), (3,), (2,)))


def test_compose_rejects_a_different_subsystem_split() -> None:
    """A ququart cannot feed a pair of qubits even though the total dimensions agree."""

    with pytest.raises(ValueError, match="cannot compose"):
        compose(identity_channel((2, 2)), identity_channel((4,)))
    assert compose(identity_channel((2, 2)), identity_channel((2, 2))).in_dims == (2, 2)


def test_tensor_of_depolarizers(rng: np.random.Generator) -> None:
    """depol(2) (x) depol(3) sends every state to I/6."""

    joined = tensor_channels(depolarizing_channel(2), depolarizing_channel(3))
    rho = random_density(rng, (2, 3))
    assert_allclose(apply(joined, rho).array, np.eye(6) / 6, atol=1e-10)
    assert len(joined.mixed_unitary) == 2


def test_tensor_keeps_stinespring(rng: np.random.Generator) -> None:
    """Products of dilated channels stay dilated and agree with the Choi product."""

    phi = random_channel(rng, (2,), (2,), (2,))
    psi = unitary_channel(random_unitary(rng, 2))
    joined = tensor_channels(phi, psi)
    assert joined.stinespring is not None
    rho = random_density(rng, (2, 2)).array
    direct = np.kron(apply_array(phi, np.eye(2) / 2), apply_array(psi, np.eye(2) / 2))
    assert_allclose(apply_array(joined, np.eye(4) / 4), direct, atol=1e-12)
    assert apply_array(joined, rho).shape == (4, 4)


# ----- Named channels -----

def test_dephaser_kills_off_diagonals() -> None:
    """dephaser(4) maps |i><j| to delta_ij |i><j|."""

    phi = dephasing_channel(4)
    for i in range(4):
        for j in range(4):
            unit = np.zeros((4, 4), dtype=complex)
            unit[i, j] = 1.0
            expected = unit if i == j else np.zeros((4, 4))
            assert_allclose(apply_array(phi, unit), expected, atol=1e-12)


def test_one_dimensional_dephaser_is_identity() -> None:
    """With d = 1 there is nothing to dephase."""

    assert channel_distance(dephasing_channel(1), identity_channel((1,))) < 1e-12


@pytest.mark.parametrize("phi", [depolarizing_channel(3), dephasing_channel(3)])
def test_mixed_unitary_channels_are_unital(phi: Channel) -> None:
    """Mixtures of unitaries fix the identity."""

    assert_allclose(apply_array(phi, np.eye(3)), np.eye(3), atol=1e-10)


def test_mixed_unitary_rep_rejects_bad_probabilities() -> None:
    """Probabilities must sum to one."""

    with pytest.raises(ValueError):
        MixedUnitaryRep(probabilities=[0.5, 0.4], unitaries=np.array([np.eye(2), PAULI_X]))


def test_controlled_weyl_branches(rng: np.random.Generator) -> None:
    """Control |0,0> applies phi; a uniform control fully depolarizes."""

    phi = random_channel(rng, (2,), (2,), (2,))
    controlled = controlled_weyl_channel(phi)
    assert controlled.in_dims == (2, 2, 2)
    rho = random_density(rng, (2,)).array
    zero_control = np.zeros((4, 4), dtype=complex)
    zero_control[0, 0] = 1.0
    assert_allclose(apply_array(controlled, np.kron(rho, zero_control)), apply_array(phi, rho), atol=1e-12)
    assert_allclose(apply_array(controlled, np.kron(rho, np.eye(4) / 4)), np.eye(2) / 2, atol=1e-10)


def test_identity_does_not_degrade_a_depolarizer() -> None:
    """A depolarized register next to an idle one is far from its environment."""

    phi = to_channel(parse("qubits 2\ndepolarize 0\n"))
    check = verify_degrading(identity_channel((2, 2)), phi)
    assert not check.passed
    assert check.residual >= 0.1
