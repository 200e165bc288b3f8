"""Tests for dense multipartite linear algebra."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from channel_lab.models.matrices import ComplexMatrix, DensityMatrix, PureState
from channel_lab.services.linalg import (
    bell_projector,
    kron_all,
    partial_trace,
    permute_subsystems,
    psd_sqrt,
    ptrace_array,
    purify,
    random_density,
    random_unitary,
    schmidt,
    spectral,
    svd,
    swap_operator,
    tensor,
    weyl_array,
    weyl_operator,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def test_tensor_of_identities_is_identity() -> None:
    """I2 (x) I2 is I4 over two qubit subsystems."""

    eye = ComplexMatrix.from_array(np.eye(2))
    result = tensor(eye, eye)
    assert result.row_dims == (2, 2)
    assert_allclose(result.data, np.eye(4))


def test_tensor_of_flips_maps_basis_state() -> None:
    """X (x) X sends |00> to |11>."""

    flip = ComplexMatrix.from_array(PAULI_X)
    result = tensor(flip, flip).data
    zero = np.zeros(4)
    zero[0] = 1.0
    assert_allclose(result @ zero, np.eye(4)[3])


def test_partial_trace_of_bell_projector_is_maximally_mixed() -> None:
    """Tracing either half of a Bell pair leaves I/2."""

    bell = ComplexMatrix.from_array(bell_projector(2), (2, 2))
    assert_allclose(partial_trace(bell, [0]).data, np.eye(2) / 2, atol=1e-12)
    assert_allclose(partial_trace(bell, [1]).data, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_over_everything_is_the_trace(rng: np.random.Generator) -> None:
    """Keeping no subsystem gives the 1x1 trace."""

    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    reduced = partial_trace(ComplexMatrix.from_array(m, (2, 3)), [])
    assert reduced.data.shape == (1, 1)
    assert reduced.data[0, 0] == pytest.approx(np.trace(m))


def test_partial_trace_rejects_bad_index() -> None:
    """Out-of-range subsystem indices are rejected."""

    with pytest.raises(ValueError):
        ptrace_array(np.eye(4), (2, 2), [2])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), d_a=st.integers(1, 3), d_b=st.integers(1, 3))
def test_partial_trace_of_product_factorizes(seed: int, d_a: int, d_b: int) -> None:
    """tr_B(rho (x) sigma) == tr(sigma) rho."""

    generator = np.random.default_rng(seed)
    rho = random_density(generator, (d_a,)).array
    sigma = 0.7 * random_density(generator, (d_b,)).array
    assert_allclose(ptrace_array(np.kron(rho, sigma), (d_a, d_b), [0]), 0.7 * rho, atol=1e-12)


def test_spectral_orders_eigenvalues_descending() -> None:
    """Identity has a flat spectrum and Z has (1, -1)."""

    values, _ = spectral(ComplexMatrix.from_array(np.eye(2)))
    assert_allclose(values, [1.0, 1.0])
    values, vectors = spectral(ComplexMatrix.from_array(PAULI_Z))
    assert_allclose(values, [1.0, -1.0])
    assert_allclose(vectors.conj().T @ vectors, np.eye(2), atol=1e-12)


def test_spectral_rejects_non_hermitian() -> None:
    """A nilpotent matrix is not Hermitian."""

    with pytest.raises(ValueError, match="Hermitian"):
        spectral(ComplexMatrix.from_array(np.array([[0, 1], [0, 0]])))


def test_svd_of_unitary_and_rank_one(rng: np.random.Generator) -> None:
    """Unitaries have unit singular values; s |a><b| has the single value s."""

    values, _, _ = svd(ComplexMatrix.from_array(random_unitary(rng, 3)))
    assert_allclose(values, np.ones(3), atol=1e-12)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    rank_one = 2.5 * np.outer(a / np.linalg.norm(a), (b / np.linalg.norm(b)).conj())
    values, left, right = svd(ComplexMatrix.from_array(rank_one))
    assert values[0] == pytest.approx(2.5)
    assert_allclose(values[1:], 0.0, atol=1e-12)
    assert_allclose(left @ np.diag(values) @ right.conj().T, rank_one, atol=1e-12)


def test_psd_sqrt_examples() -> None:
    """sqrt(I) == I and sqrt(diag(4, 9)) == diag(2, 3)."""

    assert_allclose(psd_sqrt(ComplexMatrix.from_array(np.eye(3))).data, np.eye(3), atol=1e-12)
    assert_allclose(psd_sqrt(ComplexMatrix.from_array(np.diag([4.0, 9.0]))).data, np.diag([2.0, 3.0]), atol=1e-12)


def test_psd_sqrt_rejects_negative_matrix() -> None:
    """A clearly negative eigenvalue is an error."""

    with pytest.raises(ValueError, match="positive semidefinite"):
        psd_sqrt(ComplexMatrix.from_array(np.diag([1.0, -1.0])))


def test_weyl_operators_are_shift_times_phase() -> None:
    """X^a Z^b shifts basis states and multiplies by powers of omega."""

    shift = weyl_array(3, 1, 0)
    assert_allclose(shift @ np.eye(3)[0], np.eye(3)[1])
    omega = np.exp(2j * np.pi / 3)
    assert_allclose(weyl_array(3, 0, 1), np.diag([1.0, omega, omega**2]), atol=1e-12)
    assert_allclose(weyl_operator(2, 1, 1).data, PAULI_X @ PAULI_Z, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_operators_form_an_orthogonal_unitary_basis(d: int) -> None:
    """tr(W_ab^dagger W_ce) == d delta and every W is unitary."""

    ops = [weyl_array(d, a, b) for a in range(d) for b in range(d)]
    for i, first in enumerate(ops):
        assert_allclose(first.conj().T @ first, np.eye(d), atol=1e-12)
        for j, second in enumerate(ops):
            expected = d if i == j else 0.0
            assert abs(np.trace(first.conj().T @ second) - expected) < 1e-10


def test_weyl_operator_rejects_out_of_range_index() -> None:
    """Indices must lie in 0..d-1."""

    with pytest.raises(ValueError):
        weyl_operator(2, 2, 0)


def test_swap_and_permutation_exchange_factors(rng: np.random.Generator) -> None:
    """W (a (x) b) W == b (x) a and the subsystem permutation agrees."""

    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3))
    swap = swap_operator(3).data
    assert_allclose(swap @ np.kron(a, b) @ swap, np.kron(b, a), atol=1e-12)
    permuted = permute_subsystems(ComplexMatrix.from_array(np.kron(a, b), (3, 3)), [1, 0])
    assert_allclose(permuted.data, np.kron(b, a), atol=1e-12)


def test_kron_all_matches_nested_kron(rng: np.random.Generator) -> None:
    """kron_all is the left-to-right Kronecker product."""

    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    assert_allclose(kron_all(a, b, c), np.kron(np.kron(a, b), c))
    assert_allclose(kron_all(), np.ones((1, 1)))


def test_purify_pure_and_mixed_states(rng: np.random.Generator) -> None:
    """Purifications reproduce the state as a marginal."""

    maximally_mixed = DensityMatrix.maximally_mixed((2,))
    psi = purify(maximally_mixed)
    assert psi.dims == (2, 2)
    projector = np.outer(psi.amplitudes, psi.amplitudes.conj())
    assert_allclose(ptrace_array(projector, (2, 2), [0]), np.eye(2) / 2, atol=1e-12)
    coefficients, _, _ = schmidt(psi, [0])
    assert_allclose(coefficients, [1 / math.sqrt(2)] * 2, atol=1e-12)

    rho = random_density(rng, (3,))
    psi = purify(rho)
    projector = np.outer(psi.amplitudes, psi.amplitudes.conj())
    assert_allclose(ptrace_array(projector, (3, 3), [0]), rho.array, atol=1e-12)


def test_purify_pure_state_is_product_with_reference(rng: np.random.Generator) -> None:
    """A pure input purifies to a product state with one Schmidt coefficient."""

    vector = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    state = PureState.from_array(vector / np.linalg.norm(vector))
    psi = purify(state.projector())
    coefficients, left, _ = schmidt(psi, [0])
    assert coefficients[0] == pytest.approx(1.0)
    assert np.all(coefficients[1:] < 1e-6)
    assert abs(np.vdot(left[:, 0], state.amplitudes)) == pytest.approx(1.0)


def test_schmidt_of_bell_state() -> None:
    """A Bell state has two equal coefficients."""

    bell = PureState.from_array(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))
    coefficients, _, _ = schmidt(bell, [0])
    assert_allclose(coefficients, [1 / math.sqrt(2)] * 2, atol=1e-12)
