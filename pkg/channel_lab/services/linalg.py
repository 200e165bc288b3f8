"""Dense linear algebra on multipartite systems.

Subsystems are ordered left to right and the leftmost factor is the most
significant one in the Kronecker layout, so ``kron(a, b)[i*db + j]`` pairs
index ``i`` of ``a`` with index ``j`` of ``b``.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from channel_lab.models.matrices import ComplexMatrix, DensityMatrix, PureState
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)


# ----- Array helpers -----

def kron_all(*arrays: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of arrays (1x1 identity when empty)."""

    result = np.ones((1, 1), dtype=complex)
    for array in arrays:
        result = np.kron(result, array)
    return result


def ptrace_array(array: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a square operator over the subsystems not in ``keep``."""

    dims = tuple(dims)
    count = len(dims)
    kept = sorted(set(keep))
    if any(index < 0 or index >= count for index in kept):
        raise ValueError(f"subsystem indices {kept} out of range for dims {dims}")
    tensor = array.reshape(dims + dims)
    rows = list(range(count))
    cols = [count + index for index in range(count)]
    for index in range(count):
        if index not in kept:
            cols[index] = rows[index]
    out = [rows[index] for index in kept] + [cols[index] for index in kept]
    reduced = np.einsum(tensor, rows + cols, out)
    side = math.prod(dims[index] for index in kept)
    return reduced.reshape(side, side)


def permute_array(array: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square operator; factor ``perm[i]`` moves to slot ``i``."""

    dims = tuple(dims)
    count = len(dims)
    if sorted(perm) != list(range(count)):
        raise ValueError(f"{list(perm)} is not a permutation of {count} subsystems")
    tensor = array.reshape(dims + dims)
    axes = list(perm) + [count + index for index in perm]
    side = math.prod(dims)
    return tensor.transpose(axes).reshape(side, side)


def hermitian_eigh(array: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of the Hermitian part, eigenvalues descending."""

    values, vectors = scipy.linalg.eigh((array + array.conj().T) / 2)
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def top_eigenvector(array: np.ndarray) -> np.ndarray:
    """Eigenvector of the largest eigenvalue of a Hermitian matrix."""

    side = array.shape[0]
    _, vectors = scipy.linalg.eigh((array + array.conj().T) / 2, subset_by_index=[side - 1, side - 1])
    return vectors[:, 0]


def psd_sqrt_array(array: np.ndarray) -> np.ndarray:
    values, vectors = hermitian_eigh(array)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def trace_norm_array(array: np.ndarray) -> float:
    if array.shape[0] == array.shape[1] and np.allclose(array, array.conj().T, atol=1e-13, rtol=0.0):
        return float(np.sum(np.abs(np.linalg.eigvalsh((array + array.conj().T) / 2))))
    return float(np.sum(scipy.linalg.svdvals(array)))


def is_unitary(array: np.ndarray, tol: Optional[float] = None) -> bool:
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        return False
    side = array.shape[0]
    if tol is None:
        tol = get_settings().scaled_tol(side)
    return bool(np.max(np.abs(array.conj().T @ array - np.eye(side)), initial=0.0) <= tol)


def weyl_array(d: int, a: int, b: int) -> np.ndarray:
    shift = np.roll(np.eye(d, dtype=complex), a, axis=0)
    phases = np.exp(2j * np.pi * b * np.arange(d) / d)
    return shift * phases[np.newaxis, :]


def swap_array(d: int) -> np.ndarray:
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    return swap


# ----- Public API -----

def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product with concatenated subsystem lists."""

    return ComplexMatrix(
        data=np.kron(a.data, b.data),
        row_dims=a.row_dims + b.row_dims,
        col_dims=a.col_dims + b.col_dims,
    )


def partial_trace(m: ComplexMatrix, keep: Iterable[int]) -> ComplexMatrix:
    """Trace out every subsystem whose index is not in ``keep``."""

    if not m.is_square or m.row_dims != m.col_dims:
        raise ValueError("partial trace needs a square matrix over one dimension list")
    kept = sorted(set(keep))
    reduced = ptrace_array(m.data, m.row_dims, kept)
    dims = tuple(m.row_dims[index] for index in kept)
    return ComplexMatrix(data=reduced, row_dims=dims, col_dims=dims)


def permute_subsystems(m: ComplexMatrix, perm: Sequence[int]) -> ComplexMatrix:
    if m.row_dims != m.col_dims:
        raise ValueError("permutation needs matching row and column subsystems")
    dims = tuple(m.row_dims[index] for index in perm)
    return ComplexMatrix(data=permute_array(m.data, m.row_dims, perm), row_dims=dims, col_dims=dims)


def spectral(h: ComplexMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending, ties in solver order) and orthonormal eigenvector columns."""

    array = h.data
    if not h.is_square:
        raise ValueError(f"spectral decomposition needs a square matrix, got {array.shape}")
    tol = get_settings().scaled_tol(array.shape[0])
    deviation = float(np.max(np.abs(array - array.conj().T), initial=0.0))
    if deviation > tol:
        raise ValueError(f"matrix is not Hermitian (deviation {deviation:.3e})")
    return hermitian_eigh(array)


def svd(m: ComplexMatrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(s, left, right)`` with ``m == left @ diag(s) @ right.conj().T``."""

    left, values, right_h = scipy.linalg.svd(m.data, full_matrices=False)
    return values, left, right_h.conj().T


def psd_sqrt(p: ComplexMatrix) -> ComplexMatrix:
    """Positive square root; eigenvalues inside the tolerance band are clipped to zero."""

    values, vectors = spectral(p)
    tol = get_settings().scaled_tol(p.rows)
    if values.size and values[-1] < -tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {values[-1]:.3e})")
    if values.size and values[-1] < 0:
        LOGGER.debug("Clipping eigenvalue %.3e to zero", values[-1])
    roots = np.sqrt(np.clip(values, 0.0, None))
    return ComplexMatrix(
        data=(vectors * roots) @ vectors.conj().T,
        row_dims=p.row_dims,
        col_dims=p.col_dims,
    )


def weyl_operator(d: int, a: int, b: int) -> ComplexMatrix:
    """Discrete Weyl operator ``X^a Z^b`` with ``omega = exp(2 pi i / d)``."""

    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"Weyl index ({a}, {b}) out of range for d={d}")
    return ComplexMatrix.from_array(weyl_array(d, a, b))


def swap_operator(d: int) -> ComplexMatrix:
    """The operator exchanging the two factors of C^d (x) C^d."""

    return ComplexMatrix.from_array(swap_array(d), (d, d), (d, d))


def purify(rho: DensityMatrix) -> PureState:
    """Purification ``sum_i sqrt(l_i) |phi_i>|i>`` on ``dims ++ dims``."""

    values, vectors = hermitian_eigh(rho.array)
    weights = np.sqrt(np.clip(values, 0.0, None))
    amplitudes = (vectors * weights).reshape(-1)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return PureState(amplitudes=amplitudes, dims=rho.dims + rho.dims)


def schmidt(psi: PureState, cut: Iterable[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt coefficients with left (cut side) and right vectors as columns."""

    dims = psi.dims
    left_side = sorted(set(cut))
    if not left_side or len(left_side) >= len(dims) or any(i < 0 or i >= len(dims) for i in left_side):
        raise ValueError(f"cut {left_side} must be a nonempty proper subset of {len(dims)} subsystems")
    right_side = [index for index in range(len(dims)) if index not in left_side]
    tensor_form = psi.amplitudes.reshape(dims).transpose(left_side + right_side)
    d_left = math.prod(dims[index] for index in left_side)
    left, values, right_h = scipy.linalg.svd(tensor_form.reshape(d_left, -1), full_matrices=False)
    rank = int(np.sum(values > get_settings().tol_exact))
    return values[:rank], left[:, :rank], right_h[:rank, :].T


# ----- Random objects -----

def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary."""

    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(d, random_state=rng)


def random_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    """Normalized complex Gaussian vector (Haar distributed on the sphere)."""

    vector = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return vector / np.linalg.norm(vector)


def random_state(rng: np.random.Generator, dims: Sequence[int]) -> PureState:
    return PureState(amplitudes=random_vector(rng, math.prod(dims)), dims=tuple(dims))


def random_density(
    rng: np.random.Generator,
    dims: Sequence[int],
    rank: Optional[int] = None,
) -> DensityMatrix:
    """Random mixed state from a Ginibre matrix of the given rank (full rank by default)."""

    d = math.prod(dims)
    rank = d if rank is None else rank
    ginibre = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = ginibre @ ginibre.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix.from_array(rho / np.trace(rho).real, dims)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    raw = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (raw + raw.conj().T) / 2


def bell_projector(d: int = 2) -> np.ndarray:
    """Projector onto ``sum_i |ii> / sqrt(d)``."""

    vector = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    return np.outer(vector, vector.conj())
