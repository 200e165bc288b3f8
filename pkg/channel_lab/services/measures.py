"""Norms, entropies, fidelities and state discrimination."""

from __future__ import annotations

import logging
import math
from typing import Iterable, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict

from channel_lab.models.matrices import ComplexMatrix, DensityMatrix, PureState
from channel_lab.services.linalg import hermitian_eigh, psd_sqrt_array, trace_norm_array
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

MatrixLike = Union[ComplexMatrix, DensityMatrix, np.ndarray]


def _as_array(m: MatrixLike) -> np.ndarray:
    if isinstance(m, DensityMatrix):
        return m.array
    if isinstance(m, ComplexMatrix):
        return m.data
    return np.asarray(m, dtype=complex)


def _same_dims(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dims != sigma.dims:
        raise ValueError(f"state dims differ: {rho.dims} vs {sigma.dims}")


def trace_norm(m: MatrixLike) -> float:
    """Sum of singular values."""

    return trace_norm_array(_as_array(m))


def schatten_norm(m: MatrixLike, p: float) -> float:
    """Schatten p-norm; ``p = math.inf`` gives the operator norm."""

    if p < 1:
        raise ValueError(f"Schatten norms need p >= 1, got {p}")
    values = scipy.linalg.svdvals(_as_array(m))
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values[0])
    top = float(values[0])
    if top == 0.0:
        return 0.0
    return float(top * np.sum((values / top) ** p) ** (1.0 / p))


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``tr sqrt(sqrt(rho) sigma sqrt(rho))`` clamped to [0, 1]."""

    _same_dims(rho, sigma)
    return fidelity_array(rho.array, sigma.array)


def fidelity_array(rho: np.ndarray, sigma: np.ndarray) -> float:
    value = float(np.sum(scipy.linalg.svdvals(psd_sqrt_array(rho) @ psd_sqrt_array(sigma))))
    return min(1.0, max(0.0, value))


def fidelity_via_purifications(psi: PureState, phi: PureState, keep: Iterable[int]) -> float:
    """Trace norm of ``tr_X |psi><phi|`` where X are the subsystems not in ``keep``."""

    if psi.dims != phi.dims:
        raise ValueError(f"state dims differ: {psi.dims} vs {phi.dims}")
    dims = psi.dims
    kept = sorted(set(keep))
    traced = [index for index in range(len(dims)) if index not in kept]
    order = traced + kept
    d_kept = math.prod(dims[index] for index in kept)
    left = psi.amplitudes.reshape(dims).transpose(order).reshape(-1, d_kept)
    right = phi.amplitudes.reshape(dims).transpose(order).reshape(-1, d_kept)
    return trace_norm_array(left.T @ right.conj())


class HelstromResult(BaseModel):
    """Optimal two-outcome measurement for a pair of equiprobable states."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    success_probability: float
    projectors: Tuple[np.ndarray, np.ndarray]


def helstrom(rho: DensityMatrix, sigma: DensityMatrix) -> HelstromResult:
    """Success probability ``1/2 + ||rho - sigma||_1 / 4`` and the measurement achieving it."""

    _same_dims(rho, sigma)
    return helstrom_array(rho.array, sigma.array)


def helstrom_array(rho: np.ndarray, sigma: np.ndarray) -> HelstromResult:
    values, vectors = hermitian_eigh(rho - sigma)
    positive = vectors[:, values > 0]
    first = positive @ positive.conj().T
    second = np.eye(rho.shape[0]) - first
    success = 0.5 + 0.25 * float(np.sum(np.abs(values)))
    return HelstromResult(success_probability=min(1.0, success), projectors=(first, second))


def _spectrum(rho: DensityMatrix) -> np.ndarray:
    values = np.linalg.eigvalsh(rho.array)
    return values[values > get_settings().entropy_floor]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits."""

    return entropy_of_spectrum(_spectrum(rho))


def entropy_of_spectrum(values: np.ndarray) -> float:
    values = values[values > get_settings().entropy_floor]
    return float(max(0.0, -np.sum(values * np.log2(values))))


def renyi_entropy(rho: DensityMatrix, p: float) -> float:
    """Renyi entropy of order p in bits (``p = math.inf`` gives the min-entropy)."""

    if p < 1 or p == 1:
        raise ValueError(f"Renyi order must satisfy p >= 1 and p != 1, got {p}")
    values = _spectrum(rho)
    if math.isinf(p):
        return float(-np.log2(values.max()))
    return float(np.log2(np.sum(values**p)) / (1.0 - p))
