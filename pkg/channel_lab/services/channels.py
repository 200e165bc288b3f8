"""Quantum channels: representations, conversions and named families.

The Choi matrix is the canonical representation and is always present. It uses
the output-first convention ``J = sum_ij Phi(|i><j|) (x) |i><j|`` so that the
four-index view ``J[a, i, b, j]`` reads (output row, input row, output column,
input column).
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from channel_lab.errors import MissingRepresentationError
from channel_lab.models.matrices import ComplexMatrix, DensityMatrix
from channel_lab.services.linalg import (
    hermitian_eigh,
    is_unitary,
    ptrace_array,
    random_unitary,
    weyl_array,
)
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


class StinespringRep(BaseModel):
    """Unitary dilation: rows ordered (output, environment), columns (input, ancilla)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    unitary: np.ndarray
    anc_dims: Tuple[int, ...] = ()
    env_dims: Tuple[int, ...] = ()

    @field_validator("unitary", mode="before")
    @classmethod
    def _coerce_unitary(cls, value: object) -> np.ndarray:
        return _readonly(value)

    @model_validator(mode="after")
    def _check_unitary(self) -> "StinespringRep":
        if not is_unitary(self.unitary):
            raise ValueError("Stinespring operator is not unitary")
        return self

    @property
    def anc_dim(self) -> int:
        return math.prod(self.anc_dims)

    @property
    def env_dim(self) -> int:
        return math.prod(self.env_dims)


class MixedUnitaryRep(BaseModel):
    """Probabilistic application of one of a list of unitaries."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probabilities: np.ndarray
    unitaries: np.ndarray

    @field_validator("probabilities", mode="before")
    @classmethod
    def _coerce_probabilities(cls, value: object) -> np.ndarray:
        array = np.array(value, dtype=float).reshape(-1)
        array.setflags(write=False)
        return array

    @field_validator("unitaries", mode="before")
    @classmethod
    def _coerce_unitaries(cls, value: object) -> np.ndarray:
        array = np.array(value, dtype=complex)
        if array.ndim == 2:
            array = array[np.newaxis]
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_mixture(self) -> "MixedUnitaryRep":
        count, rows, cols = self.unitaries.shape
        if rows != cols:
            raise ValueError("mixed-unitary operators must be square")
        if self.probabilities.shape[0] != count:
            raise ValueError(f"{self.probabilities.shape[0]} probabilities for {count} unitaries")
        tol = get_settings().scaled_tol(rows)
        if np.any(self.probabilities < -tol) or abs(float(self.probabilities.sum()) - 1.0) > tol:
            raise ValueError("mixed-unitary probabilities must be a distribution")
        products = np.einsum("kji,kjl->kil", self.unitaries.conj(), self.unitaries)
        if np.max(np.abs(products - np.eye(rows)), initial=0.0) > tol:
            raise ValueError("mixed-unitary operator is not unitary")
        return self

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def apply_array(self, array: np.ndarray) -> np.ndarray:
        conjugated = self.unitaries @ array @ self.unitaries.conj().transpose(0, 2, 1)
        return np.tensordot(self.probabilities, conjugated, axes=1)

    def choi_array(self) -> np.ndarray:
        vectors = self.unitaries.reshape(self.unitaries.shape[0], -1)
        return (vectors.T * self.probabilities) @ vectors.conj()


class Channel(BaseModel):
    """Completely positive trace-preserving map with its stored representations."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    in_dims: Tuple[int, ...]
    out_dims: Tuple[int, ...]
    choi_matrix: np.ndarray
    kraus: Optional[np.ndarray] = None
    stinespring: Optional[StinespringRep] = None
    mixed_unitary: Tuple[MixedUnitaryRep, ...] = ()
    label: str = Field(default="")

    @field_validator("choi_matrix", "kraus", mode="before")
    @classmethod
    def _coerce_arrays(cls, value: object) -> Optional[np.ndarray]:
        if value is None:
            return None
        return _readonly(value)

    @model_validator(mode="after")
    def _check_channel(self) -> "Channel":
        d_in, d_out = self.in_dim, self.out_dim
        side = d_in * d_out
        if self.choi_matrix.shape != (side, side):
            raise ValueError(f"Choi matrix shape {self.choi_matrix.shape} does not match dims {self.out_dims} x {self.in_dims}")
        settings = get_settings()
        tol = settings.scaled_tol(side)
        choi = self.choi_matrix
        if np.max(np.abs(choi - choi.conj().T), initial=0.0) > tol:
            raise ValueError("Choi matrix is not Hermitian")
        smallest = np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0]
        if smallest < -tol:
            raise ValueError(f"Choi matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
        marginal = ptrace_array(choi, (d_out, d_in), [1])
        if np.max(np.abs(marginal - np.eye(d_in)), initial=0.0) > tol:
            raise ValueError("channel is not trace preserving")
        if self.kraus is not None:
            if self.kraus.ndim != 3 or self.kraus.shape[1:] != (d_out, d_in):
                raise ValueError(f"Kraus operators have shape {self.kraus.shape}, expected (*, {d_out}, {d_in})")
            completeness = np.einsum("kai,kaj->ij", self.kraus.conj(), self.kraus)
            if np.max(np.abs(completeness - np.eye(d_in)), initial=0.0) > tol:
                raise ValueError("Kraus operators are not complete")
            _check_agreement(choi, _choi_from_kraus(self.kraus), "Kraus", tol)
        if self.stinespring is not None:
            rep = self.stinespring
            if rep.unitary.shape != (d_out * rep.env_dim, d_in * rep.anc_dim):
                raise ValueError(f"Stinespring shape {rep.unitary.shape} does not match dims")
            _check_agreement(choi, _choi_from_kraus(_stinespring_kraus(rep, d_in, d_out)), "Stinespring", tol)
        if self.mixed_unitary:
            if d_in != d_out or any(stage.dim != d_in for stage in self.mixed_unitary):
                raise ValueError("mixed-unitary stages must act on the channel's space")
            _check_stage_agreement(self, tol)
        return self

    @property
    def in_dim(self) -> int:
        return math.prod(self.in_dims)

    @property
    def out_dim(self) -> int:
        return math.prod(self.out_dims)

    @property
    def choi_tensor(self) -> np.ndarray:
        """Four-index view ``J[a, i, b, j]``."""

        return self.choi_matrix.reshape(self.out_dim, self.in_dim, self.out_dim, self.in_dim)

    # ----- Constructors -----

    @classmethod
    def from_choi(
        cls,
        choi_matrix: np.ndarray,
        in_dims: Sequence[int],
        out_dims: Sequence[int],
        **reps: object,
    ) -> "Channel":
        return cls(in_dims=tuple(in_dims), out_dims=tuple(out_dims), choi_matrix=choi_matrix, **reps)

    @classmethod
    def from_kraus(
        cls,
        operators: Iterable[np.ndarray],
        in_dims: Sequence[int],
        out_dims: Sequence[int],
        **reps: object,
    ) -> "Channel":
        kraus = _prune_kraus(np.array(list(operators), dtype=complex))
        return cls(
            in_dims=tuple(in_dims),
            out_dims=tuple(out_dims),
            choi_matrix=_choi_from_kraus(kraus),
            kraus=kraus,
            **reps,
        )

    @classmethod
    def from_stinespring(
        cls,
        unitary: np.ndarray,
        in_dims: Sequence[int],
        out_dims: Sequence[int],
        *,
        anc_dims: Sequence[int] = (),
        env_dims: Sequence[int] = (),
        label: str = "",
    ) -> "Channel":
        rep = StinespringRep(unitary=unitary, anc_dims=tuple(anc_dims), env_dims=tuple(env_dims))
        kraus = _stinespring_kraus(rep, math.prod(in_dims), math.prod(out_dims))
        return cls(
            in_dims=tuple(in_dims),
            out_dims=tuple(out_dims),
            choi_matrix=_choi_from_kraus(kraus),
            stinespring=rep,
            label=label,
        )

    @classmethod
    def from_mixed_unitary(
        cls,
        stages: Sequence[MixedUnitaryRep],
        dims: Sequence[int],
        *,
        label: str = "",
    ) -> "Channel":
        """Channel applying each stage in order."""

        d = math.prod(dims)
        choi = None
        for stage in stages:
            stage_choi = stage.choi_array()
            choi = stage_choi if choi is None else _link(stage_choi, choi, d, d, d)
        if choi is None:
            choi = _choi_from_kraus(np.eye(d, dtype=complex)[np.newaxis])
        return cls(
            in_dims=tuple(dims),
            out_dims=tuple(dims),
            choi_matrix=choi,
            mixed_unitary=tuple(stages),
            label=label,
        )


# ----- Internal helpers -----

def _choi_from_kraus(kraus: np.ndarray) -> np.ndarray:
    vectors = kraus.reshape(kraus.shape[0], -1)
    return vectors.T @ vectors.conj()


def _prune_kraus(kraus: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(kraus.reshape(kraus.shape[0], -1), axis=1)
    kept = kraus[norms >= get_settings().kraus_prune]
    if kept.shape[0] == 0:
        raise ValueError("every Kraus operator was pruned")
    return kept


def _stinespring_kraus(rep: StinespringRep, d_in: int, d_out: int) -> np.ndarray:
    isometry = rep.unitary.reshape(d_out, rep.env_dim, d_in, rep.anc_dim)[:, :, :, 0]
    return _prune_kraus(np.ascontiguousarray(isometry.transpose(1, 0, 2)))


def _link(outer: np.ndarray, inner: np.ndarray, d_out: int, d_mid: int, d_in: int) -> np.ndarray:
    """Choi matrix of ``outer o inner``."""

    first = inner.reshape(d_mid, d_in, d_mid, d_in)
    second = outer.reshape(d_out, d_mid, d_out, d_mid)
    joined = np.einsum("ambn,minj->aibj", second, first, optimize=True)
    return joined.reshape(d_out * d_in, d_out * d_in)


def _check_agreement(choi: np.ndarray, other: np.ndarray, name: str, tol: float) -> None:
    residual = float(np.max(np.abs(choi - other), initial=0.0))
    if residual > tol:
        raise ValueError(f"{name} representation disagrees with the Choi matrix (residual {residual:.3e})")


def _check_stage_agreement(phi: Channel, tol: float) -> None:
    settings = get_settings()
    rng = np.random.default_rng(settings.agreement_seed)
    d = phi.in_dim
    for _ in range(settings.agreement_samples):
        sample = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        staged = sample
        for stage in phi.mixed_unitary:
            staged = stage.apply_array(staged)
        direct = apply_array(phi, sample)
        scale = max(1.0, float(np.max(np.abs(sample))))
        residual = float(np.max(np.abs(staged - direct)))
        if residual > tol * scale:
            raise ValueError(f"mixed-unitary stages disagree with the Choi matrix (residual {residual:.3e})")


def kraus_operators(phi: Channel) -> np.ndarray:
    """Stored Kraus operators, or ones derived from the Choi matrix."""

    if phi.kraus is not None:
        return phi.kraus
    if phi.stinespring is not None:
        return _stinespring_kraus(phi.stinespring, phi.in_dim, phi.out_dim)
    values, vectors = hermitian_eigh(phi.choi_matrix)
    tol = get_settings().scaled_tol(phi.choi_matrix.shape[0])
    if values.size and values[-1] < -tol:
        raise ValueError(f"Choi matrix is not positive semidefinite (eigenvalue {values[-1]:.3e})")
    keep = values > tol
    weights = np.sqrt(values[keep])
    operators = (vectors[:, keep] * weights).T.reshape(-1, phi.out_dim, phi.in_dim)
    return _prune_kraus(operators)


# ----- Public API -----

def apply_array(phi: Channel, array: np.ndarray, ref_dim: int = 1) -> np.ndarray:
    """``(Phi (x) Id_ref)(X)`` for a raw operator on ``in (x) ref``."""

    d_in, d_out = phi.in_dim, phi.out_dim
    block = array.reshape(d_in, ref_dim, d_in, ref_dim)
    out = np.einsum("aibj,irjs->arbs", phi.choi_tensor, block, optimize=True)
    return out.reshape(d_out * ref_dim, d_out * ref_dim)


def adjoint_array(phi: Channel, array: np.ndarray, ref_dim: int = 1) -> np.ndarray:
    """Heisenberg-picture map ``(Phi^dagger (x) Id_ref)(Y)``."""

    d_in, d_out = phi.in_dim, phi.out_dim
    block = array.reshape(d_out, ref_dim, d_out, ref_dim)
    out = np.einsum("bsar,aibj->jsir", block, phi.choi_tensor, optimize=True)
    return out.reshape(d_in * ref_dim, d_in * ref_dim)


def apply(phi: Channel, rho: DensityMatrix, ref_dims: Sequence[int] = ()) -> DensityMatrix:
    """Apply ``Phi (x) Id`` to a state on ``in_dims ++ ref_dims``."""

    ref_dims = tuple(ref_dims)
    if rho.dims != phi.in_dims + ref_dims:
        raise ValueError(f"state dims {rho.dims} do not match {phi.in_dims} ++ {ref_dims}")
    output = apply_array(phi, rho.array, math.prod(ref_dims))
    return DensityMatrix.from_array((output + output.conj().T) / 2, phi.out_dims + ref_dims)


def choi(phi: Channel) -> ComplexMatrix:
    """Choi matrix ``sum_ij Phi(|i><j|) (x) |i><j|`` over ``out_dims ++ in_dims``."""

    dims = phi.out_dims + phi.in_dims
    return ComplexMatrix(data=phi.choi_matrix, row_dims=dims, col_dims=dims)


def kraus_from_stinespring(phi: Channel) -> Channel:
    """Attach Kraus operators read off the Stinespring dilation."""

    if phi.stinespring is None:
        raise MissingRepresentationError("channel has no Stinespring representation")
    kraus = _stinespring_kraus(phi.stinespring, phi.in_dim, phi.out_dim)
    return phi.model_copy(update={"kraus": _readonly(kraus)})


def kraus_from_choi(phi: Channel) -> Channel:
    """Attach Kraus operators from the spectral decomposition of the Choi matrix."""

    values, vectors = hermitian_eigh(phi.choi_matrix)
    tol = get_settings().scaled_tol(phi.choi_matrix.shape[0])
    if values.size and values[-1] < -tol:
        raise ValueError(f"Choi matrix is not positive semidefinite (eigenvalue {values[-1]:.3e})")
    keep = values > tol
    operators = (vectors[:, keep] * np.sqrt(values[keep])).T.reshape(-1, phi.out_dim, phi.in_dim)
    return Channel.from_choi(
        phi.choi_matrix,
        phi.in_dims,
        phi.out_dims,
        kraus=_prune_kraus(operators),
        stinespring=phi.stinespring,
        mixed_unitary=phi.mixed_unitary,
        label=phi.label,
    )


def complement(phi: Channel) -> Channel:
    """Complementary channel relative to the stored Stinespring dilation.

    The result carries the same dilation with output and environment exchanged,
    so applying ``complement`` twice recovers the original channel.
    """

    rep = phi.stinespring
    if rep is None:
        raise MissingRepresentationError("complement needs a Stinespring representation")
    d_out, d_env = phi.out_dim, rep.env_dim
    swapped = rep.unitary.reshape(d_out, d_env, -1).transpose(1, 0, 2).reshape(d_env * d_out, -1)
    return Channel.from_stinespring(
        swapped,
        phi.in_dims,
        rep.env_dims,
        anc_dims=rep.anc_dims,
        env_dims=phi.out_dims,
        label=f"complement({phi.label})" if phi.label else "complement",
    )


def compose(phi: Channel, psi: Channel) -> Channel:
    """The channel ``phi o psi`` (``psi`` acts first)."""

    if psi.out_dims != phi.in_dims:
        raise ValueError(f"cannot compose: {psi.out_dims} does not feed {phi.in_dims}")
    choi_matrix = _link(phi.choi_matrix, psi.choi_matrix, phi.out_dim, phi.in_dim, psi.in_dim)
    reps = {}
    if phi.kraus is not None and psi.kraus is not None:
        count = phi.kraus.shape[0] * psi.kraus.shape[0]
        if count <= phi.out_dim * psi.in_dim:
            products = np.einsum("kab,lbc->klac", phi.kraus, psi.kraus).reshape(count, phi.out_dim, psi.in_dim)
            reps["kraus"] = _prune_kraus(products)
    if phi.mixed_unitary and psi.mixed_unitary:
        reps["mixed_unitary"] = psi.mixed_unitary + phi.mixed_unitary
    return Channel.from_choi(choi_matrix, psi.in_dims, phi.out_dims, **reps)


def tensor_channels(phi: Channel, psi: Channel) -> Channel:
    """Parallel composition ``phi (x) psi``."""

    a_in, a_out, b_in, b_out = phi.in_dim, phi.out_dim, psi.in_dim, psi.out_dim
    joined = np.einsum("aibj,ckdl->acikbdjl", phi.choi_tensor, psi.choi_tensor, optimize=True)
    side = a_in * a_out * b_in * b_out
    reps = {}
    if phi.kraus is not None and psi.kraus is not None:
        products = np.einsum("kab,lcd->klacbd", phi.kraus, psi.kraus)
        reps["kraus"] = _prune_kraus(products.reshape(-1, a_out * b_out, a_in * b_in))
    if phi.stinespring is not None and psi.stinespring is not None:
        first, second = phi.stinespring, psi.stinespring
        joined_u = np.kron(first.unitary, second.unitary).reshape(
            a_out, first.env_dim, b_out, second.env_dim, a_in, first.anc_dim, b_in, second.anc_dim
        )
        joined_u = joined_u.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(
            a_out * b_out * first.env_dim * second.env_dim, a_in * b_in * first.anc_dim * second.anc_dim
        )
        reps["stinespring"] = StinespringRep(
            unitary=joined_u,
            anc_dims=first.anc_dims + second.anc_dims,
            env_dims=first.env_dims + second.env_dims,
        )
    if phi.mixed_unitary and psi.mixed_unitary:
        left = np.eye(b_in)
        right = np.eye(a_in)
        stages = [
            MixedUnitaryRep(
                probabilities=stage.probabilities,
                unitaries=np.einsum("kab,cd->kacbd", stage.unitaries, left).reshape(-1, a_in * b_in, a_in * b_in),
            )
            for stage in phi.mixed_unitary
        ] + [
            MixedUnitaryRep(
                probabilities=stage.probabilities,
                unitaries=np.einsum("ab,kcd->kacbd", right, stage.unitaries).reshape(-1, a_in * b_in, a_in * b_in),
            )
            for stage in psi.mixed_unitary
        ]
        reps["mixed_unitary"] = tuple(stages)
    return Channel.from_choi(
        joined.reshape(side, side),
        phi.in_dims + psi.in_dims,
        phi.out_dims + psi.out_dims,
        **reps,
    )


def channel_distance(phi: Channel, psi: Channel) -> float:
    """Largest absolute Choi-entry difference."""

    if phi.choi_matrix.shape != psi.choi_matrix.shape:
        raise ValueError("channels have different dimensions")
    return float(np.max(np.abs(phi.choi_matrix - psi.choi_matrix), initial=0.0))


class DegradingCheck(BaseModel):
    """Outcome of testing a candidate degrading map."""

    model_config = ConfigDict(frozen=True)

    passed: bool
    residual: float
    threshold: float


def verify_degrading(delta: Channel, phi: Channel) -> DegradingCheck:
    """Compare ``delta o phi`` against the complement of ``phi``."""

    if delta.in_dim != phi.out_dim:
        raise ValueError(f"degrader input {delta.in_dims} does not match channel output {phi.out_dims}")
    target = complement(phi)
    if delta.out_dim != target.out_dim:
        raise ValueError(f"degrader output {delta.out_dims} does not match environment {target.out_dims}")
    residual = channel_distance(compose(delta, phi), target)
    threshold = get_settings().scaled_tol(target.choi_matrix.shape[0])
    LOGGER.debug("Degrading residual %.3e (threshold %.3e)", residual, threshold)
    return DegradingCheck(passed=residual < threshold, residual=residual, threshold=threshold)


def verify_antidegrading(antidegrader: Channel, phi: Channel) -> DegradingCheck:
    """Compare ``antidegrader o phi^C`` against ``phi``."""

    source = complement(phi)
    if antidegrader.in_dim != source.out_dim:
        raise ValueError(f"antidegrader input {antidegrader.in_dims} does not match environment {source.out_dims}")
    if antidegrader.out_dim != phi.out_dim:
        raise ValueError(f"antidegrader output {antidegrader.out_dims} does not match channel output {phi.out_dims}")
    residual = channel_distance(compose(antidegrader, source), phi)
    threshold = get_settings().scaled_tol(phi.choi_matrix.shape[0])
    LOGGER.debug("Antidegrading residual %.3e (threshold %.3e)", residual, threshold)
    return DegradingCheck(passed=residual < threshold, residual=residual, threshold=threshold)


# ----- Named channels -----

def identity_channel(dims: Sequence[int]) -> Channel:
    d = math.prod(dims)
    return Channel.from_stinespring(np.eye(d), dims, dims, label="identity")


def unitary_channel(u: np.ndarray, dims: Optional[Sequence[int]] = None, *, label: str = "unitary") -> Channel:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("operator is not unitary")
    dims = tuple(dims) if dims is not None else (u.shape[0],)
    stage = MixedUnitaryRep(probabilities=[1.0], unitaries=u[np.newaxis])
    base = Channel.from_stinespring(u, dims, dims, label=label)
    return base.model_copy(update={"kraus": _readonly(u[np.newaxis]), "mixed_unitary": (stage,)})


def constant_channel(state: DensityMatrix, in_dims: Sequence[int]) -> Channel:
    """Replace every input with ``state``."""

    d_in = math.prod(in_dims)
    return Channel.from_choi(np.kron(state.array, np.eye(d_in)), in_dims, state.dims, label="constant")


def partial_trace_channel(dims: Sequence[int], keep: Iterable[int]) -> Channel:
    """Channel tracing out the subsystems not listed in ``keep``."""

    dims = tuple(dims)
    kept = sorted(set(keep))
    traced = [index for index in range(len(dims)) if index not in kept]
    d = math.prod(dims)
    embedding = np.eye(d, dtype=complex).reshape(dims + (d,))
    operators: List[np.ndarray] = []
    for assignment in np.ndindex(*[dims[index] for index in traced]):
        selector: List[object] = [slice(None)] * len(dims)
        for index, value in zip(traced, assignment):
            selector[index] = value
        operators.append(embedding[tuple(selector)].reshape(-1, d))
    return Channel.from_kraus(operators, dims, tuple(dims[index] for index in kept), label="partial-trace")


def weyl_mixture(d: int, pairs: Sequence[Tuple[int, int]]) -> MixedUnitaryRep:
    """Uniform mixture of the listed Weyl operators."""

    unitaries = np.array([weyl_array(d, a, b) for a, b in pairs])
    return MixedUnitaryRep(probabilities=np.full(len(pairs), 1.0 / len(pairs)), unitaries=unitaries)


def depolarizing_channel(d: int) -> Channel:
    """Completely depolarizing channel as the uniform mixture of all Weyl operators."""

    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    stage = weyl_mixture(d, [(a, b) for a in range(d) for b in range(d)])
    return Channel.from_mixed_unitary([stage], (d,), label="depolarizing")


def dephasing_channel(d: int) -> Channel:
    """Completely dephasing channel as the uniform mixture of the phase operators."""

    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    stage = weyl_mixture(d, [(0, b) for b in range(d)])
    return Channel.from_mixed_unitary([stage], (d,), label="dephasing")


def controlled_weyl_channel(phi: Channel) -> Channel:
    """Apply ``phi`` then the Weyl operator named by a dephased control pair.

    The input is ordered ``in_dims ++ (d, d)`` with ``d`` the output dimension.
    """

    d = phi.out_dim
    base = kraus_operators(phi)
    operators = []
    for a in range(d):
        for b in range(d):
            weyl = weyl_array(d, a, b)
            selector = np.zeros((1, d * d), dtype=complex)
            selector[0, a * d + b] = 1.0
            for kraus in base:
                operators.append(np.kron(weyl @ kraus, selector))
    return Channel.from_kraus(operators, phi.in_dims + (d, d), phi.out_dims, label="controlled-weyl")


def random_channel(
    rng: np.random.Generator,
    in_dims: Sequence[int] = (2,),
    out_dims: Sequence[int] = (2,),
    env_dims: Sequence[int] = (2,),
) -> Channel:
    """Channel with a Haar-random Stinespring unitary."""

    d_in, d_out, d_env = math.prod(in_dims), math.prod(out_dims), math.prod(env_dims)
    if (d_out * d_env) % d_in:
        raise ValueError("output times environment dimension must be a multiple of the input dimension")
    unitary = random_unitary(rng, d_out * d_env)
    return Channel.from_stinespring(
        unitary,
        in_dims,
        out_dims,
        anc_dims=((d_out * d_env) // d_in,),
        env_dims=tuple(env_dims),
        label="random",
    )
