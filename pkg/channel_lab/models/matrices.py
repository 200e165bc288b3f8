"""Complex matrices and quantum states over explicit subsystem dimensions."""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from channel_lab.utils.config import get_settings


def _frozen_array(value: object, *, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=complex)
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("entries must be finite")
    array.setflags(write=False)
    return array


def _check_dims(value: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in value)
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be positive, got {dims}")
    return dims


class ComplexMatrix(BaseModel):
    """Dense complex matrix whose rows and columns factor into subsystems."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray
    row_dims: Tuple[int, ...]
    col_dims: Tuple[int, ...]

    @field_validator("data", mode="before")
    @classmethod
    def _coerce_data(cls, value: object) -> np.ndarray:
        return _frozen_array(value, ndim=2)

    @field_validator("row_dims", "col_dims", mode="before")
    @classmethod
    def _coerce_dims(cls, value: Sequence[int]) -> Tuple[int, ...]:
        return _check_dims(value)

    @model_validator(mode="after")
    def _check_shape(self) -> "ComplexMatrix":
        rows, cols = self.data.shape
        if math.prod(self.row_dims) != rows or math.prod(self.col_dims) != cols:
            raise ValueError(
                f"dims {self.row_dims} x {self.col_dims} do not match shape {self.data.shape}"
            )
        return self

    @classmethod
    def from_array(
        cls,
        data: object,
        row_dims: Optional[Sequence[int]] = None,
        col_dims: Optional[Sequence[int]] = None,
    ) -> "ComplexMatrix":
        """Wrap an array, defaulting to a single subsystem per side."""

        array = np.asarray(data, dtype=complex)
        if array.ndim != 2:
            raise ValueError(f"expected a matrix, got shape {array.shape}")
        if row_dims is None:
            row_dims = (array.shape[0],)
        if col_dims is None:
            col_dims = tuple(row_dims) if array.shape[0] == array.shape[1] else (array.shape[1],)
        return cls(data=array, row_dims=row_dims, col_dims=col_dims)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def adjoint(self) -> "ComplexMatrix":
        return ComplexMatrix(data=self.data.conj().T, row_dims=self.col_dims, col_dims=self.row_dims)

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.data.shape} by {other.data.shape}")
        return ComplexMatrix(
            data=self.data @ other.data,
            row_dims=self.row_dims,
            col_dims=other.col_dims,
        )


class DensityMatrix(BaseModel):
    """Positive semidefinite, unit-trace operator."""

    model_config = ConfigDict(frozen=True)

    mat: ComplexMatrix

    @model_validator(mode="after")
    def _check_state(self) -> "DensityMatrix":
        mat = self.mat
        if mat.row_dims != mat.col_dims:
            raise ValueError(f"density matrix must be square over one dim list, got {mat.row_dims} x {mat.col_dims}")
        array = mat.data
        tol = get_settings().scaled_tol(array.shape[0])
        if np.max(np.abs(array - array.conj().T), initial=0.0) > tol:
            raise ValueError("density matrix is not Hermitian")
        trace = np.trace(array).real
        if abs(trace - 1.0) > tol:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        smallest = np.linalg.eigvalsh((array + array.conj().T) / 2)[0]
        if smallest < -tol:
            raise ValueError(f"density matrix has negative eigenvalue {smallest!r}")
        return self

    @classmethod
    def from_array(cls, data: object, dims: Optional[Sequence[int]] = None) -> "DensityMatrix":
        array = np.asarray(data, dtype=complex)
        if dims is None:
            dims = (array.shape[0],)
        return cls(mat=ComplexMatrix(data=array, row_dims=dims, col_dims=dims))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        d = math.prod(dims)
        return cls.from_array(np.eye(d) / d, dims)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.mat.row_dims

    @property
    def array(self) -> np.ndarray:
        return self.mat.data

    @property
    def dim(self) -> int:
        return self.mat.rows


class PureState(BaseModel):
    """Unit vector over a list of subsystems."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray
    dims: Tuple[int, ...]

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _coerce_amplitudes(cls, value: object) -> np.ndarray:
        return _frozen_array(value, ndim=1)

    @field_validator("dims", mode="before")
    @classmethod
    def _coerce_dims(cls, value: Sequence[int]) -> Tuple[int, ...]:
        return _check_dims(value)

    @model_validator(mode="after")
    def _check_norm(self) -> "PureState":
        if math.prod(self.dims) != self.amplitudes.shape[0]:
            raise ValueError(f"dims {self.dims} do not match {self.amplitudes.shape[0]} amplitudes")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > get_settings().tol_exact:
            raise ValueError(f"state norm is {norm!r}, expected 1")
        return self

    @classmethod
    def from_array(cls, amplitudes: object, dims: Optional[Sequence[int]] = None) -> "PureState":
        vector = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amplitudes=vector, dims=dims if dims is not None else (vector.shape[0],))

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> "PureState":
        vector = np.zeros(math.prod(dims), dtype=complex)
        vector[index] = 1.0
        return cls(amplitudes=vector, dims=dims)

    def projector(self) -> DensityMatrix:
        vector = self.amplitudes
        return DensityMatrix.from_array(np.outer(vector, vector.conj()), self.dims)
