"""Density-matrix simulation of circuits and compilation to channels."""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Sequence

import numpy as np

from channel_lab.errors import DimensionCapError
from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.matrices import DensityMatrix
from channel_lab.services.channels import Channel, StinespringRep
from channel_lab.services.circuits import to_stinespring_form
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / math.sqrt(2.0)

GATE_MATRICES: Dict[str, np.ndarray] = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "T": np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _act(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``matrix`` (on ``len(axes)`` qubits) into the given tensor axes."""

    m = len(axes)
    shaped = matrix.reshape((2,) * (2 * m))
    moved = np.tensordot(shaped, tensor, axes=(list(range(m, 2 * m)), list(axes)))
    return np.moveaxis(moved, list(range(m)), list(axes))


def _unitary_side(tensor: np.ndarray, instruction: Instruction, axes: Dict[int, int], conj: bool) -> np.ndarray:
    """Apply a unitary instruction to one side (rows, or columns with ``conj``)."""

    if instruction.kind != "CU":
        matrix = GATE_MATRICES[instruction.kind]
        return _act(tensor, matrix.conj() if conj else matrix, [axes[wire] for wire in instruction.wires])
    control = axes[instruction.wires[0]]
    branch = np.take(tensor, 1, axis=control)
    shifted = {wire: axis - (axis > control) for wire, axis in axes.items() if axis != control}
    for inner in instruction.body:
        branch = _unitary_side(branch, inner, shifted, conj)
    result = np.array(tensor, copy=True)
    selector: List[object] = [slice(None)] * tensor.ndim
    selector[control] = 1
    result[tuple(selector)] = branch
    return result


class _DensityTensor:
    """Operator on live wires plus a reference system, one axis per qubit per side."""

    def __init__(self, array: np.ndarray, n_inputs: int, ref_dim: int) -> None:
        shape = (2,) * n_inputs + (ref_dim,)
        self.tensor = np.asarray(array, dtype=complex).reshape(shape + shape)
        self.order: List[int] = list(range(n_inputs))
        self.ref_dim = ref_dim

    def _row_axes(self) -> Dict[int, int]:
        return {wire: index for index, wire in enumerate(self.order)}

    def _col_axes(self) -> Dict[int, int]:
        offset = len(self.order) + 1
        return {wire: offset + index for index, wire in enumerate(self.order)}

    def conjugate(self, instruction: Instruction) -> None:
        self.tensor = _unitary_side(self.tensor, instruction, self._row_axes(), False)
        self.tensor = _unitary_side(self.tensor, instruction, self._col_axes(), True)

    def conjugated(self, instructions: Sequence[Instruction]) -> np.ndarray:
        tensor = self.tensor
        for instruction in instructions:
            tensor = _unitary_side(tensor, instruction, self._row_axes(), False)
            tensor = _unitary_side(tensor, instruction, self._col_axes(), True)
        return tensor

    def mix(self, instructions: Sequence[Instruction]) -> None:
        self.tensor = 0.5 * (self.tensor + self.conjugated(instructions))

    def dephase(self, wire: int) -> None:
        shape = [1] * self.tensor.ndim
        shape[self._row_axes()[wire]] = 2
        shape[self._col_axes()[wire]] = 2
        self.tensor = self.tensor * np.eye(2).reshape(shape)

    def add_wire(self, wire: int) -> None:
        k = len(self.order)
        grown = np.tensordot(self.tensor, np.diag([1.0, 0.0]).astype(complex), axes=0)
        self.tensor = np.moveaxis(grown, [-2, -1], [k, 2 * k + 2])
        self.order.append(wire)

    def remove_wire(self, wire: int) -> None:
        row, col = self._row_axes()[wire], self._col_axes()[wire]
        self.tensor = np.trace(self.tensor, axis1=row, axis2=col)
        self.order.remove(wire)

    def array(self) -> np.ndarray:
        k = len(self.order)
        rows = [self.order.index(wire) for wire in sorted(self.order)] + [k]
        cols = [k + 1 + index for index in rows]
        side = (2**k) * self.ref_dim
        return self.tensor.transpose(rows + cols).reshape(side, side)


def _step(state: _DensityTensor, instruction: Instruction) -> None:
    kind = instruction.kind
    if instruction.is_unitary:
        state.conjugate(instruction)
    elif kind == "ANCILLA":
        state.add_wire(instruction.wires[0])
    elif kind == "TRACEOUT":
        state.remove_wire(instruction.wires[0])
    elif kind == "MEASURE":
        state.dephase(instruction.wires[0])
    elif kind == "MIXU":
        state.mix(instruction.body)
    elif kind == "DEPOL":
        wire = instruction.wires[0]
        state.mix([Instruction(kind="X", wires=(wire,))])
        state.mix([Instruction(kind="Z", wires=(wire,))])
    elif kind == "CDEPOL":
        state.mix([Instruction(kind="CZ", wires=instruction.wires)])
        state.mix([Instruction(kind="CNOT", wires=instruction.wires)])
    else:
        raise ValueError(f"cannot simulate {kind}")


def _check_cap(circuit: Circuit, ref_dim: int) -> None:
    cap = get_settings().max_total_dim
    requested = (2 ** circuit.summary().peak) * ref_dim
    if requested > cap:
        raise DimensionCapError(
            f"simulation needs dimension {requested}, above the cap {cap}",
            requested=requested,
            cap=cap,
        )


# ----- Public API -----

def simulate_array(circuit: Circuit, array: np.ndarray, ref_dim: int = 1) -> np.ndarray:
    """Apply ``C (x) Id_ref`` to an operator on the inputs followed by the reference."""

    _check_cap(circuit, ref_dim)
    side = (2**circuit.n_inputs) * ref_dim
    if np.shape(array) != (side, side):
        raise ValueError(f"operator shape {np.shape(array)} does not match {side} x {side}")
    state = _DensityTensor(array, circuit.n_inputs, ref_dim)
    for instruction in circuit.instructions:
        _step(state, instruction)
    return state.array()


def simulate(circuit: Circuit, rho: DensityMatrix, ref_dims: Sequence[int] = ()) -> DensityMatrix:
    """Output state of ``C (x) Id`` on ``rho`` over ``(2,)*n ++ ref_dims``."""

    ref_dims = tuple(ref_dims)
    expected = (2,) * circuit.n_inputs + ref_dims
    if math.prod(rho.dims) != math.prod(expected):
        raise ValueError(f"state dims {rho.dims} do not match {expected}")
    output = simulate_array(circuit, rho.array, math.prod(ref_dims))
    out_dims = (2,) * len(circuit.output_wires) + ref_dims
    return DensityMatrix.from_array((output + output.conj().T) / 2, out_dims)


def zero_input_output(circuit: Circuit) -> DensityMatrix:
    """Output state on the all-zero input."""

    d = 2**circuit.n_inputs
    zero = np.zeros((d, d), dtype=complex)
    zero[0, 0] = 1.0
    return simulate(circuit, DensityMatrix.from_array(zero, (2,) * circuit.n_inputs))


def circuit_unitary(instructions: Sequence[Instruction], wires: Sequence[int]) -> np.ndarray:
    """Matrix of a unitary instruction list on ``wires`` (first wire most significant)."""

    wires = list(wires)
    width = len(wires)
    tensor = np.eye(2**width, dtype=complex).reshape((2,) * width + (2**width,))
    axes = {wire: index for index, wire in enumerate(wires)}
    for instruction in instructions:
        if not instruction.is_unitary:
            raise ValueError(f"{instruction.kind} is not unitary")
        tensor = _unitary_side(tensor, instruction, axes, False)
    return tensor.reshape(2**width, 2**width)


def stinespring_rep(circuit: Circuit) -> StinespringRep:
    """Dilation read off the normal form: columns (inputs, ancillas), rows (outputs, traced)."""

    normal = to_stinespring_form(circuit)
    summary = normal.summary()
    wires = list(circuit.input_wires) + list(summary.ancillas)
    unitary = circuit_unitary([i for i in normal.instructions if i.is_unitary], wires)
    rows = [wires.index(wire) for wire in list(summary.live) + list(summary.traced)]
    width = len(wires)
    unitary = unitary.reshape((2,) * width + (2**width,)).transpose(rows + [width]).reshape(2**width, 2**width)
    return StinespringRep(
        unitary=unitary,
        anc_dims=(2,) * len(summary.ancillas),
        env_dims=(2,) * len(summary.traced),
    )


def to_channel(circuit: Circuit, *, label: str = "") -> Channel:
    """Compile a circuit to its Choi matrix by simulating the unnormalized maximally entangled input."""

    settings = get_settings()
    summary = circuit.summary()
    widest = max(circuit.n_inputs, len(summary.live))
    if widest > settings.choi_max_qubits:
        raise DimensionCapError(
            f"channel on {widest} qubits is above the compilation cap {settings.choi_max_qubits}",
            requested=widest,
            cap=settings.choi_max_qubits,
        )
    d_in = 2**circuit.n_inputs
    omega = np.zeros((d_in * d_in, d_in * d_in), dtype=complex)
    diagonal = np.arange(d_in) * (d_in + 1)
    omega[np.ix_(diagonal, diagonal)] = 1.0
    choi = simulate_array(circuit, omega, d_in)
    in_dims = (2,) * circuit.n_inputs
    out_dims = (2,) * len(summary.live)
    reps = {}
    width = circuit.n_inputs + len(to_stinespring_form(circuit).summary().ancillas)
    if width <= settings.stinespring_max_qubits:
        reps["stinespring"] = stinespring_rep(circuit)
    LOGGER.debug("Compiled circuit %s -> %s qubits (peak %d)", circuit.n_inputs, len(out_dims), summary.peak)
    return Channel.from_choi((choi + choi.conj().T) / 2, in_dims, out_dims, label=label, **reps)
