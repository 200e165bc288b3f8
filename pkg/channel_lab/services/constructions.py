"""Controlled circuits, the log-depth controlled construction and the swap test."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np

from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.matrices import DensityMatrix
from channel_lab.services.circuits import (
    ancilla,
    controlled_block,
    gate,
    instruction_layers,
    relabel,
    traceout,
)
from channel_lab.services.linalg import swap_array
from channel_lab.services.simulator import simulate

LOGGER = logging.getLogger(__name__)


def _require_unitary(circuit: Circuit) -> None:
    for index, instruction in enumerate(circuit.instructions):
        if not instruction.is_unitary:
            raise ValueError(f"instruction {index} ({instruction.kind}) is not unitary")


def _shifted(circuit: Circuit, offset: int) -> List[Instruction]:
    mapping = {wire: wire + offset for wire in range(circuit.n_inputs)}
    return [relabel(instruction, mapping) for instruction in circuit.instructions]


def controlled(circuit: Circuit) -> Circuit:
    """Apply ``circuit`` iff the new wire 0 holds ``|1>``; the original wires move up by one."""

    _require_unitary(circuit)
    body = _shifted(circuit, 1)
    instructions = (controlled_block(0, body),) if body else ()
    return Circuit(n_inputs=circuit.n_inputs + 1, instructions=instructions)


def fan_out(source: int, copies: List[int]) -> List[Instruction]:
    """CNOT tree copying ``source`` onto ``copies`` in ``ceil(log2(len + 1))`` rounds."""

    holders = [source]
    pending = list(copies)
    gates: List[Instruction] = []
    while pending:
        for holder in list(holders):
            if not pending:
                break
            target = pending.pop(0)
            gates.append(gate("CNOT", holder, target))
            holders.append(target)
    return gates


def controlled_logdepth(circuit: Circuit, n: int) -> Circuit:
    """Controlled version of ``circuit`` using ``n`` copies of the control.

    The control (wire 0) is fanned out onto ``n - 1`` ancillas; inside each layer
    of ``circuit`` the j-th gate is controlled by copy ``j mod n``, and the tree is
    uncomputed at the end. With ``n`` at least the widest layer the depth is at
    most ``depth(circuit) + 2 ceil(log2 n) + 2``.
    """

    if n < 1:
        raise ValueError(f"need at least one control copy, got {n}")
    _require_unitary(circuit)
    width = circuit.n_inputs
    gates = _shifted(circuit, 1)
    copies = list(range(width + 1, width + n))
    holders = [0] + copies
    tree = fan_out(0, copies)
    position: Dict[int, int] = defaultdict(int)
    body: List[Instruction] = []
    for instruction, layer in zip(gates, instruction_layers(gates)):
        holder = holders[position[layer] % n]
        position[layer] += 1
        body.append(controlled_block(holder, [instruction]))
    instructions = (
        [ancilla(wire) for wire in copies]
        + tree
        + body
        + list(reversed(tree))
        + [traceout(wire) for wire in copies]
    )
    LOGGER.debug("Log-depth control: %d gates, %d copies, %d fan-out gates", len(gates), n, len(tree))
    return Circuit(n_inputs=width + 1, instructions=tuple(instructions))


def logdepth_bound(circuit_depth: int, n: int) -> int:
    return circuit_depth + 2 * math.ceil(math.log2(n)) + 2 if n > 1 else circuit_depth


def swap_test_circuit(n: int) -> Circuit:
    """Swap test on two n-qubit registers; the test qubit is wire ``2n``."""

    if n < 1:
        raise ValueError(f"registers need at least one qubit, got {n}")
    test = 2 * n
    swaps = [gate("SWAP", wire, n + wire) for wire in range(n)]
    instructions = [
        ancilla(test),
        gate("H", test),
        controlled_block(test, swaps),
        gate("H", test),
        Instruction(kind="MEASURE", wires=(test,)),
    ]
    return Circuit(n_inputs=2 * n, instructions=tuple(instructions))


def _halves(dims: Tuple[int, ...]) -> int:
    total = math.prod(dims)
    for cut in range(len(dims) + 1):
        if math.prod(dims[:cut]) ** 2 == total:
            return math.prod(dims[:cut])
    raise ValueError(f"dims {dims} do not split into two halves of equal dimension")


def antisym_probability(rho: DensityMatrix) -> float:
    """Probability ``tr((I - W) rho) / 2`` of the antisymmetric swap-test outcome."""

    d = _halves(rho.dims)
    swap = swap_array(d)
    value = 0.5 * float(np.real(np.trace(rho.array) - np.trace(swap @ rho.array)))
    return min(1.0, max(0.0, value))


def swap_test_rejection(rho: DensityMatrix) -> float:
    """Probability that the simulated swap-test circuit measures ``1`` on an n+n qubit state."""

    qubits = int(round(math.log2(rho.dim)))
    if 2**qubits != rho.dim or qubits % 2:
        raise ValueError("the swap test needs two registers with the same number of qubits")
    output = simulate(swap_test_circuit(qubits // 2), DensityMatrix.from_array(rho.array, (2,) * qubits))
    diagonal = np.real(np.diag(output.array)).reshape(-1, 2)
    return float(diagonal[:, 1].sum())
