"""Degradable and antidegradable embeddings that halve the distance of a circuit pair."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.reports import OptimizerConfig, ReductionReport
from channel_lab.services.channels import Channel, verify_antidegrading, verify_degrading
from channel_lab.services.circuits import (
    AlignedForm,
    WireAllocator,
    aligned_form,
    ancilla,
    circuit_digest,
    controlled_block,
    gate,
    pad_circuit,
    pad_pair,
    route_outputs,
    traceout,
)
from channel_lab.services.optimizers import diamond_distance
from channel_lab.services.simulator import to_channel

LOGGER = logging.getLogger(__name__)

HALVING_RELATION = "distance(C1, C2) = distance(Q1, Q2) / 2"


def _square(q: Circuit) -> Tuple[AlignedForm, Dict[str, int]]:
    side = max(q.n_inputs, len(q.output_wires))
    padded, padding = pad_circuit(q, n_inputs=side, n_outputs=side)
    return aligned_form(padded), {"inputs": padding.inputs, "outputs": padding.outputs}


def _flagged(aligned: AlignedForm, *, antidegradable: bool) -> Circuit:
    """Apply the circuit iff a uniformly random flag reads 1; the flag is the first output."""

    n, w = aligned.n_inputs, aligned.width
    allocator = WireAllocator(n)
    flag, copy = allocator.take(2)
    wires = list(range(n)) + allocator.take(w - n)
    shelf = allocator.take(n) if antidegradable else []

    instructions: List[Instruction] = [ancilla(wire) for wire in [flag, copy] + wires[n:] + shelf]
    instructions += [gate("H", flag), gate("CNOT", flag, copy)]
    if aligned.gates:
        instructions.append(controlled_block(flag, aligned.placed(wires)))
    if antidegradable:
        instructions.append(gate("X", flag))
        instructions.append(controlled_block(flag, [gate("SWAP", wires[p], shelf[p]) for p in range(n)]))
        instructions.append(gate("X", flag))
    instructions += [traceout(wire) for wire in [copy] + wires[n:] + shelf]
    circuit = Circuit(n_inputs=n, instructions=tuple(instructions))
    return route_outputs(circuit, [flag] + list(range(n)))


def degrader_circuit(q: Circuit) -> Circuit:
    """Map from the flagged output ``(flag, data)`` to its environment ``(flag copy, environment)``.

    With the flag at 0 the data still holds the input, so the circuit is run
    on it and the flag flipped; with the flag at 1 only idle ancillas remain.
    """

    aligned, _ = _square(q)
    n, w = aligned.n_inputs, aligned.width
    wires = [position + 1 for position in range(w)]
    instructions: List[Instruction] = [ancilla(wire) for wire in wires[n:]]
    instructions.append(gate("X", 0))
    if aligned.gates:
        instructions.append(controlled_block(0, aligned.placed(wires)))
    instructions += [traceout(wire) for wire in wires[:n]]
    return Circuit(n_inputs=n + 1, instructions=tuple(instructions))


def antidegrader_circuit(q: Circuit) -> Circuit:
    """Map from the environment ``(flag copy, environment, shelf)`` back to the output ``(flag, data)``.

    With the copy at 0 the shelf holds the input and the circuit is run on it;
    with the copy at 1 the shelf is already ``|0>``.
    """

    aligned, _ = _square(q)
    n, w = aligned.n_inputs, aligned.width
    env = list(range(1, w - n + 1))
    shelf = list(range(w - n + 1, w + 1))
    instructions: List[Instruction] = [gate("X", 0)]
    if aligned.gates:
        instructions.append(controlled_block(0, aligned.placed(shelf + env)))
    instructions += [traceout(wire) for wire in env]
    return Circuit(n_inputs=w + 1, instructions=tuple(instructions))


def embed(q: Circuit, *, antidegradable: bool = False) -> Tuple[Circuit, Circuit, ReductionReport]:
    """The flagged circuit, its (anti)degrading map as a circuit, and the reduction report."""

    aligned, padding = _square(q)
    c = _flagged(aligned, antidegradable=antidegradable)
    helper = antidegrader_circuit(q) if antidegradable else degrader_circuit(q)
    kind = "antidegradable" if antidegradable else "degradable"
    report = ReductionReport(
        kind=kind,
        inputs={"q": circuit_digest(q)},
        parameters={"width": aligned.width, "environment": aligned.n_env},
        predicted={"relation": HALVING_RELATION, "factor": 0.5},
        artifacts={"c": circuit_digest(c), "antidegrader" if antidegradable else "degrader": circuit_digest(helper)},
        padding=padding,
    )
    LOGGER.info("%s embedding of a %d-qubit circuit: %d environment qubits", kind, aligned.n_inputs, aligned.n_env)
    return c, helper, report


def degradable_embed(q: Circuit) -> Tuple[Circuit, Channel, ReductionReport]:
    """Circuit for ``rho -> |0><0| (x) rho / 2 + |1><1| (x) Q(rho) / 2`` together with its degrading map."""

    c, helper, report = embed(q, antidegradable=False)
    return c, to_channel(helper, label="degrader"), report


def antidegradable_embed(q: Circuit) -> Tuple[Circuit, Channel, ReductionReport]:
    """Circuit for ``rho -> |0><0| (x) |0><0| / 2 + |1><1| (x) Q(rho) / 2`` together with its antidegrading map."""

    c, helper, report = embed(q, antidegradable=True)
    return c, to_channel(helper, label="antidegrader"), report


def embedding_circuits(q: Circuit, *, antidegradable: bool = False) -> Tuple[Circuit, Circuit]:
    """The embedded circuit and its (anti)degrading map as circuits."""

    c, helper, _ = embed(q, antidegradable=antidegradable)
    return c, helper


def measure_embedding(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Embed a padded pair, check the (anti)degrading maps and compare the distances."""

    cfg = cfg or OptimizerConfig()
    antidegradable = report.kind == "antidegradable"
    one, two, _ = pad_pair(q1, q2)
    delta = diamond_distance(to_channel(one), to_channel(two), cfg).value
    channels = []
    residual = 0.0
    for q in (one, two):
        c, helper = embedding_circuits(q, antidegradable=antidegradable)
        phi, mapping = to_channel(c), to_channel(helper)
        check = verify_antidegrading(mapping, phi) if antidegradable else verify_degrading(mapping, phi)
        residual = max(residual, check.residual)
        channels.append(phi)
    distance = diamond_distance(channels[0], channels[1], cfg).value
    LOGGER.info("Measured %s: input %.6f, embedded %.6f, residual %.3e", report.kind, delta, distance, residual)
    measured = {
        "input_distance": delta,
        "embedded_distance": distance,
        "predicted_value": delta / 2.0,
        "map_residual": residual,
    }
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})
