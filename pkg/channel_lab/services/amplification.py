"""Distance amplification: parallel products, XOR mixtures and polarization."""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.reports import OptimizerConfig, ReductionReport
from channel_lab.services.circuits import (
    AlignedForm,
    WireAllocator,
    align_pair,
    ancilla,
    circuit_digest,
    controlled_block,
    gate,
    mixu_block,
    pad_pair,
    route,
    tensor_power,
    traceout,
)
from channel_lab.services.optimizers import diamond_distance
from channel_lab.services.simulator import to_channel

LOGGER = logging.getLogger(__name__)

PRODUCT_RELATION = "2 - 2 exp(-r delta^2 / 8) < distance <= r delta"
XOR_RELATION = "distance = 2 (delta / 2)^r"
POLARIZE_RELATION = "distance <= 2^-n when delta <= b; distance >= 2 - 2^-n when delta >= a"


def _digests(**circuits: Circuit) -> Dict[str, str]:
    return {name: circuit_digest(circuit) for name, circuit in circuits.items()}


# ----- Predicted relations -----

def product_bounds(delta: float, r: int) -> Tuple[float, float]:
    """Bracket on the distance of ``r`` parallel copies of a pair at distance ``delta``."""

    lower = 2.0 - 2.0 * math.exp(-r * delta * delta / 8.0)
    return lower, min(2.0, r * delta)


def xor_distance(delta: float, r: int) -> float:
    return 2.0 * (delta / 2.0) ** r


# ----- Direct product -----

def direct_product(q1: Circuit, q2: Circuit, r: int) -> Tuple[Circuit, Circuit, ReductionReport]:
    """``r`` parallel copies of each circuit, after padding the pair to common sizes."""

    if r < 1:
        raise ValueError(f"need at least one copy, got r={r}")
    one, two, padding = pad_pair(q1, q2)
    c1, c2 = tensor_power(one, r), tensor_power(two, r)
    report = ReductionReport(
        kind="product",
        inputs=_digests(q1=q1, q2=q2),
        parameters={"r": r},
        predicted={"relation": PRODUCT_RELATION, "upper_factor": r},
        artifacts=_digests(c1=c1, c2=c2),
        padding=padding,
    )
    LOGGER.info("Direct product with r=%d: %d -> %d inputs", r, one.n_inputs, c1.n_inputs)
    return c1, c2, report


# ----- XOR mixture -----

def _xor_circuit(first_aligned: AlignedForm, second_aligned: AlignedForm, r: int, odd: bool) -> Circuit:
    n, k, width = first_aligned.n_inputs, first_aligned.n_outputs, first_aligned.width
    allocator = WireAllocator(r * n)
    copies: List[List[int]] = []
    for index in range(r):
        copies.append([index * n + p for p in range(n)] + allocator.take(width - n))
    bits = allocator.take(r - 1)
    parity = allocator.fresh()

    instructions: List[Instruction] = [ancilla(wire) for wires in copies for wire in wires[n:]]
    instructions += [ancilla(wire) for wire in bits] + [ancilla(parity)]
    for bit in bits:
        instructions.append(mixu_block([gate("X", bit)]))
        instructions.append(gate("CNOT", bit, parity))
    if odd:
        instructions.append(gate("X", parity))

    for wires, control in zip(copies, bits + [parity]):
        first_gates = first_aligned.placed(wires)
        second_gates = second_aligned.placed(wires)
        if first_gates:
            instructions.append(controlled_block(control, first_gates))
        instructions.append(gate("X", control))
        if second_gates:
            instructions.append(controlled_block(control, second_gates))
        instructions.append(gate("X", control))

    instructions += [traceout(wire) for wires in copies for wire in wires[k:]]
    instructions += [traceout(wire) for wire in bits] + [traceout(parity)]
    outputs = [wire for wires in copies for wire in wires[:k]]
    instructions += route(outputs, sorted(outputs))
    return Circuit(n_inputs=r * n, instructions=tuple(instructions))


def xor_mix(q1: Circuit, q2: Circuit, r: int) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Uniform mixtures over ``r``-tuples of copies holding an odd (first) or even (second) number of ``q1``.

    Each tuple entry is selected by a control bit; the first ``r - 1`` bits are
    uniformly random and the last one is their parity, flipped for the odd circuit.
    """

    if r < 1:
        raise ValueError(f"need at least one copy, got r={r}")
    one, two, padding = pad_pair(q1, q2)
    if r == 1:
        c1, c2 = one, two
    else:
        first, second = align_pair(one, two)
        c1 = _xor_circuit(first, second, r, odd=True)
        c2 = _xor_circuit(first, second, r, odd=False)
    report = ReductionReport(
        kind="xor",
        inputs=_digests(q1=q1, q2=q2),
        parameters={"r": r},
        predicted={"relation": XOR_RELATION, "exponent": r},
        artifacts=_digests(c1=c1, c2=c2),
        padding=padding,
    )
    LOGGER.info("XOR mixture with r=%d: %d instructions", r, len(c1.instructions))
    return c1, c2, report


# ----- Polarization -----

class PolarizationParameters(NamedTuple):
    r: int
    s: int
    t: int


def polarization_parameters(n: int, a: float, b: float) -> PolarizationParameters:
    """Copy counts for the XOR / product / XOR pipeline reaching error ``2^-n``."""

    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 < b < a < 2:
        raise ValueError(f"need 0 < b < a < 2, got a={a}, b={b}")
    if not 2 * b < a * a:
        raise ValueError(f"need 2b < a^2, got a={a}, b={b}")
    r = math.ceil(math.log(16 * n) / math.log(a * a / (2 * b)) - 1e-9)
    half = Fraction(str(b)) / 2
    s = math.floor(half ** (-r) / 4)
    t = math.ceil(Fraction(n + 1, 2))
    return PolarizationParameters(r=max(1, r), s=max(1, s), t=t)


def polarize(q1: Circuit, q2: Circuit, n: int, a: float, b: float) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Push the pair's distance below ``2^-n`` or above ``2 - 2^-n`` depending on its promise."""

    params = polarization_parameters(n, a, b)
    step1, step2, first = xor_mix(q1, q2, params.r)
    step1, step2, _ = direct_product(step1, step2, params.s)
    c1, c2, _ = xor_mix(step1, step2, params.t)
    report = ReductionReport(
        kind="polarize",
        inputs=_digests(q1=q1, q2=q2),
        parameters={"n": n, "a": a, "b": b, "r": params.r, "s": params.s, "t": params.t},
        predicted={
            "relation": POLARIZE_RELATION,
            "no_instance_bound": 2.0**-n,
            "yes_instance_bound": 2.0 - 2.0**-n,
        },
        artifacts=_digests(c1=c1, c2=c2),
        padding=first.padding,
    )
    LOGGER.info("Polarized with r=%d s=%d t=%d: %d inputs", params.r, params.s, params.t, c1.n_inputs)
    return c1, c2, report


# ----- Measured companions -----

def measure_amplification(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    c1: Circuit,
    c2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Fill ``measured`` with seesaw distances of the input and output pairs."""

    cfg = cfg or OptimizerConfig()
    one, two, _ = pad_pair(q1, q2)
    delta = diamond_distance(to_channel(one), to_channel(two), cfg).value
    distance = diamond_distance(to_channel(c1), to_channel(c2), cfg).value
    measured: Dict[str, float] = {"input_distance": delta, "output_distance": distance}
    r = report.parameters.get("r", 1)
    if report.kind == "product":
        measured["predicted_lower"], measured["predicted_upper"] = product_bounds(delta, r)
    elif report.kind == "xor":
        measured["predicted_value"] = xor_distance(delta, r)
    LOGGER.info("Measured %s: input %.6f, output %.6f", report.kind, delta, distance)
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})
