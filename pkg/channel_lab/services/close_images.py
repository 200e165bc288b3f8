"""Close Images constructions: from interactive verifiers, to log depth, and to distinguishability."""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.matrices import DensityMatrix, PureState
from channel_lab.models.reports import OptimizerConfig, ReductionReport
from channel_lab.services.circuits import (
    AlignedForm,
    WireAllocator,
    align_pair,
    ancilla,
    circuit_digest,
    controlled_block,
    depth,
    gate,
    inverse_instructions,
    is_stinespring_form,
    mixu_block,
    pad_pair,
    relabel_all,
    route_outputs,
    size,
    traceout,
)
from channel_lab.services.constructions import fan_out
from channel_lab.services.linalg import kron_all, psd_sqrt_array, ptrace_array, random_vector, trace_norm_array
from channel_lab.services.measures import fidelity_array
from channel_lab.services.optimizers import diamond_distance, max_output_fidelity
from channel_lab.services.simulator import circuit_unitary, simulate, to_channel
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

CLOSE_IMAGES_RELATION = "acceptance = fmax(Q1, Q2)^2"
LOGDEPTH_RELATION = "honest input gives |0...0><0...0| flags next to Q(rho); depth <= alpha log2(size) + beta"
QCD_RELATION = "distance(C1, C2) / 2 = fmax(Q1, Q2)"

LOGDEPTH_ALPHA = 2
LOGDEPTH_BETA = 12


def _require_normal_form(*circuits: Circuit) -> None:
    for index, circuit in enumerate(circuits, start=1):
        if not is_stinespring_form(circuit):
            raise ValueError(f"circuit {index} is not in Stinespring normal form")


def _digests(**circuits: Circuit) -> Dict[str, str]:
    return {name: circuit_digest(circuit) for name, circuit in circuits.items()}


# ----- Interactive verifier to Close Images -----

def qip_to_close_images(
    v1: Circuit,
    v2: Circuit,
    spaces: Tuple[Sequence[int], Sequence[int]],
) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Circuits whose images intersect exactly when the verifier can be made to accept.

    ``spaces`` is ``(V, M)``: the verifier's private wires (``V[0]`` holds the
    accept flag) and the message wires. The first circuit runs ``v1`` on
    ``|0>_V`` and the message; the second runs ``v2`` backwards from an
    accepting configuration. Both trace out the message and output ``V`` in
    the listed order; the first circuit's input is padded with discarded wires
    up to the second one's.
    """

    private, message = [list(wires) for wires in spaces]
    width = len(private) + len(message)
    if not private:
        raise ValueError("the verifier needs at least the accept flag among its private wires")
    if sorted(private + message) != list(range(width)):
        raise ValueError("the private and message wires must partition the verifier's wires")
    for name, verifier in (("first", v1), ("second", v2)):
        if verifier.n_inputs != width:
            raise ValueError(f"{name} verifier acts on {verifier.n_inputs} wires, expected {width}")
        if not verifier.is_unitary:
            raise ValueError(f"{name} verifier is not unitary")
    m, v = len(message), len(private)
    n_inputs = m + v - 1

    first_map = {wire: index for index, wire in enumerate(message)}
    first_map.update({wire: n_inputs + index for index, wire in enumerate(private)})
    first: List[Instruction] = [ancilla(n_inputs + index) for index in range(v)]
    first += [traceout(wire) for wire in range(m, n_inputs)]
    first += relabel_all(v1.instructions, first_map)
    first += [traceout(wire) for wire in range(m)]
    q1 = Circuit(n_inputs=n_inputs, instructions=tuple(first))

    second_map = {wire: index for index, wire in enumerate(message)}
    second_map.update({wire: m + index - 1 for index, wire in enumerate(private) if index > 0})
    second_map[private[0]] = n_inputs
    second: List[Instruction] = [ancilla(n_inputs), gate("X", n_inputs)]
    second += relabel_all(inverse_instructions(v2.instructions), second_map)
    second += [traceout(wire) for wire in range(m)]
    q2 = route_outputs(
        Circuit(n_inputs=n_inputs, instructions=tuple(second)),
        [n_inputs] + list(range(m, n_inputs)),
    )

    report = ReductionReport(
        kind="qip2ci",
        inputs=_digests(v1=v1, v2=v2),
        parameters={"private": private, "message": message},
        predicted={"relation": CLOSE_IMAGES_RELATION},
        artifacts=_digests(q1=q1, q2=q2),
        padding={"q1_inputs": v - 1, "q1_outputs": 0, "q2_inputs": 0, "q2_outputs": 0},
    )
    LOGGER.info("Verifier with %d private and %d message wires -> %d-qubit images", v, m, v)
    return q1, q2, report


def _bloch_grid(resolution: int) -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, resolution)
    phis = np.linspace(0.0, 2.0 * np.pi, 2 * resolution, endpoint=False)
    points = [np.zeros(3)]
    for radius in (1.0, 0.5):
        for theta in thetas:
            for phi in phis:
                points.append(radius * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]))
    return np.array(points)


def _qubit_states(vectors: np.ndarray) -> np.ndarray:
    x, y, z = vectors[..., 0], vectors[..., 1], vectors[..., 2]
    states = np.empty(vectors.shape[:-1] + (2, 2), dtype=complex)
    states[..., 0, 0] = 1 + z
    states[..., 0, 1] = x - 1j * y
    states[..., 1, 0] = x + 1j * y
    states[..., 1, 1] = 1 - z
    return states / 2


def fmax_close_images_grid(q1: Circuit, q2: Circuit, resolution: Optional[int] = None) -> float:
    """Maximum output fidelity of two one-qubit-input circuits by exhaustive prover search.

    Every pair of Bloch-ball grid points is scored, ties going to the first
    pair, and the best pair is polished with Nelder-Mead.
    """

    resolution = resolution or get_settings().grid_resolution
    phi1, phi2 = to_channel(q1), to_channel(q2)
    if phi1.in_dim != 2 or phi2.in_dim != 2:
        raise ValueError("the grid search covers one-qubit inputs only")
    if phi1.out_dim != phi2.out_dim:
        raise ValueError(f"output dims differ: {phi1.out_dims} vs {phi2.out_dims}")
    points = _bloch_grid(resolution)
    states = _qubit_states(points)
    roots1 = np.array([psd_sqrt_array(out) for out in np.einsum("aibj,pij->pab", phi1.choi_tensor, states)])
    roots2 = np.array([psd_sqrt_array(out) for out in np.einsum("aibj,pij->pab", phi2.choi_tensor, states)])
    scores = np.array([np.linalg.svd(root @ roots2, compute_uv=False).sum(axis=-1) for root in roots1])
    best = int(np.argmax(scores))
    first, second = divmod(best, len(points))

    def negative_fidelity(params: np.ndarray) -> float:
        left, right = params[:3], params[3:]
        left = left / max(1.0, float(np.linalg.norm(left)))
        right = right / max(1.0, float(np.linalg.norm(right)))
        rho = np.einsum("aibj,ij->ab", phi1.choi_tensor, _qubit_states(left))
        sigma = np.einsum("aibj,ij->ab", phi2.choi_tensor, _qubit_states(right))
        return -fidelity_array(rho, sigma)

    start = np.concatenate([points[first], points[second]])
    polished = scipy.optimize.minimize(
        negative_fidelity,
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    value = max(float(scores[first, second]), -float(polished.fun))
    LOGGER.debug("Grid prover: %d points, grid best %.6f, polished %.6f", len(points), scores[first, second], -polished.fun)
    return min(1.0, max(0.0, value))


def measure_qip_to_close_images(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    cfg = cfg or OptimizerConfig()
    fmax = max_output_fidelity(to_channel(q1), to_channel(q2), cfg).value
    measured = {"fmax": fmax, "acceptance": fmax * fmax}
    if q1.n_inputs == 1 and q2.n_inputs == 1:
        measured["grid_acceptance"] = fmax_close_images_grid(q1, q2) ** 2
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})


# ----- Log-depth Close Images -----

def _logdepth_pieces(q1: Circuit, q2: Circuit) -> Tuple[AlignedForm, AlignedForm, int]:
    _require_normal_form(q1, q2)
    one, two, _ = pad_pair(q1, q2)
    first, second = align_pair(one, two)
    return first, second, max(len(first.gates), len(second.gates), 1)


def _swap_test(
    test: int,
    copies: List[int],
    controls: Sequence[int],
    left: Sequence[int],
    right: Sequence[int],
) -> List[Instruction]:
    """Swap test of ``left`` against ``right`` performed only where the matching control holds ``|1>``."""

    tree = fan_out(test, copies)
    holders = [test] + copies
    swaps = [
        controlled_block(controls[j], [controlled_block(holders[j], [gate("SWAP", left[j], right[j])])])
        for j in range(len(left))
    ]
    return [gate("H", test)] + tree + swaps + list(reversed(tree)) + [gate("H", test)]


def _logdepth_circuit(aligned: AlignedForm, pieces: int, tests_first: bool) -> Tuple[Circuit, int]:
    n, k, w = aligned.n_inputs, aligned.n_outputs, aligned.width
    first_block = list(range(n))
    blocks: List[List[int]] = [first_block]
    shadows: List[List[int]] = [[]]
    offset = n
    for _ in range(1, pieces):
        blocks.append(list(range(offset, offset + w)))
        shadows.append(list(range(offset + w, offset + 2 * w)))
        offset += 2 * w
    allocator = WireAllocator(offset)

    flags: List[int] = []
    tests: List[Tuple[int, int]] = []
    for _ in range(1, pieces):
        slots = allocator.take(4)
        flags += slots
        tests.append((slots[0], slots[2]) if tests_first else (slots[1], slots[3]))
    first_block += allocator.take(w - n)

    coins: List[List[int]] = []
    test_copies: List[Tuple[List[int], List[int]]] = []
    for _ in range(1, pieces):
        coins.append([allocator.fresh()] + allocator.take(w - 1))
        test_copies.append((allocator.take(w - 1), allocator.take(w - 1)))

    fresh = flags + first_block[n:] + [wire for holders in coins for wire in holders]
    fresh += [wire for pair in test_copies for copies in pair for wire in copies]
    instructions: List[Instruction] = [ancilla(wire) for wire in fresh]

    for holders in coins:
        instructions.append(mixu_block([gate("X", holders[0])]))
        instructions += fan_out(holders[0], holders[1:])
    for boundary, holders in enumerate(coins, start=1):
        flips = [gate("X", wire) for wire in holders]
        test, _ = tests[boundary - 1]
        copies, _ = test_copies[boundary - 1]
        instructions += flips
        instructions += _swap_test(test, copies, holders, blocks[boundary], shadows[boundary])
        instructions += flips
    for index, block in enumerate(blocks):
        if index < len(aligned.gates):
            instructions += relabel_all([aligned.gates[index]], dict(enumerate(block)))
    for boundary, holders in enumerate(coins, start=1):
        _, test = tests[boundary - 1]
        _, copies = test_copies[boundary - 1]
        instructions += _swap_test(test, copies, holders, shadows[boundary], blocks[boundary - 1])

    traced = blocks[-1][k:] + [wire for block in blocks[:-1] for wire in block]
    traced += [wire for shadow in shadows for wire in shadow]
    traced += [wire for holders in coins for wire in holders]
    traced += [wire for pair in test_copies for copies in pair for wire in copies]
    instructions += [traceout(wire) for wire in traced]
    return Circuit(n_inputs=offset, instructions=tuple(instructions)), len(flags)


def ci_to_logdepth(q1: Circuit, q2: Circuit) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Run every gate of the pair as a separate piece on prover-supplied intermediate states.

    Each boundary between consecutive pieces gets two swap tests of which a
    random control bit enables one: the supplied copies against each other, or
    the second copy against the previous piece's output. The outputs are the
    last piece's output qubits followed by four flag qubits per boundary; test
    outcomes take slots 0 and 2 in the first circuit and slots 1 and 3 in the
    second, the remaining slots hold idle ``|0>`` dummies.
    """

    first, second, pieces = _logdepth_pieces(q1, q2)
    c1, n_flags = _logdepth_circuit(first, pieces, tests_first=True)
    c2, _ = _logdepth_circuit(second, pieces, tests_first=False)
    size_ = max(size(q1), size(q2))
    report = ReductionReport(
        kind="ci2logdepth",
        inputs=_digests(q1=q1, q2=q2),
        parameters={
            "pieces": pieces,
            "width": first.width,
            "flags": n_flags,
            "alpha": LOGDEPTH_ALPHA,
            "beta": LOGDEPTH_BETA,
            "size": size_,
            "depth": max(depth(c1), depth(c2)),
        },
        predicted={
            "relation": LOGDEPTH_RELATION,
            "depth_bound": LOGDEPTH_ALPHA * math.log2(max(size_, 1)) + LOGDEPTH_BETA,
            "failure_constant": 1.0 / 128.0,
        },
        artifacts=_digests(c1=c1, c2=c2),
    )
    LOGGER.info("Log-depth construction: %d pieces of width %d, depth %d", pieces, first.width, report.parameters["depth"])
    return c1, c2, report


def _logdepth_parts(aligned: AlignedForm, pieces: int, psi: PureState) -> List[np.ndarray]:
    n, w = aligned.n_inputs, aligned.width
    if psi.amplitudes.shape != (2**n,):
        raise ValueError(f"expected a state on {n} qubits")
    current = np.kron(psi.amplitudes, np.eye(2 ** (w - n), dtype=complex)[0])
    parts = [psi.amplitudes]
    for index in range(1, pieces):
        if index - 1 < len(aligned.gates):
            current = circuit_unitary([aligned.gates[index - 1]], range(w)) @ current
        parts += [current, current]
    return parts


def _joined(parts: Sequence[np.ndarray]) -> PureState:
    amplitudes = kron_all(*[part[:, np.newaxis] for part in parts])[:, 0]
    return PureState.from_array(amplitudes, (2,) * int(round(math.log2(amplitudes.shape[0]))))


def honest_logdepth_input(q1: Circuit, q2: Circuit, psi: PureState, *, first: bool = True) -> PureState:
    """Input making the log-depth circuit of ``q1`` (or ``q2``) simulate it on ``psi``.

    Both copies of each intermediate block hold the state reached by running
    the preceding pieces on ``psi`` with ancillas in ``|0>``.
    """

    one, two, pieces = _logdepth_pieces(q1, q2)
    return _joined(_logdepth_parts(one if first else two, pieces, psi))


def flag_probabilities(output: DensityMatrix, n_flags: int) -> List[float]:
    """Probability of reading ``1`` on each of the last ``n_flags`` output qubits."""

    qubits = len(output.dims)
    diagonal = np.real(np.diag(output.array)).reshape(output.dims)
    probabilities = []
    for axis in range(qubits - n_flags, qubits):
        probabilities.append(float(np.take(diagonal, 1, axis=axis).sum()))
    return probabilities


def measure_ci_to_logdepth(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    c1: Circuit,
    c2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Fill ``measured`` with the honest-input residual, the flags on a seeded mismatch and the depth.

    The mismatch replaces the second copy at the first boundary by a random
    state; its trace distance ``t`` to the honest block state is reported with
    the largest flag probability and the ``t^2 / 128`` floor it must clear.
    """

    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    first, second, pieces = _logdepth_pieces(q1, q2)
    one, two, _ = pad_pair(q1, q2)
    n_flags = report.parameters["flags"]
    psi = PureState.from_array(random_vector(rng, 2**first.n_inputs), (2,) * first.n_inputs)

    residual, honest_flags = 0.0, 0.0
    for circuit, source, aligned in ((c1, one, first), (c2, two, second)):
        output = simulate(circuit, _joined(_logdepth_parts(aligned, pieces, psi)).projector())
        k = len(output.dims) - n_flags
        marginal = ptrace_array(output.array, output.dims, range(k))
        residual = max(residual, trace_norm_array(marginal - simulate(source, psi.projector()).array))
        honest_flags = max([honest_flags] + flag_probabilities(output, n_flags))

    measured: Dict[str, object] = {
        "honest_residual": residual,
        "honest_flag_max": honest_flags,
        "depth_c1": depth(c1),
        "depth_c2": depth(c2),
        "depth_bound": report.predicted["depth_bound"],
        "depth_within_bound": max(depth(c1), depth(c2)) <= report.predicted["depth_bound"],
    }
    if n_flags:
        parts = _logdepth_parts(first, pieces, psi)
        honest_block = parts[1]
        parts[2] = random_vector(rng, honest_block.shape[0])
        distance = math.sqrt(max(0.0, 1.0 - abs(np.vdot(honest_block, parts[2])) ** 2))
        output = simulate(c1, _joined(parts).projector())
        flag_max = max(flag_probabilities(output, n_flags))
        measured.update(
            {
                "mismatch_distance": distance,
                "mismatch_flag_max": flag_max,
                "mismatch_floor": distance**2 / 128.0,
            }
        )
    LOGGER.info("Measured ci2logdepth: honest residual %.3g, depth %d", residual, max(depth(c1), depth(c2)))
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})


# ----- Close Images to distinguishability -----

def _qcd_circuit(first: AlignedForm, second: AlignedForm, flip: bool) -> Circuit:
    n, k, w = first.n_inputs, first.n_outputs, first.width
    wires = [position + 1 for position in range(w)]
    instructions: List[Instruction] = [ancilla(wire) for wire in range(n + 1, w + 1)]
    instructions.append(gate("X", 0))
    if first.gates:
        instructions.append(controlled_block(0, first.placed(wires)))
    instructions.append(gate("X", 0))
    if second.gates:
        instructions.append(controlled_block(0, second.placed(wires)))
    if flip:
        instructions.append(gate("Z", 0))
    instructions += [traceout(wire) for wire in range(1, k + 1)]
    return Circuit(n_inputs=n + 1, instructions=tuple(instructions))


def ci_to_qcd(q1: Circuit, q2: Circuit) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Control-selected complementary channels, the second followed by a phase flip on the control.

    The control is wire 0 (``|0>`` selects ``q1``) and the inputs follow it;
    both circuits output the control and the environment.
    """

    _require_normal_form(q1, q2)
    one, two, padding = pad_pair(q1, q2)
    first, second = align_pair(one, two)
    c1 = _qcd_circuit(first, second, flip=False)
    c2 = _qcd_circuit(first, second, flip=True)
    report = ReductionReport(
        kind="ci2qcd",
        inputs=_digests(q1=q1, q2=q2),
        parameters={"width": first.width, "environment": first.n_env},
        predicted={"relation": QCD_RELATION},
        artifacts=_digests(c1=c1, c2=c2),
        padding=padding,
    )
    LOGGER.info("Close Images -> distinguishability: %d inputs, %d environment qubits", c1.n_inputs - 1, first.n_env)
    return c1, c2, report


def _isometry(aligned: AlignedForm) -> np.ndarray:
    n, w = aligned.n_inputs, aligned.width
    unitary = circuit_unitary(aligned.gates, range(w))
    return unitary.reshape(2**w, 2**n, 2 ** (w - n))[:, :, 0]


def qcd_witness_gap(q1: Circuit, q2: Circuit, psi0: np.ndarray, psi1: np.ndarray, p: float) -> float:
    """Output difference norm of the distinguishability pair on ``sqrt(p)|0>psi0 + sqrt(1-p)|1>psi1``.

    ``psi0`` and ``psi1`` are vectors on the inputs followed by a reference.
    """

    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be a probability, got {p}")
    _require_normal_form(q1, q2)
    one, two, _ = pad_pair(q1, q2)
    first, second = align_pair(one, two)
    d_in, d_out = 2**first.n_inputs, 2**first.n_outputs
    psi0, psi1 = np.asarray(psi0, dtype=complex), np.asarray(psi1, dtype=complex)
    if psi0.shape != psi1.shape or psi0.size % d_in:
        raise ValueError("witness vectors must share a shape divisible by the input dimension")
    ref = psi0.size // d_in
    phi0 = np.kron(_isometry(first), np.eye(ref)) @ psi0
    phi1 = np.kron(_isometry(second), np.eye(ref)) @ psi1
    cross = phi0.reshape(d_out, -1).T @ phi1.reshape(d_out, -1).conj()
    return 4.0 * math.sqrt(p * (1.0 - p)) * trace_norm_array(cross)


def measure_ci_to_qcd(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    c1: Circuit,
    c2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Fill ``measured`` with the two independent estimates the reduction equates."""

    cfg = cfg or OptimizerConfig()
    one, two, _ = pad_pair(q1, q2)
    fmax = max_output_fidelity(to_channel(one), to_channel(two), cfg).value
    half = diamond_distance(to_channel(c1), to_channel(c2), cfg).value / 2.0
    LOGGER.info("Measured ci2qcd: fmax %.6f, half distance %.6f", fmax, half)
    measured = {"fmax": fmax, "half_distance": half, "gap": abs(half - fmax)}
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})
