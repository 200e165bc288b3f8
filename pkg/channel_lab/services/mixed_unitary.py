"""Mixed-unitary approximations of channels and the ancilla-mixing circuit construction."""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from channel_lab.errors import MissingRepresentationError
from channel_lab.models.circuit import Circuit, Instruction
from channel_lab.models.matrices import DensityMatrix
from channel_lab.models.reports import OptimizerConfig, ReductionReport
from channel_lab.services.channels import Channel, MixedUnitaryRep, apply_array, weyl_mixture
from channel_lab.services.circuits import (
    aligned_form,
    circuit_digest,
    gate,
    is_stinespring_form,
    mixu_block,
    pad_pair,
    route,
    to_stinespring_form,
)
from channel_lab.services.linalg import hermitian_eigh, random_density, trace_norm_array, weyl_array
from channel_lab.services.measures import entropy_of_spectrum
from channel_lab.services.optimizers import diamond_distance, max_output_p_norm, min_output_entropy
from channel_lab.services.simulator import simulate_array, to_channel
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

APPROX_RELATION = "Phi'(|0><0| (x) s) = Phi(s) (x) I_B / dB; Phi' is mixed-unitary"
ENTROPY_RELATION = "S_min(Phi) >= S_min(Phi') - log dB >= S_min(Phi) - 1/dA"
NORM_RELATION = "nu_p(Phi) <= nu_p(Phi') / ||I_B / dB||_p <= nu_p(Phi) + 2 dB / dA"
CIRCUIT_RELATION = "distance(Q1, Q2) <= distance(C1, C2) <= distance(Q1, Q2) + 2^-(m-3)"


# ----- Channel construction -----

def _subspace_dephasing(d: int, d_h: int) -> MixedUnitaryRep:
    phase = np.diag(np.concatenate([np.ones(d_h), -np.ones(d - d_h)])).astype(complex)
    return MixedUnitaryRep(probabilities=[0.5, 0.5], unitaries=np.array([np.eye(d, dtype=complex), phase]))


def _subspace_depolarizer(d: int, d_h: int) -> MixedUnitaryRep:
    rest = d - d_h
    unitaries = [
        scipy.linalg.block_diag(np.eye(d_h, dtype=complex), weyl_array(rest, a, b))
        for a in range(rest)
        for b in range(rest)
    ]
    return MixedUnitaryRep(probabilities=np.full(len(unitaries), 1.0 / len(unitaries)), unitaries=np.array(unitaries))


def _dilation_stage(phi: Channel, extra: int) -> MixedUnitaryRep:
    """Stinespring unitary on ``(A, X, H)`` with the padding qubits ``X`` joining the environment."""

    rep = phi.stinespring
    d_a, d_x, d_h = rep.anc_dim, 2**extra, phi.in_dim
    d = d_a * d_x * d_h
    reorder = np.eye(d, dtype=complex).reshape(d_a, d_x, d_h, d).transpose(2, 0, 1, 3).reshape(d, d)
    unitary = np.kron(rep.unitary, np.eye(d_x)) @ reorder
    return MixedUnitaryRep(probabilities=[1.0], unitaries=unitary[np.newaxis])


def _output_depolarizer(d_k: int, d_b: int) -> MixedUnitaryRep:
    unitaries = [np.kron(np.eye(d_k), weyl_array(d_b, a, b)) for a in range(d_b) for b in range(d_b)]
    return MixedUnitaryRep(probabilities=np.full(len(unitaries), 1.0 / len(unitaries)), unitaries=np.array(unitaries))


def mixed_unitary_approx(phi: Channel, anc_extra: int = 0) -> Tuple[Channel, ReductionReport]:
    """Mixed-unitary channel on ``A (x) H -> K (x) B`` simulating ``phi`` on ``|0>`` ancillas.

    Inputs off ``S0 = |0> (x) H`` are phase-flipped with probability one half,
    depolarized within ``S0``'s complement, sent through the dilation, and the
    environment ``B`` is depolarized.
    """

    if phi.stinespring is None:
        raise MissingRepresentationError("mixed-unitary approximation needs a Stinespring representation")
    if anc_extra < 0:
        raise ValueError(f"extra ancilla count must be non-negative, got {anc_extra}")
    rep = phi.stinespring
    d_h, d_k = phi.in_dim, phi.out_dim
    d_a = rep.anc_dim * 2**anc_extra
    d_b = rep.env_dim * 2**anc_extra
    d = d_a * d_h
    stages = [
        _subspace_dephasing(d, d_h),
        _subspace_depolarizer(d, d_h) if d > d_h else weyl_mixture(d, [(0, 0)]),
        _dilation_stage(phi, anc_extra),
        _output_depolarizer(d_k, d_b),
    ]
    staged = Channel.from_mixed_unitary(stages, (d,))
    phi_prime = Channel.from_choi(
        staged.choi_matrix,
        (d_a,) + phi.in_dims,
        phi.out_dims + (d_b,),
        mixed_unitary=tuple(stages),
        label=f"mixed-unitary({phi.label})" if phi.label else "mixed-unitary",
    )
    report = ReductionReport(
        kind="mixed-unitary-channel",
        parameters={"anc_extra": anc_extra, "dim_a": d_a, "dim_b": d_b, "unitaries": sum(len(s.probabilities) for s in stages)},
        predicted={
            "relation": APPROX_RELATION,
            "entropy": ENTROPY_RELATION,
            "norm": NORM_RELATION,
            "subspace_mixing_bound": 2.0 / d_a,
            "entropy_slack": 1.0 / d_a,
            "norm_slack": 2.0 * d_b / d_a,
        },
    )
    LOGGER.info("Mixed-unitary approximation: dim A=%d, dim B=%d, %d stages", d_a, d_b, len(stages))
    return phi_prime, report


def simulation_residual(phi: Channel, phi_prime: Channel) -> float:
    """Largest Choi-entry gap between ``s -> Phi'(|0><0| (x) s)`` and ``s -> Phi(s) (x) I_B / dB``."""

    d_h, d_k = phi.in_dim, phi.out_dim
    d_a = phi_prime.in_dim // d_h
    d_b = phi_prime.out_dim // d_k
    zero = np.zeros((d_a, d_a), dtype=complex)
    zero[0, 0] = 1.0
    omega = np.eye(d_h, dtype=complex).reshape(-1)
    simulated = apply_array(phi_prime, np.kron(zero, np.outer(omega, omega)), d_h)
    target = np.einsum("aibj,ec->aeibcj", phi.choi_tensor, np.eye(d_b) / d_b).reshape(simulated.shape)
    return float(np.max(np.abs(simulated - target)))


def unitality_residual(phi_prime: Channel) -> float:
    d = phi_prime.in_dim
    return float(np.max(np.abs(apply_array(phi_prime, np.eye(d, dtype=complex)) - np.eye(d))))


def subspace_mixing_distance(phi_prime: Channel, rho: np.ndarray) -> float:
    """``||Phi'(rho) - I / d||_1`` for an input ``rho``."""

    d = phi_prime.out_dim
    return trace_norm_array(apply_array(phi_prime, rho) - np.eye(d) / d)


def random_complement_state(rng: np.random.Generator, phi_prime: Channel, d_h: int) -> np.ndarray:
    """Random mixed state supported on the complement of ``|0> (x) H``."""

    d = phi_prime.in_dim
    rest = random_density(rng, (d - d_h,)).array
    rho = np.zeros((d, d), dtype=complex)
    rho[d_h:, d_h:] = rest
    return rho


def measure_mixed_unitary_approx(
    report: ReductionReport,
    phi: Channel,
    phi_prime: Channel,
    cfg: Optional[OptimizerConfig] = None,
    p: float = 2.0,
) -> ReductionReport:
    """Estimate both sides of the entropy and p-norm sandwiches.

    The seesaw values on ``Phi'`` are combined with the simulated optimum of
    ``Phi`` (input ``|0> (x) witness``) so both estimates stay consistent.
    """

    cfg = cfg or OptimizerConfig()
    d_a, d_b = report.parameters["dim_a"], report.parameters["dim_b"]

    def lifted(vector: np.ndarray) -> np.ndarray:
        zero = np.zeros(d_a, dtype=complex)
        zero[0] = 1.0
        state = np.kron(zero, vector)
        return apply_array(phi_prime, np.outer(state, state.conj()))

    smin = min_output_entropy(phi, cfg)
    values, _ = hermitian_eigh(lifted(smin.witness["input"]))
    smin_prime = min(min_output_entropy(phi_prime, cfg).value, entropy_of_spectrum(np.clip(values, 0.0, None)))

    nu = max_output_p_norm(phi, p, cfg)
    values, _ = hermitian_eigh(lifted(nu.witness["input"]))
    direct = float(np.sum(np.clip(values, 0.0, None) ** p) ** (1.0 / p))
    nu_prime = max(max_output_p_norm(phi_prime, p, cfg).value, direct)
    mixed_norm = d_b ** (1.0 / p - 1.0)

    rng = np.random.default_rng(cfg.seed)
    mixing = subspace_mixing_distance(phi_prime, random_complement_state(rng, phi_prime, phi.in_dim))
    measured = {
        "smin": smin.value,
        "smin_prime_shifted": smin_prime - math.log2(d_b),
        "smin_lower": smin.value - 1.0 / d_a,
        "nu": nu.value,
        "nu_prime_scaled": nu_prime / mixed_norm,
        "nu_upper": nu.value + 2.0 * d_b / d_a,
        "p": p,
        "simulation_residual": simulation_residual(phi, phi_prime),
        "unitality_residual": unitality_residual(phi_prime),
        "subspace_mixing": mixing,
    }
    LOGGER.info("Measured mixed-unitary sandwiches: S_min %.6f, nu_%g %.6f", smin.value, p, nu.value)
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})


# ----- Circuit construction -----

def mixer_instructions(a_wires: Sequence[int], h_wires: Sequence[int]) -> List[Instruction]:
    """Ancilla-mixing network: each ancilla scrambles every other wire, then is scrambled back by the rest."""

    instructions: List[Instruction] = []
    a_wires, h_wires = list(a_wires), list(h_wires)
    for control in a_wires:
        others = [wire for wire in a_wires if wire != control]
        instructions += [gate("CDEPOL", control, target) for target in others + h_wires]
        instructions += [gate("CDEPOL", other, control) for other in others]
    return instructions


def mixed_unitary_circuit(q: Circuit, anc_extra: int = 0, *, min_ancillas: int = 0) -> Tuple[Circuit, ReductionReport]:
    """Circuit on ``(A, H)`` that runs ``q`` faithfully when ``A`` is ``|0...0>`` and scrambles otherwise.

    ``A`` holds ``q``'s ancillas plus ``anc_extra`` padding qubits; the
    environment is depolarized instead of traced, so the output is ``(K, B)``.
    """

    if anc_extra < 0:
        raise ValueError(f"extra ancilla count must be non-negative, got {anc_extra}")
    if not is_stinespring_form(q):
        raise ValueError("mixed-unitary circuit construction needs a circuit in Stinespring normal form")
    natural = aligned_form(q)
    n = q.n_inputs
    m = max(natural.n_ancillas, min_ancillas) + anc_extra
    if m < 1:
        raise ValueError("the construction needs at least one ancilla qubit")
    aligned = aligned_form(q, n + m)
    a_wires = list(range(m))
    h_wires = list(range(m, m + n))
    placement = h_wires + a_wires

    instructions: List[Instruction] = [mixu_block([gate("Z", wire)]) for wire in a_wires]
    instructions += mixer_instructions(a_wires, h_wires)
    instructions += aligned.placed(placement)
    instructions += route(placement, list(range(n + m)))
    for wire in range(aligned.n_outputs, n + m):
        instructions += [mixu_block([gate("X", wire)]), mixu_block([gate("Z", wire)])]
    circuit = Circuit(n_inputs=n + m, instructions=tuple(instructions))
    epsilon = 2.0 ** -(m - 3)
    report = ReductionReport(
        kind="mixed-unitary",
        inputs={"q": circuit_digest(q)},
        parameters={"ancillas": m, "anc_extra": anc_extra, "epsilon": epsilon},
        predicted={"relation": CIRCUIT_RELATION, "epsilon": epsilon, "branch_bound": 2.0 ** -(m - 1)},
        artifacts={"c": circuit_digest(circuit)},
    )
    LOGGER.info("Mixed-unitary circuit with %d ancilla qubits (epsilon %.3g)", m, epsilon)
    return circuit, report


def mixed_unitary_pair(q1: Circuit, q2: Circuit, anc_extra: int = 0) -> Tuple[Circuit, Circuit, ReductionReport]:
    """Both circuits padded, normalized and built over a common ancilla register."""

    one, two, padding = pad_pair(q1, q2)
    one, two = to_stinespring_form(one), to_stinespring_form(two)
    common = max(aligned_form(one).n_ancillas, aligned_form(two).n_ancillas)
    c1, report = mixed_unitary_circuit(one, anc_extra, min_ancillas=common)
    c2, _ = mixed_unitary_circuit(two, anc_extra, min_ancillas=common)
    report = report.model_copy(
        update={
            "inputs": {"q1": circuit_digest(q1), "q2": circuit_digest(q2)},
            "artifacts": {"c1": circuit_digest(c1), "c2": circuit_digest(c2)},
            "padding": padding,
        }
    )
    return c1, c2, report


def ancilla_mixing_residual(c: Circuit, k: int, rho: DensityMatrix, ref_dims: Sequence[int] = ()) -> float:
    """``||C(|k><k| (x) rho) - I / d (x) rho_ref||_1`` for a basis state ``|k>`` on the ancilla register."""

    ref_dims = tuple(ref_dims)
    n = len(rho.dims) - len(ref_dims)
    m = c.n_inputs - n
    if not 0 <= k < 2**m:
        raise ValueError(f"basis index {k} out of range for {m} ancilla qubits")
    basis = np.zeros((2**m, 2**m), dtype=complex)
    basis[k, k] = 1.0
    d_ref = math.prod(ref_dims)
    output = simulate_array(c, np.kron(basis, rho.array), d_ref)
    d_out = output.shape[0] // d_ref
    reference = np.trace(rho.array.reshape(2**n, d_ref, 2**n, d_ref), axis1=0, axis2=2)
    return trace_norm_array(output - np.kron(np.eye(d_out) / d_out, reference))


def _branch_channel(c: Circuit, k: int, n: int) -> Channel:
    """Channel on ``H`` obtained by fixing the ancilla register of ``c`` to ``|k>``."""

    m = c.n_inputs - n
    d_h = 2**n
    basis = np.zeros((2**m, 2**m), dtype=complex)
    basis[k, k] = 1.0
    omega = np.eye(d_h, dtype=complex).reshape(-1)
    choi = simulate_array(c, np.kron(basis, np.outer(omega, omega)), d_h)
    return Channel.from_choi((choi + choi.conj().T) / 2, (2,) * n, (2,) * len(c.output_wires))


def structured_distance_bracket(
    report: ReductionReport,
    q1: Circuit,
    q2: Circuit,
    c1: Circuit,
    c2: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Distance of the constructed pair as the worst basis-state branch of the dephased ancillas.

    The leading Z mixtures dephase the ancilla register, so every input is a
    mixture over basis states ``|k>`` and the distance is the largest branch
    distance. Pairs narrow enough to compile are also compared directly.
    """

    cfg = cfg or OptimizerConfig()
    one, two, _ = pad_pair(q1, q2)
    delta = diamond_distance(to_channel(one), to_channel(two), cfg).value
    n = one.n_inputs
    m = c1.n_inputs - n
    branches = [
        diamond_distance(_branch_channel(c1, k, n), _branch_channel(c2, k, n), cfg).value for k in range(2**m)
    ]
    distance = max(branches)
    measured = {
        "input_distance": delta,
        "honest_branch": branches[0],
        "worst_scrambled_branch": max(branches[1:], default=0.0),
        "constructed_distance": distance,
        "upper": delta + report.predicted["epsilon"],
    }
    widest = max(c1.n_inputs, len(c1.output_wires))
    if widest <= get_settings().choi_max_qubits:
        measured["direct_distance"] = diamond_distance(to_channel(c1), to_channel(c2), cfg).value
    LOGGER.info("Measured mixed-unitary circuit pair: input %.6f, constructed %.6f over %d branches", delta, distance, len(branches))
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})


def measure_mixed_unitary_circuit(
    report: ReductionReport,
    q: Circuit,
    c: Circuit,
    cfg: Optional[OptimizerConfig] = None,
) -> ReductionReport:
    """Honest-branch residual and worst ancilla-mixing residual of a single constructed circuit on a seeded state."""

    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    n = q.n_inputs
    m = c.n_inputs - n
    rho = random_density(rng, (2,) * n)
    zero = np.zeros((2**m, 2**m), dtype=complex)
    zero[0, 0] = 1.0
    output = simulate_array(c, np.kron(zero, rho.array))
    d_b = 2 ** (len(c.output_wires) - len(q.output_wires))
    honest = trace_norm_array(output - np.kron(simulate_array(q, rho.array), np.eye(d_b) / d_b))
    scrambled = max((ancilla_mixing_residual(c, k, rho) for k in range(1, 2**m)), default=0.0)
    measured = {
        "honest_residual": honest,
        "worst_mixing_residual": scrambled,
        "branch_bound": report.predicted["branch_bound"],
    }
    LOGGER.info("Measured mixed-unitary circuit: honest %.3g, worst mixing %.6f", honest, scrambled)
    return report.model_copy(update={"measured": measured, "seed": cfg.seed})
