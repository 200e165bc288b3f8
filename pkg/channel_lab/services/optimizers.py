"""Restarted seesaw optimizers for channel functionals.

Every optimizer maximizes an objective over pure inputs (with a reference system
where mixed inputs matter) by alternating exact maximizations, so that each
recorded objective value is at least the previous one. Restarts use independent
generators spawned from the configured seed; the best restart wins, ties going
to the lowest index.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from channel_lab.errors import MissingRepresentationError
from channel_lab.models.matrices import ComplexMatrix
from channel_lab.models.reports import MeasureResult, OptimizerConfig
from channel_lab.services.channels import Channel, adjoint_array, apply_array, kraus_operators
from channel_lab.services.linalg import hermitian_eigh, is_unitary, random_vector, top_eigenvector, trace_norm_array
from channel_lab.services.measures import entropy_of_spectrum
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

State = Dict[str, np.ndarray]
Start = Callable[[np.random.Generator], Tuple[State, float]]
Step = Callable[[State], Tuple[State, float]]


def _ascend(
    cfg: OptimizerConfig,
    start: Start,
    step: Step,
    *,
    sense: str = "max",
    bound: str = "lower",
    name: str = "objective",
) -> MeasureResult:
    traces: List[List[float]] = []
    finals: List[Tuple[float, State]] = []
    for restart, rng in enumerate(cfg.restart_generators()):
        state, value = start(rng)
        trace = [value]
        for _ in range(cfg.max_iters):
            candidate, candidate_value = step(state)
            if not candidate_value >= value:
                break
            improvement = candidate_value - value
            state, value = candidate, candidate_value
            trace.append(value)
            if improvement <= cfg.conv_tol * max(1.0, abs(value)):
                break
        LOGGER.debug("%s restart %d: %d steps, value %.12g", name, restart, len(trace) - 1, value)
        traces.append(trace)
        finals.append((value, state))
    best = int(np.argmax([value for value, _ in finals]))
    best_value, best_state = finals[best]
    return MeasureResult(
        value=best_value if sense == "max" else -best_value,
        bound=bound,
        sense=sense,
        witness={key: np.array(array) for key, array in best_state.items()},
        iterations=traces,
        best_restart=best,
        seed=cfg.seed,
    )


# ----- Output entropy and p-norms -----

def _output_spectrum(phi: Channel, vector: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    output = apply_array(phi, np.outer(vector, vector.conj()))
    values, vectors = hermitian_eigh(output)
    return np.clip(values, 0.0, None), vectors, output


def min_output_entropy(phi: Channel, cfg: Optional[OptimizerConfig] = None) -> MeasureResult:
    """Upper bound on the minimum output entropy from restarted ascent over pure inputs.

    Negated entropy is convex in the input, so each step moves to the top
    eigenvector of the pulled-back gradient ``Phi^dagger(log2 Phi(rho))``.
    """

    cfg = cfg or OptimizerConfig()
    floor = get_settings().entropy_floor

    def evaluate(vector: np.ndarray) -> Tuple[State, float]:
        values, vectors, _ = _output_spectrum(phi, vector)
        logs = np.log2(np.maximum(values, floor))
        gradient = (vectors * logs) @ vectors.conj().T
        return {"input": vector, "gradient": gradient}, -entropy_of_spectrum(values)

    def start(rng: np.random.Generator) -> Tuple[State, float]:
        return evaluate(random_vector(rng, phi.in_dim))

    def step(state: State) -> Tuple[State, float]:
        return evaluate(top_eigenvector(adjoint_array(phi, state["gradient"])))

    result = _ascend(cfg, start, step, sense="min", bound="upper", name="smin")
    return result.model_copy(update={"witness": {"input": result.witness["input"]}})


def max_output_p_norm(phi: Channel, p: float, cfg: Optional[OptimizerConfig] = None) -> MeasureResult:
    """Lower bound on the maximum output p-norm from restarted ascent over pure inputs."""

    if p < 1:
        raise ValueError(f"p-norms need p >= 1, got {p}")
    cfg = cfg or OptimizerConfig()

    def evaluate(vector: np.ndarray) -> Tuple[State, float]:
        values, vectors, _ = _output_spectrum(phi, vector)
        if math.isinf(p):
            top = vectors[:, :1]
            return {"input": vector, "gradient": top @ top.conj().T}, float(values[0])
        weights = values ** (p - 1.0)
        gradient = (vectors * weights) @ vectors.conj().T
        top = float(values[0])
        norm = top * float(np.sum((values / top) ** p)) ** (1.0 / p) if top > 0 else 0.0
        return {"input": vector, "gradient": gradient}, norm

    def start(rng: np.random.Generator) -> Tuple[State, float]:
        return evaluate(random_vector(rng, phi.in_dim))

    def step(state: State) -> Tuple[State, float]:
        return evaluate(top_eigenvector(adjoint_array(phi, state["gradient"])))

    result = _ascend(cfg, start, step, name="nu_p")
    return result.model_copy(update={"witness": {"input": result.witness["input"]}})


def min_output_renyi_entropy(phi: Channel, p: float, cfg: Optional[OptimizerConfig] = None) -> float:
    """Minimum output Renyi entropy of order ``p`` derived from the maximum output p-norm."""

    if p <= 1:
        raise ValueError(f"Renyi order must exceed 1, got {p}")
    norm = max_output_p_norm(phi, p, cfg).value
    if math.isinf(p):
        return -math.log2(norm)
    return p / (1.0 - p) * math.log2(norm)


# ----- Diamond distance -----

def _check_pair(phi1: Channel, phi2: Channel) -> None:
    if phi1.in_dim != phi2.in_dim or phi1.out_dim != phi2.out_dim:
        raise ValueError(
            f"channels differ in shape: {phi1.in_dims}->{phi1.out_dims} vs {phi2.in_dims}->{phi2.out_dims}"
        )


def _difference(phi1: Channel, phi2: Channel) -> Channel:
    """Pseudo-channel container for the Choi difference (not validated as CPTP)."""

    return Channel.model_construct(
        in_dims=phi1.in_dims,
        out_dims=phi1.out_dims,
        choi_matrix=phi1.choi_matrix - phi2.choi_matrix,
    )


def diamond_distance(phi1: Channel, phi2: Channel, cfg: Optional[OptimizerConfig] = None) -> MeasureResult:
    """Lower bound on ``||phi1 - phi2||_diamond`` by a seesaw over pure states on H (x) H.

    Given the input, the sign observable of the output difference is fixed;
    given the observable, the input becomes the top eigenvector of its pull-back.
    """

    _check_pair(phi1, phi2)
    cfg = cfg or OptimizerConfig()
    delta = _difference(phi1, phi2)
    ref = phi1.in_dim

    def evaluate(vector: np.ndarray) -> Tuple[State, float]:
        output = apply_array(delta, np.outer(vector, vector.conj()), ref)
        values, vectors = hermitian_eigh(output)
        signs = np.where(values > 0, 1.0, -1.0)
        observable = (vectors * signs) @ vectors.conj().T
        return {"state": vector, "observable": observable}, float(np.sum(np.abs(values)))

    def start(rng: np.random.Generator) -> Tuple[State, float]:
        return evaluate(random_vector(rng, ref * ref))

    def step(state: State) -> Tuple[State, float]:
        return evaluate(top_eigenvector(adjoint_array(delta, state["observable"], ref)))

    result = _ascend(cfg, start, step, name="diamond")
    return result.model_copy(update={"witness": {"state": result.witness["state"]}})


def diamond_unitary_oracle(u: np.ndarray | ComplexMatrix, v: np.ndarray | ComplexMatrix) -> float:
    """Closed-form diamond distance between two unitary channels.

    With the eigenvalues of ``u^dagger v`` spanning an arc of angle ``s`` the
    distance is ``2 sin(s / 2)``, and 2 once the arc reaches half the circle.
    """

    u = u.data if isinstance(u, ComplexMatrix) else np.asarray(u, dtype=complex)
    v = v.data if isinstance(v, ComplexMatrix) else np.asarray(v, dtype=complex)
    if u.shape != v.shape or not is_unitary(u) or not is_unitary(v):
        raise ValueError("diamond_unitary_oracle needs two unitaries of the same dimension")
    angles = np.sort(np.mod(np.angle(np.linalg.eigvals(u.conj().T @ v)), 2 * np.pi))
    gaps = np.diff(np.concatenate([angles, angles[:1] + 2 * np.pi]))
    span = 2 * np.pi - float(np.max(gaps))
    if span >= np.pi:
        return 2.0
    return 2.0 * math.sin(span / 2.0)


# ----- Maximum output fidelity -----

def _isometry(kraus: np.ndarray, env: int) -> np.ndarray:
    """``V = sum_k A_k (x) |k>`` as a matrix on (output, environment) rows."""

    count, d_out, d_in = kraus.shape
    stacked = np.zeros((d_out, env, d_in), dtype=complex)
    stacked[:, :count, :] = kraus.transpose(1, 0, 2)
    return stacked.reshape(d_out * env, d_in)


def _polar_unitary(matrix: np.ndarray) -> np.ndarray:
    """Unitary ``W`` maximizing ``|tr(W X)|``, i.e. ``W = V U^dagger`` for ``X = U S V^dagger``."""

    left, _, right_h = scipy.linalg.svd(matrix)
    return right_h.conj().T @ left.conj().T


def max_output_fidelity(phi1: Channel, phi2: Channel, cfg: Optional[OptimizerConfig] = None) -> MeasureResult:
    """Lower bound on the maximum output fidelity by alternating over purified inputs.

    With isometries ``V1, V2`` and purifications ``u, v`` on H (x) R the fidelity
    of the outputs is ``max_W |<u| (V1^dagger (x) I)(I_K (x) W)(V2 (x) I) |v>|``;
    the ascent alternates the exact maximizations over ``u``, ``v`` and ``W``.
    """

    if phi1.out_dim != phi2.out_dim:
        raise ValueError(f"output dims differ: {phi1.out_dims} vs {phi2.out_dims}")
    cfg = cfg or OptimizerConfig()
    kraus1, kraus2 = kraus_operators(phi1), kraus_operators(phi2)
    env = max(kraus1.shape[0], kraus2.shape[0])
    d_out = phi1.out_dim
    ref = max(phi1.in_dim, phi2.in_dim)
    lift1 = np.kron(_isometry(kraus1, env), np.eye(ref))
    lift2 = np.kron(_isometry(kraus2, env), np.eye(ref))

    def overlap_operator(unitary: np.ndarray) -> np.ndarray:
        return lift1.conj().T @ np.kron(np.eye(d_out), unitary) @ lift2

    def fidelity_step(u: np.ndarray, v: np.ndarray) -> Tuple[State, float]:
        left = (lift2 @ v).reshape(d_out, -1)
        right = (lift1 @ u).reshape(d_out, -1)
        cross = left.T @ right.conj()
        unitary = _polar_unitary(cross)
        return {"u": u, "v": v, "unitary": unitary}, min(1.0, trace_norm_array(cross))

    def start(rng: np.random.Generator) -> Tuple[State, float]:
        u = random_vector(rng, phi1.in_dim * ref)
        v = random_vector(rng, phi2.in_dim * ref)
        return fidelity_step(u, v)

    def step(state: State) -> Tuple[State, float]:
        operator = overlap_operator(state["unitary"])
        u = operator @ state["v"]
        if np.linalg.norm(u) < 1e-300:
            return state, -1.0
        u = u / np.linalg.norm(u)
        v = operator.conj().T @ u
        if np.linalg.norm(v) < 1e-300:
            return state, -1.0
        v = v / np.linalg.norm(v)
        return fidelity_step(u, v)

    result = _ascend(cfg, start, step, name="fmax")
    u = result.witness["u"].reshape(phi1.in_dim, ref)
    v = result.witness["v"].reshape(phi2.in_dim, ref)
    return result.model_copy(update={"witness": {"rho": u @ u.conj().T, "sigma": v @ v.conj().T}})


def fmax_via_dnorm_crosscheck(phi1: Channel, phi2: Channel, cfg: Optional[OptimizerConfig] = None) -> float:
    """Maximum output fidelity as the diamond norm of ``Gamma(X) = tr_K V1 X V2^dagger``.

    ``Gamma`` is built from the Stinespring unitaries with the ancilla in
    ``|0>``; its diamond norm is estimated by a seesaw over rank-one inputs
    ``|psi><phi|`` whose observable is the polar unitary of the output.
    """

    if phi1.stinespring is None or phi2.stinespring is None:
        raise MissingRepresentationError("the cross-check needs Stinespring representations of both channels")
    if phi1.out_dim != phi2.out_dim or phi1.in_dim != phi2.in_dim:
        raise ValueError("the cross-check needs channels of equal shape")
    cfg = cfg or OptimizerConfig()
    d_in, d_out = phi1.in_dim, phi1.out_dim
    env = max(phi1.stinespring.env_dim, phi2.stinespring.env_dim)

    def padded(phi: Channel) -> np.ndarray:
        rep = phi.stinespring
        isometry = rep.unitary.reshape(d_out, rep.env_dim, d_in, rep.anc_dim)[:, :, :, 0]
        out = np.zeros((d_out, env, d_in), dtype=complex)
        out[:, : rep.env_dim, :] = isometry
        return out

    first, second = padded(phi1), padded(phi2)
    gamma = Channel.model_construct(
        in_dims=(d_in,),
        out_dims=(env,),
        choi_matrix=np.einsum("aei,afj->eifj", first, second.conj()).reshape(env * d_in, env * d_in),
    )
    ref = d_in

    def evaluate(psi: np.ndarray, phi: np.ndarray) -> Tuple[State, float]:
        output = apply_array(gamma, np.outer(psi, phi.conj()), ref)
        return {"psi": psi, "phi": phi, "unitary": _polar_unitary(output)}, trace_norm_array(output)

    def start(rng: np.random.Generator) -> Tuple[State, float]:
        return evaluate(random_vector(rng, d_in * ref), random_vector(rng, d_in * ref))

    def step(state: State) -> Tuple[State, float]:
        pulled = adjoint_array(gamma, state["unitary"], ref)
        psi = pulled.conj().T @ state["phi"]
        if np.linalg.norm(psi) < 1e-300:
            return state, -1.0
        psi = psi / np.linalg.norm(psi)
        phi = pulled @ psi
        if np.linalg.norm(phi) < 1e-300:
            return state, -1.0
        return evaluate(psi, phi / np.linalg.norm(phi))

    return min(1.0, _ascend(cfg, start, step, name="fmax-gamma").value)
