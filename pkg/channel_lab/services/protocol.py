"""Exact simulation of the channel-distinguishability proof system and close-images acceptance."""

from __future__ import annotations

import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np

from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import OptimizerConfig, ProtocolRun
from channel_lab.services.channels import Channel, apply_array
from channel_lab.services.circuits import circuit_digest
from channel_lab.services.measures import helstrom_array
from channel_lab.services.optimizers import diamond_distance, max_output_fidelity
from channel_lab.services.simulator import to_channel
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)


def _compiled_pair(q1: Circuit, q2: Circuit) -> Tuple[Channel, Channel]:
    if q1.n_inputs != q2.n_inputs or len(q1.output_wires) != len(q2.output_wires):
        raise ValueError(
            f"circuits differ in shape: {q1.n_inputs}->{len(q1.output_wires)} vs {q2.n_inputs}->{len(q2.output_wires)}"
        )
    return to_channel(q1, label="q1"), to_channel(q2, label="q2")


def acceptance_probability(
    phi1: Channel,
    phi2: Channel,
    state: np.ndarray,
    projector: np.ndarray,
    ref_dim: int = 1,
) -> float:
    """Chance the verifier accepts when the prover sends ``state`` and answers by measuring ``projector``.

    The verifier applies either channel with probability one half to the first
    half of ``state``; the prover claims the first channel on outcome ``projector``.
    """

    first = apply_array(phi1, state, ref_dim)
    second = apply_array(phi2, state, ref_dim)
    complement = np.eye(projector.shape[0]) - projector
    value = 0.5 * float(np.real(np.trace(projector @ first))) + 0.5 * float(np.real(np.trace(complement @ second)))
    return min(1.0, max(0.0, value))


def _pure_qubit_grid(resolution: int) -> List[np.ndarray]:
    vectors = []
    for theta in np.linspace(0.0, np.pi, resolution):
        for phi in np.linspace(0.0, 2.0 * np.pi, 2 * resolution, endpoint=False):
            vectors.append(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))
    return vectors


def _grid_search(phi1: Channel, phi2: Channel, n_qubits: int, resolution: int) -> Tuple[float, np.ndarray]:
    """Best Helstrom acceptance over product pure inputs; ties keep the first grid point."""

    best, best_state = -1.0, None
    grid = _pure_qubit_grid(resolution)
    for factors in itertools.product(grid, repeat=n_qubits):
        vector = np.array([1.0 + 0j])
        for factor in factors:
            vector = np.kron(vector, factor)
        state = np.outer(vector, vector.conj())
        value = helstrom_array(apply_array(phi1, state), apply_array(phi2, state)).success_probability
        if value > best:
            best, best_state = value, state
    return best, best_state


def _sample(acceptance_first: float, acceptance_second: float, trials: int, seed: int) -> float:
    """Monte-Carlo acceptance frequency: the verifier's coin, then the accept event."""

    rng = np.random.default_rng(seed)
    coins = rng.integers(2, size=trials)
    chances = np.where(coins == 0, acceptance_first, acceptance_second)
    return float(np.mean(rng.random(trials) < chances))


def run_qcd_protocol(
    q1: Circuit,
    q2: Circuit,
    strategy: str = "honest",
    cfg: Optional[OptimizerConfig] = None,
    *,
    resolution: Optional[int] = None,
    trials: int = 0,
    state: Optional[np.ndarray] = None,
    projector: Optional[np.ndarray] = None,
    ref_dim: int = 1,
) -> ProtocolRun:
    """Acceptance probability of the three-message distinguishability protocol for one prover strategy.

    ``honest`` sends the diamond-distance witness and measures Helstrom
    projectors; ``grid`` searches product pure inputs without a reference;
    ``fixed`` uses the given ``state`` on ``in (x) ref`` and ``projector`` on ``out (x) ref``.
    """

    cfg = cfg or OptimizerConfig()
    phi1, phi2 = _compiled_pair(q1, q2)
    distance: Optional[float] = None
    if strategy == "honest":
        result = diamond_distance(phi1, phi2, cfg)
        distance = result.value
        ref_dim = phi1.in_dim
        witness = result.witness["state"]
        state = np.outer(witness, witness.conj())
        projector = helstrom_array(apply_array(phi1, state, ref_dim), apply_array(phi2, state, ref_dim)).projectors[0]
    elif strategy == "grid":
        resolution = resolution or get_settings().grid_resolution
        ref_dim = 1
        _, state = _grid_search(phi1, phi2, q1.n_inputs, resolution)
        projector = helstrom_array(apply_array(phi1, state), apply_array(phi2, state)).projectors[0]
    elif strategy == "fixed":
        if state is None or projector is None:
            raise ValueError("the fixed strategy needs a state and a projector")
    else:
        raise ValueError(f"unknown prover strategy {strategy!r}")

    acceptance = acceptance_probability(phi1, phi2, state, projector, ref_dim)
    sampled = None
    if trials:
        first = apply_array(phi1, state, ref_dim)
        second = apply_array(phi2, state, ref_dim)
        accept_first = float(np.real(np.trace(projector @ first)))
        accept_second = 1.0 - float(np.real(np.trace(projector @ second)))
        sampled = _sample(accept_first, accept_second, trials, cfg.seed)
    LOGGER.info("Protocol run (%s): acceptance %.9f", strategy, acceptance)
    return ProtocolRun(
        circuits={"q1": circuit_digest(q1), "q2": circuit_digest(q2)},
        strategy=strategy,
        resolution=resolution if strategy == "grid" else None,
        trials=trials,
        seed=cfg.seed,
        acceptance=acceptance,
        distance_estimate=distance,
        sampled_acceptance=sampled,
    )


def ci_acceptance(q1: Circuit, q2: Circuit, cfg: Optional[OptimizerConfig] = None) -> float:
    """Best acceptance of the close-images verifier: the squared maximum output fidelity."""

    if len(q1.output_wires) != len(q2.output_wires):
        raise ValueError(f"output sizes differ: {len(q1.output_wires)} vs {len(q2.output_wires)}")
    fmax = max_output_fidelity(to_channel(q1), to_channel(q2), cfg).value
    return fmax * fmax
