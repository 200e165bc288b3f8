"""Seeded property suites behind ``verify``."""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from channel_lab.models.circuit import Circuit
from channel_lab.models.matrices import DensityMatrix, PureState
from channel_lab.models.reports import OptimizerConfig, PropertyCheck, SuiteReport
from channel_lab.services.amplification import polarization_parameters
from channel_lab.services.channels import (
    apply,
    apply_array,
    channel_distance,
    controlled_weyl_channel,
    depolarizing_channel,
    random_channel,
    tensor_channels,
    unitary_channel,
    verify_antidegrading,
    verify_degrading,
)
from channel_lab.services.circuits import gate, random_circuit
from channel_lab.services.close_images import ci_to_qcd, measure_ci_to_qcd
from channel_lab.services.constructions import antisym_probability, swap_test_rejection
from channel_lab.services.degradable import embedding_circuits
from channel_lab.services.linalg import purify, random_density, random_state, random_unitary, weyl_array
from channel_lab.services.measures import fidelity, fidelity_via_purifications, trace_norm, von_neumann_entropy
from channel_lab.services.mixed_unitary import measure_mixed_unitary_approx, mixed_unitary_approx
from channel_lab.services.optimizers import diamond_distance, diamond_unitary_oracle
from channel_lab.services.protocol import run_qcd_protocol
from channel_lab.services.simulator import to_channel
from channel_lab.utils.config import get_settings

LOGGER = logging.getLogger(__name__)

Suite = Callable[[int, OptimizerConfig], SuiteReport]


def _check(name: str, excesses: Sequence[float], allowed: float) -> PropertyCheck:
    """A property holds when every observed excess stays within ``allowed``."""

    worst = float(max(excesses)) if excesses else 0.0
    if worst > allowed:
        LOGGER.warning("Property %s failed: worst %.3e above %.3e", name, worst, allowed)
    return PropertyCheck(name=name, passed=worst <= allowed, worst=worst, allowed=allowed, samples=len(excesses))


def _random_qubit_circuit(rng: np.random.Generator) -> Circuit:
    return random_circuit(rng, 1, n_ancillas=1, n_gates=6, n_traced=1)


def _rotation(angle: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * angle)])


def _rotation_circuit_pair(angle: int) -> Tuple[Circuit, Circuit]:
    """Identity against ``angle`` T gates, a pair with a closed-form distance."""

    rotated = Circuit(n_inputs=1, instructions=tuple(gate("T", 0) for _ in range(angle)))
    return Circuit(n_inputs=1), rotated


# ----- Linear algebra and measures -----

def weyl_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    allowed = get_settings().tol_exact
    orthogonality: List[float] = []
    depolarized: List[float] = []
    controlled: List[float] = []
    for d in range(2, 6):
        operators = [weyl_array(d, a, b) for a in range(d) for b in range(d)]
        gram = np.array([[np.trace(x.conj().T @ y) for y in operators] for x in operators])
        orthogonality.append(float(np.max(np.abs(gram - d * np.eye(d * d)))))
        depolarizer = depolarizing_channel(d)
        twirled = controlled_weyl_channel(random_channel(rng, (d,), (d,), (d,)))
        for _ in range(50):
            rho = random_density(rng, (d,))
            output = apply(depolarizer, rho).array
            depolarized.append(float(np.max(np.abs(output - np.eye(d) / d))))
            uniform = np.kron(rho.array, np.eye(d * d) / (d * d))
            output = apply_array(twirled, uniform)
            controlled.append(float(np.max(np.abs(output - np.eye(d) / d))))
    checks = [
        _check("weyl-orthogonality", orthogonality, allowed),
        _check("depolarizing-is-weyl-average", depolarized, allowed),
        _check("controlled-weyl-uniform-control", controlled, allowed),
    ]
    return SuiteReport(suite="weyl", seed=seed, checks=checks)


def fvdg_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    lower: List[float] = []
    upper: List[float] = []
    for index in range(500):
        d = 2 + index % 5
        rank = 1 + int(rng.integers(d))
        rho, sigma = random_density(rng, (d,), rank), random_density(rng, (d,))
        f = fidelity(rho, sigma)
        half = trace_norm(rho.array - sigma.array) / 2
        lower.append((1.0 - f) - half)
        upper.append(half - math.sqrt(max(0.0, 1.0 - f * f)))
    checks = [_check("one-minus-fidelity-below-distance", lower, 1e-9), _check("distance-below-sine", upper, 1e-9)]
    return SuiteReport(suite="fvdg", seed=seed, checks=checks)


def monotonicity_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    trace_gaps: List[float] = []
    fidelity_gaps: List[float] = []
    bridge: List[float] = []
    concavity: List[float] = []
    for _ in range(50):
        phi = random_channel(rng, (2,), (3,), (4,))
        rho, sigma = random_density(rng, (2,)), random_density(rng, (2,))
        out_rho, out_sigma = apply(phi, rho), apply(phi, sigma)
        trace_gaps.append(trace_norm(out_rho.array - out_sigma.array) - trace_norm(rho.array - sigma.array))
        fidelity_gaps.append(fidelity(rho, sigma) - fidelity(out_rho, out_sigma))

        psi, xi = purify(rho), purify(sigma)
        bridge.append(abs(fidelity_via_purifications(psi, xi, [1]) - fidelity(rho, sigma)))

        q = float(rng.random())
        mixed = DensityMatrix.from_array(q * rho.array + (1 - q) * sigma.array, (2,))
        bound = q * von_neumann_entropy(rho) + (1 - q) * von_neumann_entropy(sigma)
        concavity.append(bound - von_neumann_entropy(mixed))
    checks = [
        _check("trace-norm-monotone", trace_gaps, 1e-9),
        _check("fidelity-monotone", fidelity_gaps, 1e-9),
        _check("fidelity-trace-norm-bridge", bridge, 1e-9),
        _check("entropy-concave", concavity, 1e-9),
    ]
    return SuiteReport(suite="monotonicity", seed=seed, checks=checks)


def multiplicativity_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    """Seesaw against the closed form on 50 unitary pairs; the first ten are also widened by a shared factor."""

    rng = np.random.default_rng(seed)
    restarts = max(cfg.restarts, get_settings().default_restarts)
    oracle_gaps: List[float] = []
    product_gaps: List[float] = []
    for index in range(50):
        u, v = random_unitary(rng, 2), random_unitary(rng, 2)
        phi, psi = unitary_channel(u), unitary_channel(v)
        pair_cfg = cfg.model_copy(update={"seed": cfg.seed + index, "restarts": restarts})
        estimate = diamond_distance(phi, psi, pair_cfg).value
        oracle_gaps.append(abs(estimate - diamond_unitary_oracle(u, v)))
        if index < 10:
            shared = random_channel(rng, (2,), (2,), (2,))
            widened = diamond_distance(tensor_channels(phi, shared), tensor_channels(psi, shared), cfg).value
            product_gaps.append(abs(widened - estimate))
    checks = [
        _check("diamond-matches-unitary-oracle", oracle_gaps, 1e-6),
        _check("diamond-stable-under-shared-factor", product_gaps, get_settings().cross_tol),
    ]
    return SuiteReport(suite="multiplicativity", seed=seed, checks=checks)


def swap_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    product: List[float] = []
    circuit: List[float] = []
    for _ in range(20):
        first, second = random_state(rng, (2,)), random_state(rng, (2,))
        joint = np.kron(first.amplitudes, second.amplitudes)
        rho = PureState(amplitudes=joint, dims=(2, 2)).projector()
        overlap = abs(np.vdot(first.amplitudes, second.amplitudes)) ** 2
        product.append(abs(antisym_probability(rho) - 0.5 * (1.0 - overlap)))
        mixed = random_density(rng, (2, 2))
        circuit.append(abs(swap_test_rejection(mixed) - antisym_probability(mixed)))
    swap = to_channel(Circuit(n_inputs=2, instructions=(gate("SWAP", 0, 1),)))
    cnots = to_channel(
        Circuit(n_inputs=2, instructions=(gate("CNOT", 0, 1), gate("CNOT", 1, 0), gate("CNOT", 0, 1)))
    )
    z = to_channel(Circuit(n_inputs=1, instructions=(gate("Z", 0),)))
    t4 = to_channel(Circuit(n_inputs=1, instructions=tuple(gate("T", 0) for _ in range(4))))
    checks = [
        _check("antisymmetric-probability-on-products", product, 1e-9),
        _check("swap-test-circuit-agrees", circuit, 1e-9),
        _check("swap-is-three-cnots", [channel_distance(swap, cnots)], 1e-9),
        _check("z-is-t-to-the-fourth", [channel_distance(z, t4)], 1e-9),
    ]
    return SuiteReport(suite="swap", seed=seed, checks=checks)


# ----- Reductions -----

def ci2qcd_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    gaps: List[float] = []
    for _ in range(20):
        q1, q2 = _random_qubit_circuit(rng), _random_qubit_circuit(rng)
        c1, c2, report = ci_to_qcd(q1, q2)
        gaps.append(measure_ci_to_qcd(report, q1, q2, c1, c2, cfg).measured["gap"])
    return SuiteReport(suite="ci2qcd", seed=seed, checks=[_check("half-distance-equals-fmax", gaps, 5e-3)])


def _embedding_suite(name: str, seed: int, cfg: OptimizerConfig, antidegradable: bool) -> SuiteReport:
    rng = np.random.default_rng(seed)
    residuals: List[float] = []
    for _ in range(20):
        c, helper = embedding_circuits(_random_qubit_circuit(rng), antidegradable=antidegradable)
        phi, mapping = to_channel(c), to_channel(helper)
        check = verify_antidegrading(mapping, phi) if antidegradable else verify_degrading(mapping, phi)
        residuals.append(check.residual)
    halving: List[float] = []
    for count in (1, 2, 4):
        q1, q2 = _rotation_circuit_pair(count)
        delta = diamond_unitary_oracle(np.eye(2), _rotation(count * math.pi / 4))
        c1, _ = embedding_circuits(q1, antidegradable=antidegradable)
        c2, _ = embedding_circuits(q2, antidegradable=antidegradable)
        halving.append(abs(diamond_distance(to_channel(c1), to_channel(c2), cfg).value - delta / 2))
    checks = [_check("map-residual", residuals, 1e-9), _check("distance-halved", halving, get_settings().cross_tol)]
    return SuiteReport(suite=name, seed=seed, checks=checks)


def degradable_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    return _embedding_suite("degradable", seed, cfg, antidegradable=False)


def antidegradable_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    return _embedding_suite("antidegradable", seed, cfg, antidegradable=True)


def mixed_unitary_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    entropy: List[float] = []
    norms: List[float] = []
    exact: List[float] = []
    mixing: List[float] = []
    for extra in (1, 2, 3):
        phi = random_channel(rng, (2,), (2,), (2,))
        phi_prime, report = mixed_unitary_approx(phi, extra)
        measured = measure_mixed_unitary_approx(report, phi, phi_prime, cfg).measured
        entropy.append(measured["smin_prime_shifted"] - measured["smin"])
        entropy.append(measured["smin_lower"] - measured["smin_prime_shifted"])
        norms.append(measured["nu"] - measured["nu_prime_scaled"])
        norms.append(measured["nu_prime_scaled"] - measured["nu_upper"])
        exact.append(max(measured["simulation_residual"], measured["unitality_residual"]))
        mixing.append(measured["subspace_mixing"] - report.predicted["subspace_mixing_bound"])
    checks = [
        _check("entropy-sandwich", entropy, get_settings().cross_tol),
        _check("norm-sandwich", norms, get_settings().cross_tol),
        _check("simulation-and-unitality", exact, 1e-9),
        _check("complement-mixing", mixing, 1e-9),
    ]
    return SuiteReport(suite="mixed-unitary", seed=seed, checks=checks)


POLARIZATION_TABLE = (
    ((1, 1.0, 0.25), (4, 1024, 1)),
    ((1, 1.9, 0.1), (1, 5, 1)),
    ((2, 1.0, 0.25), (5, 8192, 2)),
    ((3, 1.5, 0.5), (5, 256, 2)),
)


def polarize_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    mismatches = [
        float(tuple(polarization_parameters(*inputs)) != expected) for inputs, expected in POLARIZATION_TABLE
    ]
    return SuiteReport(suite="polarize", seed=seed, checks=[_check("parameters-match-formulas", mismatches, 0.0)])


def protocol_suite(seed: int, cfg: OptimizerConfig) -> SuiteReport:
    rng = np.random.default_rng(seed)
    identity: List[float] = []
    dominance: List[float] = []
    for _ in range(20):
        q1, q2 = _random_qubit_circuit(rng), _random_qubit_circuit(rng)
        honest = run_qcd_protocol(q1, q2, "honest", cfg)
        grid = run_qcd_protocol(q1, q2, "grid", cfg, resolution=6)
        identity.append(abs(honest.acceptance - (0.5 + 0.25 * honest.distance_estimate)))
        dominance.append(grid.acceptance - honest.acceptance)
    checks = [
        _check("honest-acceptance-identity", identity, 1e-9),
        _check("honest-dominates-grid", dominance, get_settings().cross_tol),
    ]
    return SuiteReport(suite="protocol", seed=seed, checks=checks)


SUITES: Dict[str, Suite] = {
    "weyl": weyl_suite,
    "fvdg": fvdg_suite,
    "monotonicity": monotonicity_suite,
    "multiplicativity": multiplicativity_suite,
    "swap": swap_suite,
    "ci2qcd": ci2qcd_suite,
    "degradable": degradable_suite,
    "antidegradable": antidegradable_suite,
    "mixed-unitary": mixed_unitary_suite,
    "polarize": polarize_suite,
    "protocol": protocol_suite,
}


def run_suite(name: str, seed: int, cfg: Optional[OptimizerConfig] = None) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    cfg = cfg or OptimizerConfig(seed=seed)
    report = SUITES[name](seed, cfg)
    LOGGER.info("Suite %s (seed %d): %s", name, seed, "pass" if report.passed else "FAIL")
    return report
