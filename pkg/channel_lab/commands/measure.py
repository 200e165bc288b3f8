"""``measure``: norms, entropies, fidelities and channel optimizations on circuit files."""

from __future__ import annotations

import argparse
import logging
import math
from typing import Any, Dict, Tuple

from channel_lab.commands import Command
from channel_lab.commands.inputs import Timings, add_optimizer_flags, build_report, load_pair, optimizer_config
from channel_lab.models.reports import JsonReport, MeasureResult
from channel_lab.services.measures import fidelity, helstrom, renyi_entropy, trace_norm, von_neumann_entropy
from channel_lab.services.optimizers import diamond_distance, max_output_fidelity, max_output_p_norm, min_output_entropy
from channel_lab.services.simulator import to_channel, zero_input_output

LOGGER = logging.getLogger(__name__)

STATE_OPS = ("trace-norm", "fidelity", "entropy", "renyi", "helstrom")
CHANNEL_OPS = ("smin", "nup", "fmax", "diamond")
PAIR_OPS = ("fidelity", "helstrom", "fmax", "diamond")


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--op", required=True, choices=STATE_OPS + CHANNEL_OPS)
    parser.add_argument("--circuit", required=True, help="circuit file")
    parser.add_argument("--circuit2", help="second circuit file for pair measures")
    parser.add_argument("--p", type=float, default=2.0, help="order for renyi and nup")
    add_optimizer_flags(parser)


def _optimized(result: MeasureResult) -> Dict[str, Any]:
    return {
        "value": result.value,
        "bound": result.bound,
        "sense": result.sense,
        "witness": result.witness,
        "best_restart": result.best_restart,
        "iterations": [len(trace) - 1 for trace in result.iterations],
    }


def handle(args: argparse.Namespace) -> Tuple[JsonReport, int]:
    op = args.op
    first, second, inputs = load_pair(args, required=op in PAIR_OPS)
    timings = Timings()
    results: Dict[str, Any]
    with timings.phase(op):
        if op in STATE_OPS:
            rho = zero_input_output(first)
            sigma = zero_input_output(second) if second is not None else None
            if op == "trace-norm":
                value = trace_norm(rho.array - sigma.array) if sigma is not None else trace_norm(rho)
                results = {"value": value, "bound": "exact"}
            elif op == "fidelity":
                results = {"value": fidelity(rho, sigma), "bound": "exact"}
            elif op == "entropy":
                results = {"value": von_neumann_entropy(rho), "bound": "exact"}
            elif op == "renyi":
                results = {"value": renyi_entropy(rho, args.p), "bound": "exact"}
            else:
                outcome = helstrom(rho, sigma)
                results = {"value": outcome.success_probability, "bound": "exact", "projectors": list(outcome.projectors)}
        else:
            cfg = optimizer_config(args)
            phi = to_channel(first, label="circuit")
            if op == "smin":
                results = _optimized(min_output_entropy(phi, cfg))
            elif op == "nup":
                results = _optimized(max_output_p_norm(phi, args.p, cfg))
            else:
                psi = to_channel(second, label="circuit2")
                estimator = diamond_distance if op == "diamond" else max_output_fidelity
                results = _optimized(estimator(phi, psi, cfg))
    LOGGER.info("measure %s: %.12g", op, results["value"])
    report = build_report(
        "measure",
        args,
        inputs=inputs,
        parameters={
            "op": op,
            "p": args.p if math.isfinite(args.p) else "inf",
            "restarts": args.restarts,
            "max_iters": args.max_iters,
        },
        results=results,
        timings_ms=dict(timings),
    )
    return report, 0


command = Command(name="measure", help="evaluate a measure on circuit outputs or compiled channels", configure=configure, handler=handle)
