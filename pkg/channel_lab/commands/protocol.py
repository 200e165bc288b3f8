"""``protocol``: simulate the distinguishability protocol on a circuit pair."""

from __future__ import annotations

import argparse
import logging
from typing import Tuple

from channel_lab.commands import Command
from channel_lab.commands.inputs import Timings, add_optimizer_flags, build_report, load_pair, optimizer_config
from channel_lab.models.reports import JsonReport
from channel_lab.services.protocol import run_qcd_protocol

LOGGER = logging.getLogger(__name__)


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--circuit", required=True, help="first circuit file")
    parser.add_argument("--circuit2", required=True, help="second circuit file")
    parser.add_argument("--strategy", choices=("honest", "grid"), default="honest")
    parser.add_argument("--resolution", type=int, help="grid points per Bloch angle for the grid prover")
    parser.add_argument("--trials", type=int, default=0, help="sampled protocol rounds on top of the exact value")
    add_optimizer_flags(parser)


def handle(args: argparse.Namespace) -> Tuple[JsonReport, int]:
    if args.resolution is not None and args.resolution < 2:
        raise ValueError("--resolution must be at least 2")
    if args.trials < 0:
        raise ValueError("--trials must be non-negative")
    first, second, inputs = load_pair(args, required=True)
    timings = Timings()
    with timings.phase(args.strategy):
        run = run_qcd_protocol(
            first,
            second,
            args.strategy,
            optimizer_config(args),
            resolution=args.resolution,
            trials=args.trials,
        )
    report = build_report(
        "protocol",
        args,
        inputs=inputs,
        parameters={"strategy": args.strategy, "resolution": run.resolution, "trials": args.trials},
        results=run.model_dump(),
        timings_ms=dict(timings),
    )
    return report, 0


command = Command(name="protocol", help="simulate the distinguishability protocol", configure=configure, handler=handle)
