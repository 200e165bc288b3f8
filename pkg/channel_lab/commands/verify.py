"""``verify``: run one seeded property suite."""

from __future__ import annotations

import argparse
import logging
from typing import Tuple

from channel_lab.commands import Command
from channel_lab.commands.inputs import Timings, add_optimizer_flags, build_report, optimizer_config
from channel_lab.models.reports import JsonReport
from channel_lab.services.suites import SUITES, run_suite

LOGGER = logging.getLogger(__name__)

SUITE_FAILED = 4


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--suite", required=True, choices=sorted(SUITES))
    add_optimizer_flags(parser)


def handle(args: argparse.Namespace) -> Tuple[JsonReport, int]:
    timings = Timings()
    with timings.phase(args.suite):
        suite = run_suite(args.suite, args.seed, optimizer_config(args))
    for check in suite.checks:
        if not check.passed:
            LOGGER.warning("Property %s failed: worst %.3e > allowed %.3e", check.name, check.worst, check.allowed)
    report = build_report(
        "verify",
        args,
        parameters={"suite": args.suite, "restarts": args.restarts, "max_iters": args.max_iters},
        results={"passed": suite.passed, "checks": suite.checks},
        timings_ms=dict(timings),
    )
    return report, 0 if suite.passed else SUITE_FAILED


command = Command(name="verify", help="run a seeded property suite", configure=configure, handler=handle)
