"""Flag and file helpers shared by the subcommands."""

from __future__ import annotations

import argparse
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

from channel_lab import __version__
from channel_lab.models.circuit import Circuit
from channel_lab.models.reports import JsonReport, OptimizerConfig
from channel_lab.services.circuits import parse
from channel_lab.utils.config import get_settings
from channel_lab.utils.jsonio import file_digest


def add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--seed", type=int, default=0, help="seed for every randomized estimator")
    parser.add_argument("--restarts", type=int, default=settings.default_restarts, help="seesaw restarts")
    parser.add_argument("--max-iters", type=int, default=settings.default_max_iters, help="seesaw steps per restart")


def optimizer_config(args: argparse.Namespace) -> OptimizerConfig:
    return OptimizerConfig(seed=args.seed, restarts=args.restarts, max_iters=args.max_iters)


def load_circuit(path: str) -> Tuple[Circuit, str]:
    """Parse a ``.qc`` file and return it with the file's sha256."""

    file_path = Path(path)
    return parse(file_path.read_text(encoding="utf-8")), file_digest(file_path)


def load_pair(args: argparse.Namespace, *, required: bool = False) -> Tuple[Circuit, Optional[Circuit], Dict[str, str]]:
    first, first_digest = load_circuit(args.circuit)
    inputs = {"circuit": first_digest}
    second = None
    if args.circuit2 is not None:
        second, inputs["circuit2"] = load_circuit(args.circuit2)
    elif required:
        raise ValueError("this operation needs --circuit2")
    return first, second, inputs


class Timings(dict):
    """Wall-clock milliseconds per named phase."""

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self[name] = (time.perf_counter() - start) * 1000.0


def build_report(command: str, args: argparse.Namespace, **fields: object) -> JsonReport:
    return JsonReport(tool_version=__version__, command=command, seed=getattr(args, "seed", None), **fields)
