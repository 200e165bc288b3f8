"""Command-line entrypoint for ``channel-lab``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from channel_lab import __version__
from channel_lab.commands import get_command_registry
from channel_lab.errors import DimensionCapError
from channel_lab.utils.jsonio import dump_report

LOGGER = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2
EXIT_DIMENSION_CAP = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="channel-lab", description="Quantum channel measures, reductions and protocol simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--output", help="write the JSON report here instead of stdout")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in get_command_registry().items():
        command.configure(subparsers.add_parser(name, help=command.help))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    command = get_command_registry()[args.command]

    try:
        report, code = command.handler(args)
        text = dump_report(report)
    except DimensionCapError as exc:
        LOGGER.error("%s: %s", args.command, exc)
        return EXIT_DIMENSION_CAP
    except (ValueError, ValidationError, OSError) as exc:
        LOGGER.error("%s: %s", args.command, exc)
        return EXIT_INPUT_ERROR

    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code

