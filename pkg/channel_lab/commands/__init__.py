"""Command registry for the ``channel-lab`` CLI."""

from __future__ import annotations

import argparse
from typing import Callable, Dict, NamedTuple, Tuple

from channel_lab.models.reports import JsonReport

Handler = Callable[[argparse.Namespace], Tuple[JsonReport, int]]


class Command(NamedTuple):
    """One subcommand: its flags and the handler returning a report and an exit code."""

    name: str
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    handler: Handler


def get_command_registry() -> Dict[str, Command]:
    """Construct and return the subcommand table."""

    from channel_lab.commands.measure import command as measure_command
    from channel_lab.commands.protocol import command as protocol_command
    from channel_lab.commands.reduce import command as reduce_command
    from channel_lab.commands.verify import command as verify_command

    commands = (measure_command, reduce_command, verify_command, protocol_command)
    return {command.name: command for command in commands}
