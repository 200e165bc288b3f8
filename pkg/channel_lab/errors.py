"""Exception types raised across the package."""

from __future__ import annotations

from typing import Optional


class DimensionCapError(RuntimeError):
    """Raised when an operation would exceed a configured dimension cap."""

    def __init__(self, message: str, *, requested: int, cap: int) -> None:
        super().__init__(f"{message} (requested {requested}, cap {cap})")
        self.requested = requested
        self.cap = cap


class MissingRepresentationError(ValueError):
    """Raised when a channel lacks the representation an operation needs."""


class CircuitValidationError(ValueError):
    """Raised when an instruction list violates the wire discipline."""

    def __init__(self, message: str, *, index: Optional[int] = None) -> None:
        prefix = f"instruction {index}: " if index is not None else ""
        super().__init__(prefix + message)
        self.index = index
        self.detail = message


class CircuitParseError(ValueError):
    """Raised for malformed circuit text, with the 1-based source position."""

    def __init__(self, message: str, *, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.detail = message
