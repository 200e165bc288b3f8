"""Validated value types shared by the services."""

from channel_lab.models.circuit import Circuit, Instruction  # noqa: F401
from channel_lab.models.matrices import ComplexMatrix, DensityMatrix, PureState  # noqa: F401
