"""Numerical laboratory for quantum channels, distances and circuit reductions."""

__version__ = "0.1.0"
