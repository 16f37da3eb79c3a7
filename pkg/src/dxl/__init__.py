"""Disordered dipolar XXZ spin dynamics: exact, semiclassical and mean-field solvers."""

__version__ = "0.1.0"
