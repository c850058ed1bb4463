"""Exact operator calculus for spin-orbit Hamiltonians and their integrals of motion."""

__version__ = "0.1.0"
