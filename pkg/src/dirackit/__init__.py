"""Computable linear and polynomial Dirac geometry."""

__version__ = "0.1.0"
