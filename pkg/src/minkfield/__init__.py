"""Minkowski fractional fields: Gaussian and Poisson constructions over star bodies."""

__version__ = "0.1.0"
