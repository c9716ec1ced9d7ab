"""Finite-element eigenvalue sums for the magnetic Laplacian on planar domains."""

__version__ = "0.1.0"
