"""Numerical toolkit for the local weighted Radon transform: phantoms,
PDE-constrained weights, vertical-interval means, moment extraction,
Legendre-series reconstruction, and stability experiments."""

__version__ = "0.1.0"
