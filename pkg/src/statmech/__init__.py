"""Numerical toolbox linking equilibrium statistical mechanics and information theory.

Units: nats throughout, Boltzmann's constant k = 1.
"""
from .errors import (ConvergenceError, ConvergenceWarning, DomainError, GridOverflowError,
                     NormalizationError, ShapeError, SizeError, SymmetryError)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "ConvergenceWarning", "DomainError", "GridOverflowError", "NormalizationError", "ShapeError",
    "SizeError", "SymmetryError", "__version__",
]
