"""Exception hierarchy shared by every module.

Two families: ``DomainError`` for inputs outside an operation's domain
(CLI exit code 2) and ``ConvergenceError`` for numerical procedures that
fail to converge or bracket a root (CLI exit code 3).
"""


class DomainError(ValueError):
    """Argument outside the domain of the operation."""


class ShapeError(DomainError):
    """Mismatched lengths, or a sampled function of the wrong curvature."""


class NormalizationError(DomainError):
    """A probability vector or density does not sum/integrate to one."""


class SizeError(DomainError):
    """Problem too large for an exact (enumerative) computation."""


class SymmetryError(DomainError):
    """A symmetry assumption required by a formula is violated."""


class ConvergenceError(RuntimeError):
    """Root bracketing, optimisation, quadrature or ODE stepping failed."""


class GridOverflowError(DomainError):
    """A convolved density spills past the edge of its grid."""


class ConvergenceWarning(RuntimeWarning):
    """An iterative optimiser stopped at its iteration cap."""
