"""Exception hierarchy shared by all conevortex modules."""

from __future__ import annotations

from typing import Any


class ConeVortexError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(ConeVortexError, ValueError):
    """Invalid parameters or configuration."""


class NumericalError(ConeVortexError, ArithmeticError):
    """A computation failed or produced an unusable result."""


class SingularPointError(ConeVortexError, ValueError):
    """Evaluation requested at a singular point."""


class DegreeUndefinedError(NumericalError):
    """A loop passes too close to a zero or is undersampled."""


class NonIntegerWindingError(NumericalError):
    """Winding along a loop is not close to an integer degree."""


class NonConvergenceError(NumericalError):
    """An iterative solver hit its iteration limit.

    The last iterate is kept on the exception so callers can still inspect it.
    """

    def __init__(self, message: str, **state: Any) -> None:
        super().__init__(message)
        self.state = state


class DivergenceError(NumericalError):
    """Energy became non-finite."""


class InconsistentDegreesError(NumericalError):
    """Detected degrees do not add up to the boundary degree."""


class UnresolvedCoreError(NumericalError):
    """No clean loop around a core could be found on the grid."""


class DegenerateDesignError(ConeVortexError, ValueError):
    """Least-squares design matrix is rank deficient."""


class CoincidentVorticesError(ConeVortexError, ValueError):
    """Two vortex positions coincide."""


class NoInteriorMinimumError(NumericalError):
    """Every start of a multi-start search left the disc."""


class OverlappingExcisionsError(ConeVortexError, ValueError):
    """Excised discs of an upper-bound construction overlap."""
