"""Exception types shared across the package."""

from __future__ import annotations


class FreewalkError(Exception):
    """Base class for all package errors."""


class GraphConsistencyError(FreewalkError):
    """Adjacency data is malformed: asymmetric, non-positive, or disconnected."""


class SolverError(FreewalkError):
    """A finite linear solve did not reach the requested residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(FreewalkError):
    """Level escalation hit its cap before the Cauchy criterion was met.

    Carries the last two iterates so callers can inspect how far apart
    they still are.
    """

    def __init__(self, message: str, last_two=None, achieved: float | None = None):
        super().__init__(message)
        self.last_two = last_two
        self.achieved = achieved


class BudgetError(FreewalkError):
    """A stochastic run exceeded its step budget; partial output attached."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class VerificationError(FreewalkError):
    """A verification suite failed."""
