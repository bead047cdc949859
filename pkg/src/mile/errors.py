"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class MileError(Exception):
    """Base class for errors raised by this package."""


class DomainError(MileError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class TieError(DomainError):
    """Tied values where a strict ordering is required."""


class DegenerateDataError(DomainError):
    """Data carry no information for the requested quantity."""


class EstimationError(MileError, RuntimeError):
    """An estimator could not produce a result."""


class OptimizationError(EstimationError):
    """The numerical optimizer failed at every start point."""
