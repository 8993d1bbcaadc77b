"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ScenboundError(Exception):
    """Base class for all package errors."""


class DomainError(ScenboundError, ValueError):
    """An argument lies outside the domain of an operation."""


class ValidityRangeError(DomainError):
    """A bound was evaluated outside the range where its formula holds."""


class RangeError(DomainError):
    """A target value is not attainable by the function being inverted."""


class AssumptionError(ScenboundError):
    """A modelling assumption required by a certificate is missing or violated.

    ``assumption`` is the number of the violated assumption (4: ball-measure
    regularity, 5: Slater point, 6: Lipschitz continuity in the uncertainty).
    """

    def __init__(self, assumption: int, message: str):
        self.assumption = assumption
        super().__init__(f"Assumption {assumption} violated: {message}")


class SolverError(ScenboundError):
    """A scenario program could not be solved to optimality."""

    def __init__(self, message: str, trial_index: int | None = None):
        self.trial_index = trial_index
        if trial_index is not None:
            message = f"trial {trial_index}: {message}"
        super().__init__(message)
