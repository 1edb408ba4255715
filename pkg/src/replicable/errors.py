"""Exception hierarchy shared by every learner in the package."""

from __future__ import annotations


class ReplicableError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ReplicableError, ValueError):
    """Invalid parameters, or a sample budget below an algorithm's precondition."""


class DataError(ReplicableError, ValueError):
    """Input data outside the declared domain (bad category index, wrong width, ...)."""


class DomainError(ReplicableError, ValueError):
    """A mathematically undefined request, e.g. a non-finite value or reverse computation."""


class BudgetError(ParameterError):
    """A derived sample/call budget exceeds what the implementation will simulate."""

    def __init__(self, message: str, restriction=None):
        super().__init__(message)
        self.restriction = restriction


class InconsistentSystemError(ReplicableError):
    """A GF(2) system has no solution (the labels are not realizable)."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class InsufficientRankError(ReplicableError):
    """The offset collection phase of the affine-parity learner did not reach full rank."""


class OwsFailure(ReplicableError):
    """The ``FAILURE`` branch of the one-way-sequence learner."""


class RepresentationBlowup(ReplicableError):
    """Candidate-class size in the DP-to-replicable transformation exceeds the configured cap."""


class ChannelError(ReplicableError):
    """Data-channel randomness was requested from a shared stream."""


class LearnerFailure(ReplicableError):
    """Every run of a boosted weak learner failed."""
