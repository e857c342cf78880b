"""Semantic exception types shared across the package."""


class TeamRepError(Exception):
    """Base class for all package-specific errors."""


class InputError(TeamRepError, ValueError):
    """Arguments violate an operation's contract (shape, domain, config)."""


class CapacityError(InputError):
    """Requested enumeration exceeds the hard size caps."""


class DomainError(TeamRepError, ValueError):
    """Query lies outside a reconstructed/valid domain."""


class IntegrationError(TeamRepError, RuntimeError):
    """Adaptive integration failed (step-size underflow).

    Carries whatever partial trajectory was produced before the failure in
    ``trajectory`` (may be None when the failure happened before the first
    sample).
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
