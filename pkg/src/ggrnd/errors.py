"""Exception hierarchy shared across the package."""


class GGRNDError(Exception):
    """Base class for all package errors."""


class DomainError(GGRNDError, ValueError):
    """An argument lies outside the domain of the operation."""


class MomentError(DomainError):
    """A requested moment does not exist for the given parameters."""


class InfeasibleError(DomainError):
    """No parameter value satisfies the defining constraint."""


class ConvergenceError(GGRNDError, RuntimeError):
    """An iterative method failed to meet its tolerance."""


class BracketError(ConvergenceError):
    """A root could not be bracketed, or the supplied bracket has no sign change."""


class ChainError(GGRNDError, ValueError):
    """An option chain file or object is malformed."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row
