"""Exception types shared across the package."""


class MdlvolError(Exception):
    """Base class for all package-specific errors."""


class SingularError(MdlvolError):
    """A positive-definite factorization failed.

    Carries the smallest pivot encountered so callers can report how close
    to singular the matrix was.
    """

    def __init__(self, message, pivot=None):
        if pivot is not None:
            message = f"{message} (smallest pivot: {pivot:.6g})"
        super().__init__(message)
        self.pivot = pivot


class NotALatticeError(MdlvolError):
    """A finite poset is missing a join (or a least element)."""


class NonPositiveCoefficientError(MdlvolError):
    """A Monte Carlo estimate of a Fisher coefficient came out non-positive."""


class RejectionRateError(MdlvolError):
    """Too many Monte Carlo draws were rejected for the estimate to be trusted."""
