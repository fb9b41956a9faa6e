"""Exception hierarchy shared by every module of the package."""


class GfbmError(Exception):
    """Base class for all errors raised by ``gfbm_pricing``."""


class DomainError(GfbmError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(GfbmError, ArithmeticError):
    """A series or iteration did not reach its tolerance within the term budget."""


class FactorizationError(GfbmError, ArithmeticError):
    """Cholesky factorization of a covariance matrix failed.

    ``minor`` is the 1-based size of the leading minor that was not positive.
    """

    def __init__(self, message, minor=None):
        super().__init__(message)
        self.minor = minor


class InstabilityError(GfbmError, ArithmeticError):
    """A PDE evolution lost mass beyond its tolerance."""
