"""Exception hierarchy shared by all modules.

The CLI maps ``ConfigError``/``DataError`` to exit code 2 and
``NumericalError`` subclasses to exit code 3.
"""


class SpatexError(Exception):
    """Base class for every error raised deliberately by the package."""


class DomainError(SpatexError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(SpatexError):
    """Invalid or unknown configuration."""


class DataError(SpatexError):
    """Malformed or insufficient input data."""


class NumericalError(SpatexError):
    """A computation could not be carried out reliably."""


class NotPositiveDefiniteError(NumericalError):
    """A covariance matrix failed Cholesky factorization."""


class UnderflowError(NumericalError):
    """A normalizing probability underflowed to zero."""


class AcceptanceError(NumericalError):
    """Rejection sampling acceptance is too low to be practical."""
