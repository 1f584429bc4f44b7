"""
Exception hierarchy shared by every module.

The CLI turns any UnitSumError into exit code 1 with a JSON error object.
"""


class UnitSumError(ValueError):
    """Base class for domain errors."""


class InvalidInputError(UnitSumError):
    """A precondition of an operation is violated."""


class UnverifiableError(UnitSumError):
    """Desk-scale verification is impossible (e.g. factorisation out of range)."""

    def __init__(self, message, partial_factorization=None):
        super().__init__(message)
        self.partial_factorization = dict(partial_factorization or {})


class PrecisionError(UnitSumError):
    """Certified numerics cannot decide at the working precision."""


class NotInvertibleError(UnitSumError):
    """A ring element or matrix has no inverse."""


class HypothesisFailure(UnitSumError):
    """The hypothesis of the theorem behind an operation does not hold."""


class SearchExhaustedError(UnitSumError):
    """A bounded search found nothing where a result was required."""


class StabilityError(UnitSumError):
    """A count changed when the exponent bound was enlarged."""


class ConfigError(UnitSumError):
    """Malformed configuration value."""
