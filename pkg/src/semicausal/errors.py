"""Exception types raised across the package."""


class SemicausalError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SemicausalError, ValueError):
    pass


class NotPSD(SemicausalError, ValueError):
    pass


class NotPartialIsometry(SemicausalError, ValueError):
    pass


class InvariantViolation(SemicausalError, ValueError):
    """An input normal form does not satisfy its structural constraints."""


class CheckFailed(SemicausalError, ValueError):
    """A generator handed to an extraction routine does not pass its checker."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class LstsqResidualTooLarge(SemicausalError, ArithmeticError):
    pass


class NotSemicausal(SemicausalError, ValueError):
    pass


class NotNonnegative(SemicausalError, ValueError):
    pass
