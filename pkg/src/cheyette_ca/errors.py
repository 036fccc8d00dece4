class DomainError(ValueError):
    """Arguments outside the domain of an operation (time ordering, empty schedule, ...)."""


class NumericError(ArithmeticError):
    """A numerical procedure failed (root not bracketed, non-finite result, ...)."""


class UsageError(ValueError):
    """An operation was called without the context it needs."""
