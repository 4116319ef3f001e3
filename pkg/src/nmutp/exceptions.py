"""Exception hierarchy shared by every module of the package."""


class NmutpError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(NmutpError, ValueError):
    """An input violates a structural invariant (shape, Hermiticity, range)."""


class SizeLimitError(ValidationError):
    """A matrix would exceed the configured maximum dimension."""


class ConvergenceError(NmutpError, ArithmeticError):
    """The eigensolver hit its sweep cap before converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
