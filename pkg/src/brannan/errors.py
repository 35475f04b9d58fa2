"""Exception types shared across the package."""

from __future__ import annotations


class BrannanError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BrannanError, ValueError):
    """A parameter lies outside the domain where the quantity is defined."""


class SingularPoint(BrannanError, ValueError):
    """The requested point is a removable or genuine singularity of a closed form."""


class NonFinite(BrannanError, ArithmeticError):
    """An integrand returned inf or nan at an interior node."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class NonConvergence(BrannanError, ArithmeticError):
    """Quadrature did not meet its tolerance within the allowed levels.

    The best available value and its estimate ride along so callers can
    still report them.
    """

    def __init__(self, message: str, value=float("nan"), error_estimate: float = float("inf"),
                 levels_used: int = 0):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.levels_used = levels_used


class MonotonicityViolated(BrannanError, ValueError):
    pass


class UnknownCheck(BrannanError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class IoError(BrannanError, OSError):
    pass
