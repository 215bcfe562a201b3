"""Exception types raised across the package."""

from __future__ import annotations

__all__ = [
    "InvalidArgumentError",
    "GapClosureError",
    "NumericalInconsistencyError",
    "NotPurePhaseError",
    "PoleError",
]


class InvalidArgumentError(ValueError):
    """An input violates an operation's precondition."""


class GapClosureError(ValueError):
    """The quasi-energy gap closes (sin E = 0), so the Bloch direction is undefined."""


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that is bounded analytically came out of range."""


class NotPurePhaseError(ValueError):
    """Two states differ by more than a global phase."""


class PoleError(ZeroDivisionError):
    """Evaluation at a pole of an analytic expression."""
