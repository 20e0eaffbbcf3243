"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ChernoffLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ChernoffLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class EvaluationError(ChernoffLabError, ArithmeticError):
    """A function produced a non-finite value."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class PreconditionError(ChernoffLabError):
    """A mathematical hypothesis of the operation is not met.

    ``condition`` names (or numbers) the violated hypothesis when known.
    """

    def __init__(self, message: str, condition: object = None):
        super().__init__(message)
        self.condition = condition


class ShapeError(ChernoffLabError, ValueError):
    """Array or matrix dimensions do not fit together."""


class RangeError(ChernoffLabError, OverflowError):
    """Result would overflow double precision."""


class CapabilityError(ChernoffLabError):
    """A function does not provide a derivative that the operation needs."""


class WindowError(ChernoffLabError):
    """Shifted evaluation points leave the trusted extension of a grid."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class OracleAccuracyError(ChernoffLabError):
    """A reference solver failed to reach the requested accuracy."""

    def __init__(self, message: str, achieved: float, level: int):
        super().__init__(message)
        self.achieved = achieved
        self.level = level


class InsufficientDataError(ChernoffLabError, ValueError):
    """Too few usable rows to fit a convergence order."""


class BoundViolation(ChernoffLabError, AssertionError):
    """A verified inequality failed beyond its numerical tolerance."""


class UsageError(ChernoffLabError):
    """An experiment configuration does not match its schema.

    ``pointer`` is a JSON pointer to the offending field.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer
