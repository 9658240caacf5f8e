"""Exception hierarchy shared by all kzqsl modules."""


class KZQSLError(Exception):
    """Base class for all library errors."""


class DomainError(KZQSLError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InfiniteRateError(DomainError):
    """A rate (schedule derivative or counterdiabatic cost) diverges."""


class NoMinimum(KZQSLError):
    """The speed trace has no interior minimum in the search window.

    ``direction`` is ``"decreasing"`` when the smallest coarse sample sits on
    the right edge of the window, ``"increasing"`` when it sits on the left.
    """

    def __init__(self, direction, message=None):
        self.direction = direction
        super().__init__(message or f"no interior minimum (trace {direction})")


class ValidityExceeded(KZQSLError, ValueError):
    """A closed-form result was requested outside its range of validity."""


class IntegrationFailure(KZQSLError, RuntimeError):
    """The adaptive integrator could not proceed (step-size underflow)."""

    def __init__(self, message, t=None, h=None, stats=None):
        self.t = t
        self.h = h
        self.stats = stats
        super().__init__(message)


class EmptySweep(KZQSLError):
    """Every point of a sweep was invalid."""


class InsufficientData(KZQSLError, ValueError):
    """Too few valid points to fit."""


class ConfigError(KZQSLError, ValueError):
    """A run configuration failed validation."""
