"""Driving schedules g(t) on the closed window [0, tau_q]."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, InfiniteRateError

LINEAR = "linear"
POWER_APPROACH = "power_approach"
POWER_FROM_ZERO = "power_from_zero"
KINDS = (LINEAR, POWER_APPROACH, POWER_FROM_ZERO)


@dataclass(frozen=True)
class RampProtocol:
    """Analytic ramp schedule.

    Three shapes are supported:

    * ``linear``: ``g(t) = g0 + (g1 - g0) t / tau_q``
    * ``power_approach``: ``g(t) = 1 - (1 - t/tau_q)**r``, reaching ``g = 1``
      at ``t = tau_q``
    * ``power_from_zero``: ``g(t) = g1 (t/tau_q)**r``

    Use the ``linear``, ``power_approach`` and ``power_from_zero``
    constructors rather than filling fields by hand.
    """

    kind: str
    tau_q: float
    g0: float = 0.0
    g1: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown ramp kind {self.kind!r}")
        if not (self.tau_q > 0 and math.isfinite(self.tau_q)):
            raise DomainError(f"tau_q must be positive and finite, got {self.tau_q}")
        if self.kind != LINEAR and not self.r > 0:
            raise DomainError(f"exponent r must be positive, got {self.r}")
        if self.kind == POWER_APPROACH and (self.g0 != 0.0 or self.g1 != 1.0):
            raise DomainError("power_approach ramps always run from g=0 to g=1")
        if self.kind == POWER_FROM_ZERO and self.g0 != 0.0:
            raise DomainError("power_from_zero ramps start at g=0")

    @classmethod
    def linear(cls, g0, g1, tau_q):
        return cls(LINEAR, float(tau_q), g0=float(g0), g1=float(g1))

    @classmethod
    def power_approach(cls, r, tau_q):
        return cls(POWER_APPROACH, float(tau_q), r=float(r))

    @classmethod
    def power_from_zero(cls, r, g1, tau_q):
        return cls(POWER_FROM_ZERO, float(tau_q), g1=float(g1), r=float(r))

    def with_tau(self, tau_q):
        """Same shape, different quench time."""
        return replace(self, tau_q=float(tau_q))

    @property
    def g_start(self):
        return self.g0

    @property
    def g_end(self):
        return self.g1

    def to_dict(self):
        d = {"kind": self.kind, "tau_q": self.tau_q}
        if self.kind == LINEAR:
            d.update(g0=self.g0, g1=self.g1)
        elif self.kind == POWER_APPROACH:
            d.update(r=self.r)
        else:
            d.update(r=self.r, g1=self.g1)
        return d


def _check_time(ramp, t):
    if not (0.0 <= t <= ramp.tau_q):
        raise DomainError(f"t={t} outside ramp window [0, {ramp.tau_q}]")


def g_of_t(ramp: RampProtocol, t: float) -> float:
    """Schedule value at time ``t``; exact at both endpoints."""
    _check_time(ramp, t)
    s = t / ramp.tau_q
    if ramp.kind == LINEAR:
        if t == ramp.tau_q:
            return ramp.g1
        return ramp.g0 + (ramp.g1 - ramp.g0) * s
    if ramp.kind == POWER_APPROACH:
        return 1.0 - (1.0 - s) ** ramp.r
    return ramp.g1 * s**ramp.r


def dgdt(ramp: RampProtocol, t: float) -> float:
    """Analytic time derivative of :func:`g_of_t`.

    Raises :class:`InfiniteRateError` at ``t = 0`` for ``power_from_zero``
    with ``r < 1``, where the derivative diverges.
    """
    _check_time(ramp, t)
    tau, r = ramp.tau_q, ramp.r
    s = t / tau
    if ramp.kind == LINEAR:
        return (ramp.g1 - ramp.g0) / tau
    if ramp.kind == POWER_APPROACH:
        if r == 1.0:
            return 1.0 / tau
        # (1 - s)**(r - 1) diverges at s=1 when r < 1
        if s == 1.0 and r < 1.0:
            raise InfiniteRateError("dg/dt diverges at t=tau_q for r<1")
        return r * (1.0 - s) ** (r - 1.0) / tau
    if r == 1.0:
        return ramp.g1 / tau
    if s == 0.0 and r < 1.0:
        raise InfiniteRateError("dg/dt diverges at t=0 for r<1")
    return ramp.g1 * r * s ** (r - 1.0) / tau


def critical_time(ramp: RampProtocol, g_c: float) -> float:
    """Time ``t_c`` with ``g(t_c) = g_c``, by analytic inversion."""
    lo, hi = sorted((ramp.g_start, ramp.g_end))
    if not (lo <= g_c <= hi):
        raise DomainError(f"g_c={g_c} outside ramp range [{lo}, {hi}]")
    tau = ramp.tau_q
    if ramp.kind == LINEAR:
        if ramp.g1 == ramp.g0:
            raise DomainError("constant ramp has no unique critical time")
        if g_c == ramp.g1:
            return tau
        return tau * (g_c - ramp.g0) / (ramp.g1 - ramp.g0)
    if ramp.kind == POWER_APPROACH:
        if g_c == 1.0:
            return tau
        return tau * (1.0 - (1.0 - g_c) ** (1.0 / ramp.r))
    if ramp.g1 == 0.0:
        raise DomainError("constant ramp has no unique critical time")
    if g_c == ramp.g1:
        return tau
    return tau * (g_c / ramp.g1) ** (1.0 / ramp.r)


def crosses(ramp: RampProtocol, g_c: float) -> bool:
    """True when ``g_c`` lies strictly inside the ramp's range."""
    lo, hi = sorted((ramp.g_start, ramp.g_end))
    return lo < g_c < hi
