"""Speed of the counterdiabatically controlled evolution and its minimum.

The speed at time t is

    nu(t) = sqrt(energy^2 + cost_rate^2) / (cos L sin L)

with L the Bures angle between the ground state at the start of the ramp and
the instantaneous ground state. Its first interior minimum t_m marks the
adiabatic-impulse crossover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ramps as _ramps
from .errors import DomainError, InfiniteRateError, NoMinimum, ValidityExceeded
from .models import EnergyConvention

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_COARSE_POINTS = 512
DEFAULT_TOL_REL = 1e-10
WINDOW_START = 1e-6


@dataclass(frozen=True)
class SpeedSample:
    t: float
    g: float
    energy: float
    cost_rate: float
    bures: float
    nu_qsl: float

    @property
    def finite(self):
        return math.isfinite(self.nu_qsl)


@dataclass(frozen=True)
class MinimumResult:
    t_m: float
    nu_min: float
    impulse_duration: float
    t_c: float
    bracket: tuple
    iterations: int
    converged: bool


def speed_at(model, convention, ramp, t, g_ref=None, numerator_only=False) -> SpeedSample:
    """Assemble one speed sample.

    Divergences (zero Bures angle, infinite cost, a field outside the model's
    domain) do not raise; they come back as ``nu_qsl = inf`` with the
    offending component set to ``inf`` or ``nan``. Times outside the ramp
    window still raise :class:`DomainError`.

    With ``numerator_only`` the Bures denominator is frozen to one.
    """
    g = _ramps.g_of_t(ramp, t)
    if g_ref is None:
        g_ref = ramp.g_start
    flagged = False
    try:
        gdot = _ramps.dgdt(ramp, t)
    except InfiniteRateError:
        gdot = math.inf
    try:
        energy = model.energy(g, convention)
    except DomainError:
        energy, flagged = math.nan, True
    try:
        cost = math.inf if math.isinf(gdot) else model.cost_rate(g, gdot)
    except InfiniteRateError:
        cost = math.inf
    except DomainError:
        cost, flagged = math.nan, True

    fixed = getattr(model, "fixed_denominator", False)
    if fixed:
        bures = math.nan
    else:
        try:
            bures = model.bures(g_ref, g)
        except DomainError:
            bures = math.nan
            flagged = flagged or not numerator_only

    if fixed or numerator_only:
        denom = 1.0
    elif 0.0 < bures < math.pi / 2:
        denom = 0.5 * math.sin(2.0 * bures)
    else:
        denom = 0.0
    if flagged or math.isinf(cost) or denom <= 0.0:
        nu = math.inf
    else:
        nu = math.hypot(energy, cost) / denom
        if not nu > 0.0:
            nu = math.inf
    return SpeedSample(t, g, energy, cost, bures, nu)


def speed_trace(model, convention, ramp, grid, g_ref=None, numerator_only=False):
    """Speed samples on an ascending time grid."""
    grid = list(grid)
    if not grid:
        raise DomainError("empty time grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("time grid must be sorted ascending")
    return [speed_at(model, convention, ramp, t, g_ref, numerator_only) for t in grid]


def default_window(ramp):
    return (WINDOW_START * ramp.tau_q, ramp.tau_q)


def _golden(f, a, b, best, tol_rel, max_iter):
    """Golden-section search on [a, b]; ``best`` is a known interior (t, f(t))."""
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best_t, best_v = best
    it = 0
    while (b - a) > tol_rel * max(abs(a), abs(b)) and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    converged = (b - a) <= tol_rel * max(abs(a), abs(b))
    for t, v in ((c, fc), (d, fd)):
        if v < best_v or (v == best_v and t < best_t):
            best_t, best_v = t, v
    return best_t, best_v, it, converged


def _polish(f, t, h, lo, hi):
    """One Newton step on f' from a five-point stencil of spacing h.

    Golden-section search on function values cannot resolve the minimiser
    below ~sqrt(machine eps) relative, because f is flat there; the stencil
    works at a scale where differences of f are well above roundoff.
    """
    if t - 2 * h <= lo or t + 2 * h >= hi:
        return t
    fm2, fm1, f0, fp1, fp2 = (f(t - 2 * h), f(t - h), f(t), f(t + h), f(t + 2 * h))
    if not all(math.isfinite(v) for v in (fm2, fm1, f0, fp1, fp2)):
        return t
    d1 = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
    d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)
    if not d2 > 0:
        return t
    step = -d1 / d2
    if abs(step) > h:
        return t
    return t + step


def _first_bracket(values):
    n = len(values)
    i = 1
    while i < n - 1:
        if values[i] < values[i - 1]:
            j = i
            while j + 1 < n and values[j + 1] == values[i]:
                j += 1
            if j + 1 < n and values[j + 1] > values[i]:
                return i, j + 1
            i = j + 1
        else:
            i += 1
    return None


def find_minimum(model, convention, ramp, g_ref=None, window=None,
                 coarse_points=DEFAULT_COARSE_POINTS, tol_rel=DEFAULT_TOL_REL,
                 numerator_only=False, max_iter=500, polish=True) -> MinimumResult:
    """Locate the first interior minimum of the speed in ``window``.

    A uniform coarse scan finds the earliest sample lower than both of its
    neighbours; golden-section search then refines it to relative width
    ``tol_rel``, and a final Newton step (``polish``) sharpens the result
    beyond what comparing function values allows. Raises
    :class:`NoMinimum` when the coarse trace has no interior minimum.
    """
    t_lo, t_hi = default_window(ramp) if window is None else map(float, window)
    if not t_lo > 0.0:
        raise DomainError("window must start strictly after t=0")
    if not t_lo < t_hi <= ramp.tau_q:
        raise DomainError(f"invalid window ({t_lo}, {t_hi}) for tau_q={ramp.tau_q}")
    if coarse_points < 16:
        raise DomainError("coarse_points must be >= 16")
    if not tol_rel >= 1e-14:
        raise DomainError("tol_rel must be >= 1e-14")

    def f(t):
        v = speed_at(model, convention, ramp, t, g_ref, numerator_only).nu_qsl
        return v if not math.isnan(v) else math.inf

    ts = np.linspace(t_lo, t_hi, coarse_points)
    ts[-1] = t_hi
    values = [f(float(t)) for t in ts]
    found = _first_bracket(values)
    if found is None:
        finite = [v for v in values if math.isfinite(v)]
        if not finite:
            raise NoMinimum("flat", "speed is infinite across the whole window")
        i_min = int(np.argmin(values))
        raise NoMinimum("increasing" if i_min == 0 else "decreasing")
    i, k = found
    lo, hi = float(ts[i - 1]), float(ts[k])
    t_m, nu_min, iterations, converged = _golden(
        f, lo, hi, (float(ts[i]), values[i]), tol_rel, max_iter)
    if polish:
        t_p = _polish(f, t_m, 1e-3 * (hi - lo), lo, hi)
        if t_p != t_m:
            t_m, nu_min = t_p, f(t_p)

    try:
        t_c = _ramps.critical_time(ramp, model.g_c)
        impulse = abs(t_c - t_m)
    except DomainError:
        t_c = impulse = math.nan
    return MinimumResult(t_m, nu_min, impulse, t_c, (lo, hi), iterations, converged)


def lz_tau_q_star(delta, g1):
    """Largest quench time for which the LZ numerator has an interior minimum."""
    return math.sqrt(2.0) * g1 / delta**2


def lz_tm_closed_form(delta: float, g1: float, tau_q: float) -> float:
    """Minimum of the LZ speed numerator for the ramp ``g = g1 t / tau_q``."""
    if not (delta > 0 and g1 > 0 and tau_q > 0):
        raise DomainError("delta, g1 and tau_q must be positive")
    tau_star = lz_tau_q_star(delta, g1)
    if tau_q > tau_star:
        raise ValidityExceeded(f"tau_q={tau_q} exceeds tau_q*={tau_star}")
    t2 = (2.0 ** (1.0 / 3.0) * delta ** (2.0 / 3.0) * tau_q ** (4.0 / 3.0) / g1 ** (4.0 / 3.0)
          - delta**2 * tau_q**2 / g1**2)
    return math.sqrt(max(t2, 0.0))


def lz_tm_leading_order(delta, g1, tau_q):
    return 2.0 ** (1.0 / 6.0) * delta ** (1.0 / 3.0) * tau_q ** (2.0 / 3.0) / g1 ** (2.0 / 3.0)


def synthetic_tm_closed_form(z_nu: float, tau_q: float) -> float:
    """``t_m = z_nu^(1/(2(z_nu+1))) * tau_q^(z_nu/(1+z_nu))``"""
    if not (z_nu > 0 and tau_q > 0):
        raise DomainError("z_nu and tau_q must be positive")
    return z_nu ** (1.0 / (2.0 * (z_nu + 1.0))) * tau_q ** (z_nu / (1.0 + z_nu))


def kz_exponent(z_nu, r=1.0):
    """Kibble-Zurek exponent ``z_nu r / (1 + z_nu r)`` of the impulse duration."""
    return z_nu * r / (1.0 + z_nu * r)


def nu_min_exponent(z_nu):
    return -z_nu / (1.0 + z_nu)


__all__ = [
    "EnergyConvention", "SpeedSample", "MinimumResult", "speed_at", "speed_trace",
    "find_minimum", "default_window", "lz_tau_q_star", "lz_tm_closed_form",
    "lz_tm_leading_order", "synthetic_tm_closed_form", "kz_exponent", "nu_min_exponent",
]
