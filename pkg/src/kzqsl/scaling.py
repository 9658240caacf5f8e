"""Quench-time sweeps and power-law fits ``value = a * tau_q**beta``."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qsl
from . import ramps as _ramps
from .dynamics import DEFAULT_SAMPLES, DEFAULT_TOL, crossover_time, evolve_lz
from .errors import DomainError, EmptySweep, InsufficientData, KZQSLError
from .models import EnergyConvention

OBSERVABLES = ("impulse_duration", "t_m", "nu_min")
THREADS_ENV = "KZQSL_THREADS"


@dataclass(frozen=True)
class ScalingPoint:
    tau_q: float
    value: float
    valid: bool = True
    reason: str = ""


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    beta: float
    stderr_beta: float
    window: tuple
    n_points: int
    residual_rms: float

    def to_dict(self):
        return {"amplitude": self.amplitude, "beta": self.beta,
                "stderr_beta": self.stderr_beta, "window": list(self.window),
                "n_points": self.n_points, "residual_rms": self.residual_rms}


@dataclass(frozen=True)
class QslMinimum:
    """Speed-minimum observable for each quench time.

    ``ramp`` is a template whose ``tau_q`` is replaced per sweep point. For
    ramps that cross the critical point, minima found after ``t_c`` are
    rejected so that ``t_m`` always sits on the approach side.
    """

    model: object
    ramp: _ramps.RampProtocol
    convention: EnergyConvention = EnergyConvention.GROUND_STATE
    observable: str = "impulse_duration"
    numerator_only: bool = False
    coarse_points: int = qsl.DEFAULT_COARSE_POINTS
    tol_rel: float = qsl.DEFAULT_TOL_REL
    approach_side: bool = True

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise DomainError(f"unknown observable {self.observable!r}")

    def evaluate(self, tau_q):
        ramp = self.ramp.with_tau(tau_q)
        try:
            res = qsl.find_minimum(self.model, self.convention, ramp,
                                   coarse_points=self.coarse_points, tol_rel=self.tol_rel,
                                   numerator_only=self.numerator_only)
        except KZQSLError as exc:
            return ScalingPoint(tau_q, math.nan, False, type(exc).__name__)
        if (self.approach_side and _ramps.crosses(ramp, self.model.g_c)
                and res.t_m > res.t_c):
            return ScalingPoint(tau_q, math.nan, False, "MinimumPastCritical")
        value = {"impulse_duration": res.impulse_duration, "t_m": res.t_m,
                 "nu_min": res.nu_min}[self.observable]
        if not (math.isfinite(value) and value > 0):
            return ScalingPoint(tau_q, math.nan, False, "NonPositive")
        return ScalingPoint(tau_q, value)


@dataclass(frozen=True)
class NuMin(QslMinimum):
    observable: str = "nu_min"


@dataclass(frozen=True)
class LzInfidelity:
    """Impulse duration ``t* = tau_q - t_hat`` from the bare LZ dynamics."""

    delta: float
    ramp: _ramps.RampProtocol
    K: float
    sample_count: int = DEFAULT_SAMPLES
    tol: float = DEFAULT_TOL

    def evaluate(self, tau_q):
        try:
            trace = evolve_lz(self.delta, self.ramp.with_tau(tau_q), self.sample_count, self.tol)
        except KZQSLError as exc:
            return ScalingPoint(tau_q, math.nan, False, type(exc).__name__)
        res = crossover_time(trace, self.K)
        if not res.crossed:
            return ScalingPoint(tau_q, math.nan, False, res.crossing_kind.value)
        return ScalingPoint(tau_q, res.t_star)


def resolve_workers(workers=None):
    """Worker count: ``KZQSL_THREADS`` wins, then ``workers``, then all cores."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    elif workers is not None:
        n = int(workers)
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise DomainError("worker count must be >= 1")
    return n


def _map(fn, items, workers):
    n = min(resolve_workers(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(fn, items))


def _check_grid(tau_grid):
    grid = [float(t) for t in tau_grid]
    if not grid:
        raise DomainError("empty tau grid")
    if any(not t > 0 for t in grid):
        raise DomainError("tau grid entries must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("tau grid must be strictly increasing")
    return grid


def sweep(task, tau_grid, workers=None):
    """Evaluate ``task`` at every quench time; failures become invalid points.

    Raises :class:`EmptySweep` when no point is valid.
    """
    grid = _check_grid(tau_grid)
    points = _map(task.evaluate, grid, workers)
    if not any(p.valid for p in points):
        raise EmptySweep(f"all {len(points)} sweep points invalid")
    return points


@dataclass
class _CrossoverJob:
    delta: float
    ramp: _ramps.RampProtocol
    thresholds: tuple
    sample_count: int
    tol: float

    def __call__(self, tau_q):
        trace = evolve_lz(self.delta, self.ramp.with_tau(tau_q), self.sample_count, self.tol)
        return [crossover_time(trace, K) for K in self.thresholds]


def lz_crossover_sweep(delta, ramp, thresholds, tau_grid, sample_count=DEFAULT_SAMPLES,
                       tol=DEFAULT_TOL, workers=None):
    """Crossover results for every (tau_q, K); one evolution per tau_q."""
    grid = _check_grid(tau_grid)
    job = _CrossoverJob(delta, ramp, tuple(thresholds), sample_count, tol)
    rows = _map(job, grid, workers)
    return [res for row in rows for res in row]


def log_grid(lo, hi, n):
    """``n`` log-spaced quench times from ``lo`` to ``hi`` inclusive."""
    if not (0 < lo < hi) or n < 2:
        raise DomainError("log grid needs 0 < lo < hi and n >= 2")
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    grid[0], grid[-1] = lo, hi
    return [float(t) for t in grid]


def fit_power_law(points, window=None) -> FitResult:
    """Ordinary least squares of ``ln value`` against ``ln tau_q``.

    Invalid points and points outside ``window = (tau_min, tau_max)`` are
    dropped. ``stderr_beta`` is the usual slope standard error with residual
    variance ``SSR / (n - 2)``; ``residual_rms`` is ``sqrt(SSR / n)`` in log
    space.
    """
    lo, hi = (-math.inf, math.inf) if window is None else map(float, window)
    sel = [p for p in points if p.valid and lo <= p.tau_q <= hi]
    if len(sel) < 3:
        raise InsufficientData(f"need >= 3 valid points in window, got {len(sel)}")
    if any(not p.value > 0 for p in sel):
        raise DomainError("power-law fit needs strictly positive values")
    x = np.log([p.tau_q for p in sel])
    y = np.log([p.value for p in sel])
    n = len(sel)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise InsufficientData("all points share one tau_q")
    beta = float(dx @ (y - ym)) / sxx
    intercept = ym - beta * xm
    resid = y - (intercept + beta * x)
    ssr = float(resid @ resid)
    stderr = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else math.nan
    taus = [p.tau_q for p in sel]
    return FitResult(float(math.exp(intercept)), beta, stderr,
                     (min(taus), max(taus)) if window is None else (lo, hi),
                     n, math.sqrt(ssr / n))
