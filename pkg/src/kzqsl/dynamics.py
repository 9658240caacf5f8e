"""Bare Landau-Zener dynamics and the infidelity-threshold crossover estimate."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import ramps as _ramps
from .errors import DomainError, IntegrationFailure
from .models import TwoLevelState, lz_ground_state

DEFAULT_SAMPLES = 4096
DEFAULT_TOL = 1e-10

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 5.0
PI_ALPHA, PI_BETA = 0.7 / 5, 0.4 / 5


@dataclass
class IntegratorStats:
    accepted: int = 0
    rejected: int = 0
    max_local_error: float = 0.0
    max_norm_drift: float = 0.0


@dataclass
class EvolutionTrace:
    """Sampled solution of the LZ Schrodinger equation.

    ``states`` has shape ``(n, 2)``; row i holds the amplitudes at ``times[i]``.
    """

    delta: float
    ramp: _ramps.RampProtocol
    times: np.ndarray
    g: np.ndarray
    states: np.ndarray
    infidelity: np.ndarray
    stats: IntegratorStats

    @property
    def tau_q(self):
        return self.ramp.tau_q

    def state(self, i):
        return TwoLevelState.from_array(self.states[i])


class CrossingKind(str, enum.Enum):
    LAST_UPWARD = "LastUpwardCrossing"
    NEVER = "NeverCrossed"


@dataclass(frozen=True)
class CrossoverResult:
    K: float
    t_hat: float
    t_star: float
    crossing_kind: CrossingKind
    tau_q: float

    @property
    def crossed(self):
        return self.crossing_kind is CrossingKind.LAST_UPWARD


def _schedule(ramp):
    tau = ramp.tau_q

    def g(t):
        # stage times can overshoot the window by rounding only
        return _ramps.g_of_t(ramp, min(max(t, 0.0), tau))

    return g


def _integrate(g, delta, a, b, t, t_end, h, tol, stats):
    """Advance (a, b) from t to t_end with adaptive DOPRI5 steps.

    Returns the new amplitudes and the last proposed step size.
    """
    direction = 1.0 if t_end >= t else -1.0
    h = direction * abs(h)
    err_old = 1.0
    mi = -1j

    def f(s, x, y):
        gs = g(s)
        return mi * (gs * x + delta * y), mi * (delta * x - gs * y)

    k1a, k1b = f(t, a, b)
    while (t_end - t) * direction > 0:
        remaining = t_end - t
        last = abs(h) >= abs(remaining)
        if last:
            h = remaining
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise IntegrationFailure("step size underflow", t=t, h=h, stats=stats)

        k2a, k2b = f(t + C2 * h, a + h * A21 * k1a, b + h * A21 * k1b)
        k3a, k3b = f(t + C3 * h, a + h * (A31 * k1a + A32 * k2a),
                     b + h * (A31 * k1b + A32 * k2b))
        k4a, k4b = f(t + C4 * h, a + h * (A41 * k1a + A42 * k2a + A43 * k3a),
                     b + h * (A41 * k1b + A42 * k2b + A43 * k3b))
        k5a, k5b = f(t + C5 * h, a + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a),
                     b + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b))
        k6a, k6b = f(t + h,
                     a + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a),
                     b + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b))
        na = a + h * (B1 * k1a + B3 * k3a + B4 * k4a + B5 * k5a + B6 * k6a)
        nb = b + h * (B1 * k1b + B3 * k3b + B4 * k4b + B5 * k5b + B6 * k6b)
        t_new = t_end if last else t + h
        k7a, k7b = f(t_new, na, nb)

        ea = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
        eb = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
        sa = tol + tol * max(abs(a), abs(na))
        sb = tol + tol * max(abs(b), abs(nb))
        err = math.sqrt(0.5 * ((abs(ea) / sa) ** 2 + (abs(eb) / sb) ** 2))

        if err <= 1.0:
            stats.accepted += 1
            stats.max_local_error = max(stats.max_local_error, math.hypot(abs(ea), abs(eb)))
            t, a, b = t_new, na, nb
            k1a, k1b = k7a, k7b
            err = max(err, 1e-10)
            fac = SAFETY * err ** -PI_ALPHA * err_old ** PI_BETA
            fac = min(FAC_MAX, max(FAC_MIN, fac))
            err_old = err
            if not last:
                h *= fac
        else:
            stats.rejected += 1
            h *= max(FAC_MIN, SAFETY * err ** -0.2)
    return a, b, h


def _initial_step(delta, g0, tol, span):
    scale = math.hypot(delta, g0) + 1.0
    return min(abs(span), 0.1 * tol ** 0.2 / scale)


def _check_tol(tol):
    if not 1e-13 <= tol <= 1e-6:
        raise DomainError(f"tol must lie in [1e-13, 1e-6], got {tol}")


def propagate_lz(delta, ramp, state: TwoLevelState, t0, t1, tol=DEFAULT_TOL):
    """Evolve ``state`` from ``t0`` to ``t1`` (either direction) under the LZ Hamiltonian."""
    _check_tol(tol)
    for t in (t0, t1):
        if not 0.0 <= t <= ramp.tau_q:
            raise DomainError(f"t={t} outside ramp window [0, {ramp.tau_q}]")
    g = _schedule(ramp)
    stats = IntegratorStats()
    h = _initial_step(delta, g(t0), tol, t1 - t0)
    a, b, _ = _integrate(g, delta, complex(state.c0), complex(state.c1), t0, t1,
                         max(h, 1e-300), tol, stats)
    return TwoLevelState(a, b), stats


def infidelity(state: TwoLevelState, delta: float, g: float) -> float:
    """``1 - |<psi|phi_0(g)>|^2`` against the instantaneous LZ ground state."""
    gs = lz_ground_state(delta, g)
    return min(1.0, max(0.0, 1.0 - abs(gs.overlap(state)) ** 2))


def evolve_lz(delta, ramp, sample_count=DEFAULT_SAMPLES, tol=DEFAULT_TOL) -> EvolutionTrace:
    """Integrate ``i d psi/dt = (delta sigma_x + g(t) sigma_z) psi`` over the ramp.

    The initial state is the ground state at ``g(0)``. States are sampled at
    ``sample_count`` uniformly spaced times covering ``[0, tau_q]`` and
    renormalised at each sample; ``stats.max_norm_drift`` records the largest
    norm deviation seen before renormalisation.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if sample_count < 2:
        raise DomainError("sample_count must be >= 2")
    _check_tol(tol)
    g = _schedule(ramp)
    times = np.linspace(0.0, ramp.tau_q, sample_count)
    times[-1] = ramp.tau_q
    gs = np.array([g(float(t)) for t in times])
    psi0 = lz_ground_state(delta, gs[0])
    states = np.empty((sample_count, 2), dtype=complex)
    states[0] = psi0.as_array()
    stats = IntegratorStats()
    a, b = psi0.c0, psi0.c1
    h = _initial_step(delta, gs[0], tol, ramp.tau_q)
    for i in range(1, sample_count):
        a, b, h = _integrate(g, delta, a, b, float(times[i - 1]), float(times[i]),
                             h, tol, stats)
        nrm = math.hypot(abs(a), abs(b))
        stats.max_norm_drift = max(stats.max_norm_drift, abs(nrm - 1.0))
        a, b = a / nrm, b / nrm
        states[i] = (a, b)
    infid = np.array([infidelity(TwoLevelState(*states[i]), delta, gs[i])
                      for i in range(sample_count)])
    return EvolutionTrace(delta, ramp, times, gs, states, infid, stats)


def crossover_time(trace: EvolutionTrace, K: float) -> CrossoverResult:
    """Instant after which the infidelity stays at or above ``K``.

    The crossing is the start of the final run of samples with ``I >= K``,
    linearly interpolated against the preceding sample. If the trace ends
    below ``K`` the result is ``NeverCrossed`` with NaN times.
    """
    if not 0.0 < K < 1.0:
        raise DomainError(f"threshold K must lie in (0, 1), got {K}")
    times, infid = trace.times, trace.infidelity
    if len(times) == 0:
        raise DomainError("empty trace")
    tau = trace.tau_q
    above = infid >= K
    if not above[-1]:
        return CrossoverResult(K, math.nan, math.nan, CrossingKind.NEVER, tau)
    below = np.flatnonzero(~above)
    if below.size == 0:
        t_hat = float(times[0])
    else:
        j = int(below[-1]) + 1
        t0, t1 = float(times[j - 1]), float(times[j])
        i0, i1 = float(infid[j - 1]), float(infid[j])
        # rounding can push the interpolant past the bracketing samples
        t_hat = min(t1, max(t0, t0 + (K - i0) * (t1 - t0) / (i1 - i0)))
    return CrossoverResult(K, t_hat, tau - t_hat, CrossingKind.LAST_UPWARD, tau)
