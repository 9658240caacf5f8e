import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kzqsl.errors import DomainError, EmptySweep, InsufficientData
from kzqsl.models import LMGEffective, Synthetic, TFIMMode
from kzqsl.ramps import RampProtocol
from kzqsl.scaling import (LzInfidelity, NuMin, QslMinimum, ScalingPoint, fit_power_law,
                           log_grid, lz_crossover_sweep, resolve_workers, sweep)


def _points(taus, a, beta):
    return [ScalingPoint(t, a * t**beta) for t in taus]


def test_synthetic_sweep_values():
    task = QslMinimum(Synthetic(1.0), RampProtocol.linear(0, 1, 1.0))
    pts = sweep(task, [10.0, 100.0, 1000.0], workers=1)
    for p, expected in zip(pts, (math.sqrt(10), 10.0, math.sqrt(1000))):
        assert p.valid and p.value == pytest.approx(expected, rel=1e-6)


def test_synthetic_sweep_fit_exact():
    task = QslMinimum(Synthetic(1.0), RampProtocol.linear(0, 1, 1.0))
    fit = fit_power_law(sweep(task, log_grid(10, 1e4, 12), workers=1))
    assert fit.beta == pytest.approx(0.5, abs=1e-9)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-9)


def test_lmg_nu_min_decreases():
    pts = sweep(NuMin(LMGEffective(1.0), RampProtocol.linear(0, 1, 1.0)),
                log_grid(1e3, 1e5, 6), workers=1)
    vals = [p.value for p in pts]
    assert all(p.valid for p in pts)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_unreachable_threshold_is_empty_sweep():
    task = LzInfidelity(0.1, RampProtocol.linear(-5, 0, 1.0), K=0.9, sample_count=256)
    with pytest.raises(EmptySweep):
        sweep(task, [100.0, 200.0], workers=1)


def test_invalid_points_are_kept_and_excluded():
    task = QslMinimum(TFIMMode(1000, 1), RampProtocol.linear(0, 2, 1.0))
    pts = sweep(task, [100.0, 300.0], workers=1)
    assert pts[0].valid
    assert not pts[1].valid and pts[1].reason == "MinimumPastCritical"
    assert math.isnan(pts[1].value)
    pts = pts + _points([1e4, 1e5], 1.0, 0.5)
    assert fit_power_law(pts).n_points == 3


def test_no_minimum_becomes_invalid_point():
    # ramping away from the critical point quickly: the cost term dominates
    # and grows monotonically, so there is no interior minimum
    task = QslMinimum(Synthetic(1.0), RampProtocol.linear(1, 0, 1.0))
    p = task.evaluate(0.1)
    assert not p.valid and p.reason == "NoMinimum"


def test_fit_exact_power_law():
    fit = fit_power_law(_points(log_grid(1, 1e3, 20), 2.0, 0.5))
    assert fit.amplitude == pytest.approx(2.0, rel=1e-12)
    assert fit.beta == pytest.approx(0.5, abs=1e-12)
    assert fit.stderr_beta < 1e-12 and fit.residual_rms < 1e-12
    assert fit.n_points == 20 and fit.window == (1.0, 1e3)


def test_fit_constant():
    fit = fit_power_law(_points([1, 2, 5, 10], 7.0, 0.0))
    assert fit.beta == pytest.approx(0.0, abs=1e-14)
    assert fit.amplitude == pytest.approx(7.0, rel=1e-14)


def test_fit_errors():
    with pytest.raises(InsufficientData):
        fit_power_law(_points([1, 2], 1.0, 1.0))
    with pytest.raises(InsufficientData):
        fit_power_law(_points([1, 2, 3, 4], 1.0, 1.0), window=(2.5, 10))
    with pytest.raises(DomainError):
        fit_power_law([ScalingPoint(1, 1.0), ScalingPoint(2, -1.0), ScalingPoint(3, 2.0)])


def test_fit_window_brackets_points():
    fit = fit_power_law(_points(log_grid(1, 1e3, 20), 1.0, 0.3), window=(5, 500))
    assert fit.window == (5.0, 500.0)
    assert fit.n_points == sum(1 for t in log_grid(1, 1e3, 20) if 5 <= t <= 500)


taus = st.lists(st.floats(0.1, 1e4), min_size=3, max_size=20, unique=True)


@settings(max_examples=100, deadline=None)
@given(taus, st.floats(0.1, 10), st.floats(-2, 2), st.floats(0.01, 100),
       st.lists(st.floats(-0.3, 0.3), min_size=20, max_size=20))
def test_fit_covariance(ts, a, beta, c, noise):
    ts = sorted(ts)
    if math.log(ts[-1] / ts[0]) < 0.1:
        return
    pts = [ScalingPoint(t, a * t**beta * math.exp(e)) for t, e in zip(ts, noise)]
    base = fit_power_law(pts)
    scaled = fit_power_law([ScalingPoint(p.tau_q, c * p.value) for p in pts])
    assert scaled.beta == pytest.approx(base.beta, abs=1e-9)
    assert scaled.amplitude == pytest.approx(c * base.amplitude, rel=1e-9)
    stretched = fit_power_law([ScalingPoint(c * p.tau_q, p.value) for p in pts])
    assert stretched.beta == pytest.approx(base.beta, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(-2, 2), st.integers(0, 8), st.integers(0, 8))
def test_fit_window_shrink_on_pure_power_law(a, beta, cut_lo, cut_hi):
    grid = log_grid(1, 1e4, 30)
    full = fit_power_law(_points(grid, a, beta))
    lo, hi = grid[cut_lo], grid[-1 - cut_hi]
    part = fit_power_law(_points(grid, a, beta), window=(lo, hi))
    assert part.beta == pytest.approx(full.beta, abs=1e-9)


def test_sweep_grid_validation():
    task = QslMinimum(Synthetic(1.0), RampProtocol.linear(0, 1, 1.0))
    for grid in ([], [1.0, 1.0], [2.0, 1.0], [-1.0, 1.0]):
        with pytest.raises(DomainError):
            sweep(task, grid, workers=1)
    with pytest.raises(DomainError):
        log_grid(10, 1, 5)


def test_parallel_sweep_matches_serial():
    task = QslMinimum(LMGEffective(1.0), RampProtocol.linear(0, 1, 1.0))
    grid = log_grid(1e3, 1e5, 8)
    assert sweep(task, grid, workers=1) == sweep(task, grid, workers=3)
    assert sweep(task, grid, workers=3) == sweep(task, grid, workers=3)


def test_crossover_sweep_layout():
    res = lz_crossover_sweep(0.1, RampProtocol.linear(-5, 0, 1.0), [1e-3, 1e-2],
                             [50.0, 100.0], sample_count=512, workers=2)
    assert [(r.tau_q, r.K) for r in res] == [(50.0, 1e-3), (50.0, 1e-2),
                                             (100.0, 1e-3), (100.0, 1e-2)]


def test_threads_env_overrides(monkeypatch):
    monkeypatch.setenv("KZQSL_THREADS", "3")
    assert resolve_workers(8) == 3
    monkeypatch.setenv("KZQSL_THREADS", "zero")
    with pytest.raises(DomainError):
        resolve_workers()
    monkeypatch.delenv("KZQSL_THREADS")
    assert resolve_workers(5) == 5
    with pytest.raises(DomainError):
        resolve_workers(0)


def test_unknown_observable():
    with pytest.raises(DomainError):
        QslMinimum(Synthetic(1.0), RampProtocol.linear(0, 1, 1.0), observable="speed")
