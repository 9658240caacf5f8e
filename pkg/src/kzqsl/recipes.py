"""Preset run configurations regenerating the data behind each figure."""

from __future__ import annotations

import copy
from dataclasses import dataclass

N_SPINS = 1000
LOW_MODE = 1      # k = pi / (N b)
HIGH_MODE = 100   # k = 199 pi / (N b)


@dataclass(frozen=True)
class Recipe:
    name: str
    description: str
    configs: tuple

    def copy_configs(self):
        return [copy.deepcopy(c) for c in self.configs]


def _tfim(n, include_shift=True):
    return {"kind": "tfim_mode", "N": N_SPINS, "n": n, "b": 1.0,
            "include_shift": include_shift, "omega": 1.0}


def _trace(name, model, ramp, tau_q):
    return {"task": "trace", "model": model, "ramp": {**ramp, "tau_q": tau_q},
            "numerics": {"grid_points": 2001}, "output": {"name": name}}


def _sweep(name, model, ramp, lo, hi, points=20, observable="impulse_duration",
           fit_window=None):
    return {"task": "sweep", "model": model, "ramp": ramp,
            "sweep": {"tau_min": lo, "tau_max": hi, "points": points,
                      "observable": observable, "fit_window": fit_window or [lo, hi]},
            "output": {"name": name}}


_LIN_TFIM = {"kind": "linear", "g0": 0.0, "g1": 2.0}
_LIN_LMG = {"kind": "linear", "g0": 0.0, "g1": 1.0}
_NONLIN = {"kind": "power_approach", "r": 1.25}
_LZ_RAMP = {"kind": "linear", "g0": -5.0, "g1": 0.0}


def figure_recipes():
    """All named presets, in figure order."""
    fig1a = tuple(
        _trace(f"fig1a_n{n}_tau{tau:g}", _tfim(n), _LIN_TFIM, tau)
        for n in (LOW_MODE, HIGH_MODE) for tau in (1.0, 10.0, 100.0))
    fig1b = (
        _sweep("fig1b_low_k", _tfim(LOW_MODE), _LIN_TFIM, 1.0, 1e3),
        _sweep("fig1b_high_k", _tfim(HIGH_MODE), _LIN_TFIM, 1.0, 1e3),
    )
    fig2a = tuple(
        _trace(f"fig2a_tau{tau:g}", {"kind": "lmg", "omega": 1.0}, _LIN_LMG, tau)
        for tau in (1.0, 10.0, 100.0))
    fig2b = (_sweep("fig2b", {"kind": "lmg", "omega": 1.0}, _LIN_LMG, 1e3, 1e5),)
    figS1b = ({
        "task": "lz-crossover",
        "model": {"kind": "lz", "delta": 0.1},
        "ramp": _LZ_RAMP,
        "numerics": {"thresholds": [1e-2, 1e-3, 1e-4], "sample_count": 4096, "tol": 1e-10},
        "sweep": {"tau_min": 10.0, "tau_max": 1e3, "points": 15, "observable": "t_star"},
        "output": {"name": "figS1b"},
    },)
    figS2a = (_sweep("figS2a", _tfim(LOW_MODE), _NONLIN, 0.1, 10.0),)
    figS2b = (_sweep("figS2b", {"kind": "lmg", "omega": 1.0}, _NONLIN, 1e4, 1e6),)
    return [
        Recipe("fig1a", "TFIM speed traces, modes k=pi/Nb and k=199pi/Nb, linear 0->2", fig1a),
        Recipe("fig1b", "TFIM impulse duration |t_c - t_m| versus tau_q", fig1b),
        Recipe("fig2a", "LMG speed traces, linear 0->1", fig2a),
        Recipe("fig2b", "LMG impulse duration versus tau_q, fit on [1e3, 1e5]", fig2b),
        Recipe("figS1b", "LZ infidelity crossover t* versus tau_q for three thresholds", figS1b),
        Recipe("figS2a", "TFIM nonlinear ramp r=5/4, fit on [1e-1, 1e1]", figS2a),
        Recipe("figS2b", "LMG nonlinear ramp r=5/4, fit on [1e4, 1e6]", figS2b),
    ]


def get_recipe(name):
    for recipe in figure_recipes():
        if recipe.name == name:
            return recipe
    raise KeyError(name)
