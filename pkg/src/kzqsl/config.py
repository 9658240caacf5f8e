"""Strict run-configuration parsing.

A configuration is a JSON object with the sections below; unknown keys at
any level are rejected, and every default is filled in so the resolved
config can be echoed and re-run verbatim.

.. code-block:: json

    {
      "task": "sweep",
      "model": {"kind": "lmg", "omega": 1.0},
      "convention": "ground_state",
      "ramp": {"kind": "linear", "g0": 0.0, "g1": 1.0},
      "numerics": {"coarse_points": 512, "tol_rel": 1e-10},
      "sweep": {"tau_min": 1e3, "tau_max": 1e5, "points": 20},
      "output": {"dir": "out", "name": "fig2b"}
    }
"""

from __future__ import annotations

import copy
import json
import math

from . import models as _models
from . import ramps as _ramps
from .errors import ConfigError, KZQSLError
from .models import EnergyConvention

TASKS = ("trace", "minimum", "sweep", "fit", "lz-evolve", "lz-crossover")
SWEEP_OBSERVABLES = ("impulse_duration", "t_m", "nu_min", "t_star")

MODEL_KEYS = {
    "lz": {"delta": None},
    "tfim_mode": {"N": None, "n": None, "b": 1.0, "include_shift": True, "omega": 1.0},
    "tfim_aggregate": {"N": None, "b": 1.0, "include_shift": True, "single_shift": False,
                       "omega": 1.0},
    "lmg": {"omega": 1.0},
    "synthetic": {"z_nu": None},
}
RAMP_KEYS = {
    "linear": {"tau_q": None, "g0": 0.0, "g1": 1.0},
    "power_approach": {"tau_q": None, "r": None},
    "power_from_zero": {"tau_q": None, "r": None, "g1": 1.0},
}
NUMERICS_DEFAULTS = {
    "coarse_points": 512,
    "tol_rel": 1e-10,
    "numerator_only": False,
    "window": None,
    "grid_points": 2001,
    "sample_count": 4096,
    "tol": 1e-10,
    "thresholds": [1e-3],
    "workers": None,
}
SWEEP_DEFAULTS = {
    "tau_grid": None,
    "tau_min": None,
    "tau_max": None,
    "points": 20,
    "observable": "impulse_duration",
    "fit_window": None,
    "approach_side": True,
}
FIT_DEFAULTS = {"input": None, "window": None}
OUTPUT_DEFAULTS = {"dir": ".", "name": None}
TOP_KEYS = ("task", "model", "convention", "ramp", "numerics", "sweep", "fit", "output")

NEEDS = {
    "trace": ("model", "ramp"),
    "minimum": ("model", "ramp"),
    "sweep": ("model", "ramp", "sweep"),
    "fit": ("fit",),
    "lz-evolve": ("model", "ramp"),
    "lz-crossover": ("model", "ramp"),
}


def _strict(section, given, defaults):
    if not isinstance(given, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")
    out = {}
    for key, default in defaults.items():
        if key in given:
            out[key] = given[key]
        elif default is None and section in ("model", "ramp") and not (
                section == "ramp" and key == "tau_q"):
            raise ConfigError(f"missing required key {section}.{key}")
        else:
            out[key] = copy.deepcopy(default)
    return out


def _number(section, key, value, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{section}.{key} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _flag(section, key, value):
    if not isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be true or false")
    return value


def _window(section, key, value):
    if value is None:
        return None
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{section}.{key} must be a [lo, hi] pair or null")
    lo, hi = (_number(section, key, v) for v in value)
    if not lo < hi:
        raise ConfigError(f"{section}.{key} needs lo < hi")
    return [lo, hi]


def resolve(raw, task=None):
    """Validate ``raw`` and return the fully resolved config dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    task = task or raw.get("task")
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    for section in NEEDS[task]:
        if section not in raw:
            raise ConfigError(f"task {task!r} needs a {section!r} section")

    cfg = {"task": task}
    if "model" in raw:
        model = raw["model"]
        kind = model.get("kind") if isinstance(model, dict) else None
        if kind not in MODEL_KEYS:
            raise ConfigError(f"model.kind must be one of {sorted(MODEL_KEYS)}, got {kind!r}")
        body = _strict("model", {k: v for k, v in model.items() if k != "kind"}, MODEL_KEYS[kind])
        for key, value in body.items():
            if key in ("include_shift", "single_shift"):
                body[key] = _flag("model", key, value)
            else:
                body[key] = _number("model", key, value, positive=True, integer=key in ("N", "n"))
        cfg["model"] = {"kind": kind, **body}
    conv = raw.get("convention", EnergyConvention.GROUND_STATE.value)
    try:
        cfg["convention"] = EnergyConvention(conv).value
    except ValueError:
        raise ConfigError(f"convention must be 'ground_state' or 'gap', got {conv!r}") from None

    if "ramp" in raw:
        ramp = raw["ramp"]
        kind = ramp.get("kind") if isinstance(ramp, dict) else None
        if kind not in RAMP_KEYS:
            raise ConfigError(f"ramp.kind must be one of {sorted(RAMP_KEYS)}, got {kind!r}")
        body = _strict("ramp", {k: v for k, v in ramp.items() if k != "kind"}, RAMP_KEYS[kind])
        for key, value in body.items():
            if value is None:
                continue
            body[key] = _number("ramp", key, value, positive=key in ("tau_q", "r"))
        if body["tau_q"] is None and task != "sweep" and not (
                task == "lz-crossover" and "sweep" in raw):
            raise ConfigError("ramp.tau_q is required for this task")
        cfg["ramp"] = {"kind": kind, **body}

    num = _strict("numerics", raw.get("numerics", {}), NUMERICS_DEFAULTS)
    num["coarse_points"] = _number("numerics", "coarse_points", num["coarse_points"], True, True)
    if num["coarse_points"] < 16:
        raise ConfigError("numerics.coarse_points must be >= 16")
    num["tol_rel"] = _number("numerics", "tol_rel", num["tol_rel"], True)
    if num["tol_rel"] < 1e-14:
        raise ConfigError("numerics.tol_rel must be >= 1e-14")
    num["numerator_only"] = _flag("numerics", "numerator_only", num["numerator_only"])
    num["window"] = _window("numerics", "window", num["window"])
    num["grid_points"] = _number("numerics", "grid_points", num["grid_points"], True, True)
    num["sample_count"] = _number("numerics", "sample_count", num["sample_count"], True, True)
    if num["sample_count"] < 2:
        raise ConfigError("numerics.sample_count must be >= 2")
    num["tol"] = _number("numerics", "tol", num["tol"], True)
    if not 1e-13 <= num["tol"] <= 1e-6:
        raise ConfigError("numerics.tol must lie in [1e-13, 1e-6]")
    ks = num["thresholds"]
    if not (isinstance(ks, list) and ks):
        raise ConfigError("numerics.thresholds must be a non-empty list")
    num["thresholds"] = [_number("numerics", "thresholds", k, True) for k in ks]
    if any(k >= 1 for k in num["thresholds"]):
        raise ConfigError("numerics.thresholds must lie in (0, 1)")
    if num["workers"] is not None:
        num["workers"] = _number("numerics", "workers", num["workers"], True, True)
    cfg["numerics"] = num

    if "sweep" in raw or task == "sweep":
        sw = _strict("sweep", raw.get("sweep", {}), SWEEP_DEFAULTS)
        if sw["tau_grid"] is not None:
            if not (isinstance(sw["tau_grid"], list) and sw["tau_grid"]):
                raise ConfigError("sweep.tau_grid must be a non-empty list")
            grid = [_number("sweep", "tau_grid", t, True) for t in sw["tau_grid"]]
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("sweep.tau_grid must be strictly increasing")
            sw["tau_grid"] = grid
        else:
            if sw["tau_min"] is None or sw["tau_max"] is None:
                raise ConfigError("sweep needs tau_grid or both tau_min and tau_max")
            sw["tau_min"] = _number("sweep", "tau_min", sw["tau_min"], True)
            sw["tau_max"] = _number("sweep", "tau_max", sw["tau_max"], True)
            if not sw["tau_min"] < sw["tau_max"]:
                raise ConfigError("sweep needs tau_min < tau_max")
        sw["points"] = _number("sweep", "points", sw["points"], True, True)
        if sw["points"] < 2:
            raise ConfigError("sweep.points must be >= 2")
        if sw["observable"] not in SWEEP_OBSERVABLES:
            raise ConfigError(f"sweep.observable must be one of {SWEEP_OBSERVABLES}")
        sw["fit_window"] = _window("sweep", "fit_window", sw["fit_window"])
        sw["approach_side"] = _flag("sweep", "approach_side", sw["approach_side"])
        cfg["sweep"] = sw

    if "fit" in raw:
        fit = _strict("fit", raw["fit"], FIT_DEFAULTS)
        if task == "fit" and not isinstance(fit["input"], str):
            raise ConfigError("fit.input must name a sweep CSV file")
        fit["window"] = _window("fit", "window", fit["window"])
        cfg["fit"] = fit

    out = _strict("output", raw.get("output", {}), OUTPUT_DEFAULTS)
    if not isinstance(out["dir"], str):
        raise ConfigError("output.dir must be a string")
    if out["name"] is None:
        out["name"] = task.replace("-", "_")
    elif not isinstance(out["name"], str) or not out["name"] or "/" in out["name"]:
        raise ConfigError("output.name must be a plain file stem")
    cfg["output"] = out

    lz_task = task in ("lz-evolve", "lz-crossover") or (
        task == "sweep" and cfg["sweep"]["observable"] == "t_star")
    if lz_task and cfg["model"]["kind"] != "lz":
        raise ConfigError(f"task {task!r} needs an 'lz' model")
    if task == "sweep" and cfg["sweep"]["observable"] == "t_star" and len(num["thresholds"]) != 1:
        raise ConfigError("a t_star sweep takes exactly one threshold")

    # build the objects once so module preconditions fail before any work starts
    try:
        if "model" in cfg:
            build_model(cfg)
        if "ramp" in cfg:
            build_ramp(cfg, tau_q=cfg["ramp"]["tau_q"] or 1.0)
    except KZQSLError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_model(cfg):
    params = dict(cfg["model"])
    kind = params.pop("kind")
    if kind == "lz":
        return _models.LandauZener(params["delta"])
    if kind == "tfim_mode":
        return _models.TFIMMode(params["N"], params["n"], params["b"], params["include_shift"],
                                params["omega"])
    if kind == "tfim_aggregate":
        return _models.TFIMAggregate(params["N"], params["b"], params["include_shift"],
                                     params["single_shift"], params["omega"])
    if kind == "lmg":
        return _models.LMGEffective(params["omega"])
    return _models.Synthetic(params["z_nu"])


def build_ramp(cfg, tau_q=None):
    params = dict(cfg["ramp"])
    kind = params.pop("kind")
    tau = params.pop("tau_q") if tau_q is None else tau_q
    if kind == "linear":
        return _ramps.RampProtocol.linear(params["g0"], params["g1"], tau)
    if kind == "power_approach":
        return _ramps.RampProtocol.power_approach(params["r"], tau)
    return _ramps.RampProtocol.power_from_zero(params["r"], params["g1"], tau)


def set_path(raw, dotted, value):
    """Apply a ``section.key=value`` override in place (flags win over the file)."""
    keys = dotted.split(".")
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted!r}: {key!r} is not a section")
    node[keys[-1]] = value


def parse_override(text):
    if "=" not in text:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    key, value = text.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.strip(), parsed
