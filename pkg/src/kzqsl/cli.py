"""Command-line front-end: ``kzqsl <task> --config cfg.json``.

Each invocation runs exactly one task and writes ``<name>.csv`` (when the
task produces tabular data) and ``<name>.json`` into the output directory.
Exit codes: 0 success, 2 invalid config, 3 computation failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import config as _config
from . import qsl, scaling
from .dynamics import crossover_time, evolve_lz
from .errors import ConfigError, InsufficientData, KZQSLError
from .recipes import figure_recipes, get_recipe

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_IO = 0, 2, 3, 4

TRACE_HEADER = ("t", "g", "energy", "cost_rate", "bures", "nu_qsl")
SWEEP_HEADER = ("tau_q", "value", "valid")
MINIMUM_HEADER = ("tau_q", "t_m", "nu_min", "impulse_duration", "t_c", "converged")
LZ_EVOLVE_HEADER = ("t", "g", "re_c0", "im_c0", "re_c1", "im_c1", "infidelity")
LZ_CROSSOVER_HEADER = ("tau_q", "K", "t_hat", "t_star", "crossing_kind")


class _IOFailure(Exception):
    pass


def fmt(x):
    """CSV cell text: 17 significant digits, ``inf``/``nan`` spelled out."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt(x)
    return str(obj)


def json_text(obj):
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _write_atomic(files, out_dir):
    """Write every (name, text) pair to temp files, then rename them all."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        staged = []
        for name, text in files:
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(out_dir, name)))
        for tmp, final in staged:
            os.replace(tmp, final)
    except OSError as exc:
        for tmp, _ in locals().get("staged", []):
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise _IOFailure(str(exc)) from exc


def _tau_grid(cfg):
    sw = cfg["sweep"]
    if sw["tau_grid"] is not None:
        return list(sw["tau_grid"])
    return scaling.log_grid(sw["tau_min"], sw["tau_max"], sw["points"])


def _minimum_dict(res):
    return {"t_m": res.t_m, "nu_min": res.nu_min, "impulse_duration": res.impulse_duration,
            "t_c": res.t_c, "bracket": list(res.bracket), "iterations": res.iterations,
            "converged": res.converged}


def _fit_or_reason(points, window):
    try:
        return scaling.fit_power_law(points, window).to_dict()
    except InsufficientData as exc:
        return {"error": "InsufficientData", "message": str(exc)}


def _run_trace(cfg):
    model, ramp = _config.build_model(cfg), _config.build_ramp(cfg)
    num = cfg["numerics"]
    grid = np.linspace(0.0, ramp.tau_q, num["grid_points"])
    grid[-1] = ramp.tau_q
    samples = qsl.speed_trace(model, cfg["convention"], ramp, [float(t) for t in grid],
                              numerator_only=num["numerator_only"])
    rows = [(s.t, s.g, s.energy, s.cost_rate, s.bures, s.nu_qsl) for s in samples]
    finite = [s for s in samples if s.finite]
    result = {"n_samples": len(samples), "n_infinite": len(samples) - len(finite)}
    if finite:
        best = min(finite, key=lambda s: (s.nu_qsl, s.t))
        result["grid_minimum"] = {"t": best.t, "nu_qsl": best.nu_qsl}
    return TRACE_HEADER, rows, result


def _run_minimum(cfg):
    model, ramp = _config.build_model(cfg), _config.build_ramp(cfg)
    num = cfg["numerics"]
    res = qsl.find_minimum(model, cfg["convention"], ramp, window=num["window"],
                           coarse_points=num["coarse_points"], tol_rel=num["tol_rel"],
                           numerator_only=num["numerator_only"])
    row = (ramp.tau_q, res.t_m, res.nu_min, res.impulse_duration, res.t_c, res.converged)
    return MINIMUM_HEADER, [row], _minimum_dict(res)


def _sweep_task(cfg):
    num, sw = cfg["numerics"], cfg["sweep"]
    ramp = _config.build_ramp(cfg, tau_q=1.0)
    model = _config.build_model(cfg)
    if sw["observable"] == "t_star":
        return scaling.LzInfidelity(model.delta, ramp, num["thresholds"][0],
                                    num["sample_count"], num["tol"])
    return scaling.QslMinimum(model, ramp, cfg["convention"], sw["observable"],
                              num["numerator_only"], num["coarse_points"], num["tol_rel"],
                              sw["approach_side"])


def _run_sweep(cfg):
    points = scaling.sweep(_sweep_task(cfg), _tau_grid(cfg), cfg["numerics"]["workers"])
    rows = [(p.tau_q, p.value, p.valid) for p in points]
    result = {"n_points": len(points), "n_valid": sum(p.valid for p in points),
              "fit": _fit_or_reason(points, cfg["sweep"]["fit_window"])}
    return SWEEP_HEADER, rows, result


def read_sweep_csv(path):
    """Load ``tau_q,value,valid`` rows written by the sweep task."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    if header is None or tuple(header) != SWEEP_HEADER:
        raise ConfigError(f"{path}: expected header {','.join(SWEEP_HEADER)}")
    points = []
    for row in rows:
        try:
            tau, value, valid = float(row[0]), float(row[1]), row[2].strip().lower()
        except (ValueError, IndexError):
            raise ConfigError(f"{path}: malformed row {row!r}") from None
        if valid not in ("true", "false"):
            raise ConfigError(f"{path}: valid column must be true/false, got {row[2]!r}")
        points.append(scaling.ScalingPoint(tau, value, valid == "true"))
    return points


def _run_fit(cfg):
    fit = cfg["fit"]
    points = read_sweep_csv(fit["input"])
    return None, None, scaling.fit_power_law(points, fit["window"]).to_dict()


def _run_lz_evolve(cfg):
    model, ramp = _config.build_model(cfg), _config.build_ramp(cfg)
    num = cfg["numerics"]
    trace = evolve_lz(model.delta, ramp, num["sample_count"], num["tol"])
    rows = [(t, g, s[0].real, s[0].imag, s[1].real, s[1].imag, i)
            for t, g, s, i in zip(trace.times, trace.g, trace.states, trace.infidelity)]
    crossings = [crossover_time(trace, K) for K in num["thresholds"]]
    st = trace.stats
    result = {
        "final_infidelity": float(trace.infidelity[-1]),
        "max_infidelity": float(trace.infidelity.max()),
        "integrator": {"accepted": st.accepted, "rejected": st.rejected,
                       "max_local_error": st.max_local_error,
                       "max_norm_drift": st.max_norm_drift},
        "crossovers": [{"K": c.K, "t_hat": c.t_hat, "t_star": c.t_star,
                        "crossing_kind": c.crossing_kind.value} for c in crossings],
    }
    return LZ_EVOLVE_HEADER, rows, result


def _run_lz_crossover(cfg):
    model = _config.build_model(cfg)
    num = cfg["numerics"]
    if "sweep" in cfg:
        grid = _tau_grid(cfg)
    else:
        grid = [cfg["ramp"]["tau_q"]]
    ramp = _config.build_ramp(cfg, tau_q=grid[0])
    results = scaling.lz_crossover_sweep(model.delta, ramp, num["thresholds"], grid,
                                         num["sample_count"], num["tol"], num["workers"])
    rows = [(c.tau_q, c.K, c.t_hat, c.t_star, c.crossing_kind.value) for c in results]
    fits = []
    window = cfg["sweep"]["fit_window"] if "sweep" in cfg else None
    for K in num["thresholds"]:
        pts = [scaling.ScalingPoint(c.tau_q, c.t_star, c.crossed) for c in results if c.K == K]
        fits.append({"K": K, "fit": _fit_or_reason(pts, window)})
    return LZ_CROSSOVER_HEADER, rows, {"fits": fits}


RUNNERS = {
    "trace": _run_trace,
    "minimum": _run_minimum,
    "sweep": _run_sweep,
    "fit": _run_fit,
    "lz-evolve": _run_lz_evolve,
    "lz-crossover": _run_lz_crossover,
}


def execute(cfg):
    """Run a resolved config; return the list of (file name, text) artifacts."""
    header, rows, result = RUNNERS[cfg["task"]](cfg)
    name = cfg["output"]["name"]
    files = []
    if header is not None:
        files.append((f"{name}.csv", csv_text(header, rows)))
    summary = {
        "artifact": "kzqsl",
        "version": __version__,
        "task": cfg["task"],
        "config": cfg,
        "result": result,
        "files": [f for f, _ in files] + [f"{name}.json"],
    }
    files.append((f"{name}.json", json_text(summary)))
    return files


def run(raw, task=None):
    """Validate, compute and write. Returns ``(exit_code, error_record_or_None)``."""
    try:
        cfg = _config.resolve(raw, task)
    except ConfigError as exc:
        return EXIT_CONFIG, _error(exc, EXIT_CONFIG)
    try:
        files = execute(cfg)
    except _IOFailure as exc:
        return EXIT_IO, _error(exc, EXIT_IO, "IOError")
    except ConfigError as exc:
        return EXIT_CONFIG, _error(exc, EXIT_CONFIG)
    except KZQSLError as exc:
        return EXIT_COMPUTE, _error(exc, EXIT_COMPUTE)
    try:
        _write_atomic(files, cfg["output"]["dir"])
    except _IOFailure as exc:
        return EXIT_IO, _error(exc, EXIT_IO, "IOError")
    return EXIT_OK, None


def _error(exc, code, kind=None):
    return {"status": "error", "exit_code": code, "error": kind or type(exc).__name__,
            "message": str(exc)}


def _load(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _apply_flags(raw, args):
    # --set first so that dedicated flags win over whole-section replacements
    overrides = [_config.parse_override(text) for text in getattr(args, "set", None) or []]
    if args.out is not None:
        overrides.append(("output.dir", args.out))
    if getattr(args, "name", None) is not None:
        overrides.append(("output.name", args.name))
    if getattr(args, "tau_q", None) is not None:
        overrides.append(("ramp.tau_q", args.tau_q))
    if getattr(args, "workers", None) is not None:
        overrides.append(("numerics.workers", args.workers))
    if getattr(args, "input", None) is not None:
        overrides.append(("fit.input", args.input))
    if getattr(args, "window", None) is not None:
        overrides.append(("fit.window", list(args.window)))
    for key, value in overrides:
        _config.set_path(raw, key, value)
    return raw


def build_parser():
    parser = argparse.ArgumentParser(prog="kzqsl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kzqsl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in _config.TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--name", help="output file stem (overrides output.name)")
        p.add_argument("--workers", type=int, help="sweep worker processes")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override any config value; VALUE is parsed as JSON")
        if task != "fit":
            p.add_argument("--tau-q", type=float, help="quench time (overrides ramp.tau_q)")
        else:
            p.add_argument("--input", help="sweep CSV to fit")
            p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p = sub.add_parser("recipe", help="print or run a named figure preset")
    p.add_argument("name", nargs="?", help="preset name")
    p.add_argument("--list", action="store_true", help="list preset names")
    p.add_argument("--print", dest="show", action="store_true", help="print the configs")
    p.add_argument("--out", help="output directory for running the preset")
    p.add_argument("--workers", type=int)
    return parser


def _report(code, err):
    if err is not None:
        print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "recipe":
        return _recipe(args)
    try:
        raw = _apply_flags(_load(args.config), args)
    except ConfigError as exc:
        return _report(EXIT_CONFIG, _error(exc, EXIT_CONFIG))
    return _report(*run(raw, args.command))


def _recipe(args):
    if args.list or not args.name:
        for r in figure_recipes():
            print(f"{r.name}\t{r.description}")
        return EXIT_OK
    try:
        recipe = get_recipe(args.name)
    except KeyError:
        return _report(EXIT_CONFIG, {"status": "error", "exit_code": EXIT_CONFIG,
                                     "error": "ConfigError",
                                     "message": f"unknown recipe {args.name!r}"})
    configs = recipe.copy_configs()
    if args.show or args.out is None:
        print(json_text(configs), end="")
        return EXIT_OK
    for raw in configs:
        _config.set_path(raw, "output.dir", args.out)
        if args.workers is not None:
            _config.set_path(raw, "numerics.workers", args.workers)
        code, err = run(raw)
        if code != EXIT_OK:
            return _report(code, err)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
