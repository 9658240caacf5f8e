import csv
import json
import math
import os

import pytest

from kzqsl import cli
from kzqsl import config as cfgmod
from kzqsl.errors import ConfigError
from kzqsl.recipes import figure_recipes, get_recipe

SYN = {"kind": "synthetic", "z_nu": 1.0}
LIN01 = {"kind": "linear", "g0": 0.0, "g1": 1.0}


def _run(tmp_path, raw, task=None, name="out"):
    raw = json.loads(json.dumps(raw))
    raw.setdefault("output", {}).update({"dir": str(tmp_path), "name": name})
    return cli.run(raw, task)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _summary(tmp_path, name="out"):
    with open(tmp_path / f"{name}.json") as fh:
        return json.load(fh)


def test_minimum_synthetic(tmp_path):
    code, err = _run(tmp_path, {"task": "minimum", "model": SYN,
                                "ramp": {**LIN01, "tau_q": 100.0}})
    assert code == 0 and err is None
    s = _summary(tmp_path)
    assert s["artifact"] == "kzqsl" and s["task"] == "minimum"
    assert s["result"]["t_m"] == pytest.approx(10.0, abs=1e-6)
    rows = _rows(tmp_path / "out.csv")
    assert tuple(rows[0]) == cli.MINIMUM_HEADER
    assert float(rows[1][1]) == s["result"]["t_m"]


def test_sweep_lmg_and_fit_roundtrip(tmp_path):
    raw = {"task": "sweep", "model": {"kind": "lmg", "omega": 1.0}, "ramp": LIN01,
           "sweep": {"tau_min": 1e3, "tau_max": 1e5, "points": 20}}
    code, _ = _run(tmp_path, raw, name="lmg")
    assert code == 0
    rows = _rows(tmp_path / "lmg.csv")
    assert tuple(rows[0]) == cli.SWEEP_HEADER and len(rows) == 21
    assert all(r[2] in ("true", "false") for r in rows[1:])
    fit = _summary(tmp_path, "lmg")["result"]["fit"]
    assert set(fit) == {"amplitude", "beta", "stderr_beta", "window", "n_points",
                        "residual_rms"}
    assert fit["beta"] == pytest.approx(0.34, abs=0.03)
    code, _ = _run(tmp_path, {"task": "fit", "fit": {"input": str(tmp_path / "lmg.csv")}},
                   name="refit")
    assert code == 0
    assert _summary(tmp_path, "refit")["result"] == fit
    assert not (tmp_path / "refit.csv").exists()


def test_negative_tau_is_config_error_without_outputs(tmp_path):
    code, err = _run(tmp_path, {"task": "minimum", "model": SYN,
                                "ramp": {**LIN01, "tau_q": -1.0}})
    assert code == 2 and err["exit_code"] == 2 and err["error"] == "ConfigError"
    assert os.listdir(tmp_path) == []


def test_computation_failure_exit_3(tmp_path):
    code, err = _run(tmp_path, {"task": "minimum", "model": SYN,
                                "ramp": {"kind": "linear", "g0": 1.0, "g1": 0.0,
                                         "tau_q": 0.1}})
    assert code == 3 and err["error"] == "NoMinimum"
    assert os.listdir(tmp_path) == []


def test_io_failure_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    raw = {"task": "minimum", "model": SYN, "ramp": {**LIN01, "tau_q": 10.0},
           "output": {"dir": str(blocker / "sub")}}
    assert cli.run(raw)[0] == 4
    code, err = cli.run({"task": "fit", "fit": {"input": str(tmp_path / "missing.csv")}})
    assert code == 4 and err["exit_code"] == 4


def test_trace_csv_and_inf(tmp_path):
    raw = {"task": "trace", "model": {"kind": "lmg", "omega": 1.0},
           "ramp": {**LIN01, "tau_q": 10.0}, "numerics": {"grid_points": 101}}
    assert _run(tmp_path, raw)[0] == 0
    rows = _rows(tmp_path / "out.csv")
    assert tuple(rows[0]) == cli.TRACE_HEADER and len(rows) == 102
    assert rows[1][5] == "inf" and rows[-1][5] == "inf"
    assert all(math.isfinite(float(r[5])) for r in rows[2:-1])


def test_lz_tasks(tmp_path):
    lz = {"kind": "lz", "delta": 0.1}
    ramp = {"kind": "linear", "g0": -5.0, "g1": 0.0, "tau_q": 100.0}
    raw = {"task": "lz-evolve", "model": lz, "ramp": ramp,
           "numerics": {"sample_count": 256, "thresholds": [1e-3, 1e-4]}}
    assert _run(tmp_path, raw, name="ev")[0] == 0
    rows = _rows(tmp_path / "ev.csv")
    assert tuple(rows[0]) == cli.LZ_EVOLVE_HEADER and len(rows) == 257
    assert float(rows[1][6]) == 0.0
    raw["task"] = "lz-crossover"
    assert _run(tmp_path, raw, name="cr")[0] == 0
    rows = _rows(tmp_path / "cr.csv")
    assert tuple(rows[0]) == cli.LZ_CROSSOVER_HEADER
    assert [r[4] for r in rows[1:]] == ["LastUpwardCrossing"] * 2
    for r in rows[1:]:
        assert float(r[3]) == 100.0 - float(r[2])


def test_lz_crossover_sweep(tmp_path):
    raw = {"task": "lz-crossover", "model": {"kind": "lz", "delta": 0.1},
           "ramp": {"kind": "linear", "g0": -5.0, "g1": 0.0},
           "numerics": {"sample_count": 512, "thresholds": [1e-3]},
           "sweep": {"tau_min": 30.0, "tau_max": 300.0, "points": 4, "observable": "t_star"}}
    assert _run(tmp_path, raw)[0] == 0
    fits = _summary(tmp_path)["result"]["fits"]
    assert fits[0]["K"] == 1e-3 and 0.5 < fits[0]["fit"]["beta"] < 0.8


def test_byte_identical_reruns_and_config_echo(tmp_path):
    raw = {"task": "sweep", "model": {"kind": "tfim_mode", "N": 1000, "n": 1},
           "ramp": {"kind": "power_approach", "r": 1.25},
           "sweep": {"tau_min": 0.1, "tau_max": 10.0, "points": 6},
           "numerics": {"workers": 2}}
    a, b, c = (tmp_path / x for x in "abc")
    assert _run(a, raw)[0] == 0
    first = {n: (a / n).read_bytes() for n in ("out.csv", "out.json")}
    assert _run(a, raw)[0] == 0
    assert first == {n: (a / n).read_bytes() for n in ("out.csv", "out.json")}
    assert _run(b, raw)[0] == 0
    echo = _summary(a)["config"]
    assert echo["numerics"]["coarse_points"] == 512 and echo["sweep"]["approach_side"] is True
    echo["output"]["dir"] = str(c)
    assert cli.run(echo)[0] == 0
    for d in (b, c):
        assert (a / "out.csv").read_bytes() == (d / "out.csv").read_bytes()
    assert not [f for d in (a, b, c) for f in os.listdir(d) if f.startswith(".")]


def test_fmt():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(math.inf) == "inf" and cli.fmt(-math.inf) == "-inf"
    assert cli.fmt(math.nan) == "nan"
    assert cli.fmt(True) == "true" and cli.fmt(3) == "3"


@pytest.mark.parametrize("raw", [
    {"task": "minimum", "model": SYN, "ramp": {**LIN01, "tau_q": 1.0}, "extra": 1},
    {"task": "minimum", "model": {**SYN, "zz": 1}, "ramp": {**LIN01, "tau_q": 1.0}},
    {"task": "minimum", "model": SYN, "ramp": {**LIN01, "tau_q": 1.0},
     "numerics": {"coarse_points": 4}},
    {"task": "minimum", "model": SYN, "ramp": {**LIN01, "tau_q": 1.0},
     "numerics": {"tol": 1e-3}},
    {"task": "minimum", "model": SYN, "ramp": LIN01},
    {"task": "minimum", "model": {"kind": "tfim_mode", "N": 7, "n": 1},
     "ramp": {**LIN01, "tau_q": 1.0}},
    {"task": "minimum", "model": SYN, "ramp": {**LIN01, "tau_q": 1.0}, "convention": "x"},
    {"task": "lz-evolve", "model": SYN, "ramp": {**LIN01, "tau_q": 1.0}},
    {"task": "sweep", "model": SYN, "ramp": LIN01, "sweep": {"tau_min": 10, "tau_max": 1}},
    {"task": "sweep", "model": SYN, "ramp": LIN01, "sweep": {"tau_grid": [2, 1]}},
    {"task": "fit", "fit": {}},
    {"task": "bogus"},
    [],
])
def test_strict_config(raw):
    with pytest.raises(ConfigError):
        cfgmod.resolve(raw)


def test_overrides():
    raw = {}
    cfgmod.set_path(raw, "ramp.tau_q", 5.0)
    assert raw == {"ramp": {"tau_q": 5.0}}
    assert cfgmod.parse_override("model.n=3") == ("model.n", 3)
    assert cfgmod.parse_override("output.name=abc") == ("output.name", "abc")
    with pytest.raises(ConfigError):
        cfgmod.parse_override("novalue")


def test_main_flags_win(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"task": "minimum", "model": SYN,
                                "ramp": {**LIN01, "tau_q": 1.0}}))
    code = cli.main(["minimum", "--config", str(conf), "--tau-q", "100",
                     "--out", str(tmp_path), "--name", "m"])
    assert code == 0
    assert _summary(tmp_path, "m")["result"]["t_m"] == pytest.approx(10.0, abs=1e-6)
    code = cli.main(["minimum", "--config", str(conf), "--set", "ramp.tau_q=-1",
                     "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["status"] == "error" and err["exit_code"] == 2
    assert cli.main(["minimum", "--config", str(tmp_path / "none.json")]) == 2


def test_recipes(capsys):
    names = [r.name for r in figure_recipes()]
    assert names == ["fig1a", "fig1b", "fig2a", "fig2b", "figS1b", "figS2a", "figS2b"]
    fig1a = get_recipe("fig1a").configs
    assert {c["model"]["n"] for c in fig1a} == {1, 100}
    assert {c["model"]["N"] for c in fig1a} == {1000}
    assert {c["ramp"]["tau_q"] for c in fig1a} == {1.0, 10.0, 100.0}
    assert get_recipe("fig2b").configs[0]["sweep"]["fit_window"] == [1e3, 1e5]
    s2a = get_recipe("figS2a").configs[0]
    assert s2a["ramp"]["r"] == 1.25 and s2a["sweep"]["fit_window"] == [0.1, 10.0]
    assert get_recipe("figS1b").configs[0]["numerics"]["thresholds"] == [1e-2, 1e-3, 1e-4]
    for r in figure_recipes():
        for c in r.configs:
            cfgmod.resolve(c)
    with pytest.raises(KeyError):
        get_recipe("fig9")
    assert cli.main(["recipe", "--list"]) == 0
    assert "fig2b" in capsys.readouterr().out
    assert cli.main(["recipe", "fig2b", "--print"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["task"] == "sweep"
    assert cli.main(["recipe", "nope"]) == 2


def test_recipe_run(tmp_path):
    assert cli.main(["recipe", "fig2a", "--out", str(tmp_path)]) == 0
    assert sorted(os.listdir(tmp_path)) == sorted(
        f"fig2a_tau{t}.{ext}" for t in (1, 10, 100) for ext in ("csv", "json"))
