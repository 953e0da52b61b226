import json
import os

import numpy as np
import pytest

from pshlab.cli import main
from pshlab.diagnostics import Trace
from pshlab.errors import ConfigError
from pshlab.gain import GainFunction, h_value
from pshlab.scenarios import (CATALOGUE, ScenarioConfig, load_config, make_t_grid,
                              parse_config_text, read_csv, run_scenario, validate_config,
                              write_trace_csv)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")
GOOD = sorted(f for f in os.listdir(CONFIGS) if f.endswith(".cfg") and f != "bad.cfg")


def cfg_path(name):
    return os.path.join(CONFIGS, name)


def test_parse_flat_config():
    text = "# comment\nscenario = closed-form-jets\n\nweight.k = 3\nweight.jets = 1, 0, 1, 0\n"
    assert parse_config_text(text) == {"scenario": "closed-form-jets", "weight.k": "3",
                                       "weight.jets": "1, 0, 1, 0"}


@pytest.mark.parametrize("text", ["scenario closed-form-jets", "a.b.c = 1", "= 3",
                                  "weight.k = 1\nweight.k = 2"])
def test_parse_rejects_malformed(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_build_rejects_unknown_keys_and_scenarios():
    with pytest.raises(ConfigError):
        ScenarioConfig.build({"scenario": "closed-form-jets", "weight.a": "-1"})
    with pytest.raises(ConfigError):
        ScenarioConfig.build({"scenario": "nonexistent"})
    with pytest.raises(ConfigError):
        ScenarioConfig.build({})


def test_overrides_take_precedence():
    cfg = ScenarioConfig.build({"scenario": "closed-form-jets", "grid.points": "10"},
                               {"grid.points": "12"})
    assert cfg.t_points == 12


@pytest.mark.parametrize("name", GOOD)
def test_shipped_configs_validate(name):
    assert validate_config(load_config(cfg_path(name))) == []


def test_bad_config_reports_gain_invariant():
    problems = validate_config(load_config(cfg_path("bad.cfg")))
    assert any("gain invariant violated" in p for p in problems)


def test_catalogue_has_six_scenarios():
    assert len(CATALOGUE) == 6


def test_t_grid_uniform_in_r():
    gain = GainFunction.piecewise([1.0, 0.5], [1.0])
    t = make_t_grid(gain, 9, 6.0)
    assert t[0] == 0 and t[-1] == 6.0 and np.all(np.diff(t) > 0)
    assert np.allclose(np.diff(h_value(gain, t)), np.diff(h_value(gain, t)).mean())
    assert np.allclose(make_t_grid(gain, 5, 4.0, "t"), [0, 1, 2, 3, 4])
    with pytest.raises(ConfigError):
        make_t_grid(gain, 1, 4.0)


def test_csv_round_trip_and_format(tmp_path):
    x = np.array([0.0, 1 / 3, 2.0])
    tr = Trace(x, np.array([np.pi, np.e, 1e-300]), np.array([0.0, 1e-17, 2.5]),
               flags=["ok", "basis-unstable", "ok"])
    path = write_trace_csv(tr, str(tmp_path / "t.csv"))
    raw = open(path, "rb").read()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, rows = read_csv(path)
    assert header == ["axis", "value", "error", "flag"]
    assert [r[0] for r in rows] == list(x)
    assert [r[1] for r in rows] == [np.pi, np.e, 1e-300]
    assert [r[3] for r in rows] == tr.flags


def test_empty_trace_writes_header_only(tmp_path):
    path = write_trace_csv(None, str(tmp_path / "e.csv"))
    assert open(path, encoding="utf-8").read() == "axis,value,error,flag\n"


def test_run_scenario_in_memory():
    cfg = ScenarioConfig.build({"scenario": "closed-form-jets", "grid.points": "16"})
    res = run_scenario(cfg, write=False)
    assert res.status == "ok"
    assert not res.failed_checks()


# -- command line --------------------------------------------------------------

def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in CATALOGUE)


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["list", "--verbose"],
                                  ["run", "x.cfg", "--no-such-flag"], ["run"]])
def test_cli_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_cli_validate(capsys):
    assert main(["validate", cfg_path("closed_form_jets.cfg")]) == 0
    assert main(["validate", cfg_path("bad.cfg")]) == 1
    assert "gain invariant violated" in capsys.readouterr().err
    assert main(["validate", cfg_path("missing.cfg")]) == 1


def test_cli_oracle(capsys):
    assert main(["oracle", "char-two-segment", "--t-points", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "label,axis,value" and len(lines) > 1
    assert main(["oracle", "no-such-scenario"]) == 1


def test_cli_run_outputs_are_deterministic(tmp_path, capsys):
    dirs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert main(["run", cfg_path("closed_form_jets.cfg"), "--out-dir", str(out),
                     "--t-points", "20", "--quiet"]) == 0
        dirs.append(out / "closed-form-jets")
    names = sorted(os.listdir(dirs[0]))
    assert "report.json" in names and any(n.endswith(".csv") for n in names)
    for n in names:
        if n.endswith(".csv"):
            assert (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes()
    report = json.loads((dirs[0] / "report.json").read_text(encoding="utf-8"))
    assert report["status"] == "ok" and report["config"]["grid.points"] == "20"
    header, rows = read_csv(str(dirs[0] / "jets_t.csv"))
    assert header == ["axis", "value", "error", "flag"] and len(rows) == 20


def test_cli_respects_env_output_root(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PSHLAB_OUT", str(tmp_path / "env"))
    assert main(["run", cfg_path("closed_form_jets.cfg"), "--t-points", "8", "--quiet"]) == 0
    assert (tmp_path / "env" / "closed-form-jets" / "report.json").exists()


def test_cli_basis_max_override():
    from pshlab.cli import _overrides, build_parser
    args = build_parser().parse_args(["run", "x.cfg", "--basis-max", "30", "--seed", "3"])
    ov = _overrides(args, {"basis.n_min": "-24"})
    assert ov == {"basis.n_max": "30", "basis.n_min": "-30", "seed": "3"}
    assert _overrides(args, {"basis.n_min": "auto"})["basis.n_max"] == "30"


def test_cli_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", cfg_path("closed_form_jets.cfg"), "--out-dir", str(blocker / "sub"),
                 "--t-points", "8", "--quiet"]) == 1
