import json
import subprocess
import sys

import numpy as np
import pytest

from regulator.cli import main
from regulator.config import bundled_scenarios
from regulator.io import read_spectrum


def heat_config(tmp_path, **simulation):
    cfg = json.loads(bundled_scenarios()["heat1d_dual"].read_text())
    cfg["model"]["sim_N"] = 100
    cfg["simulation"].update({"t_end": 4.0, "dt": 0.01}, **simulation)
    path = tmp_path / "heat.json"
    path.write_text(json.dumps(cfg))
    return path


def toy_config(tmp_path, **overrides):
    cfg = {"name": "toy",
           "model": {"type": "matrices", "A": [[0.5, 1.0], [0.0, -2.0]], "B": [[0.0], [1.0]],
                     "C": [[1.0, 0.0]]},
           "signals": {"reference": {"channels": 1, "terms": [{"omega": 1, "cos": [1]}]}},
           "synthesis": {"kind": "dual-observer", "r": 2},
           "simulation": {"t_end": 5.0, "dt": 0.01}}
    for key, value in overrides.items():
        cfg[key].update(value)
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(cfg))
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_synthesize_heat(tmp_path, capsys):
    cfg = heat_config(tmp_path)
    code, out, _ = run(capsys, "synthesize", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    assert out["dim"] == 20 and out["passed"]
    ctrl = tmp_path / "o" / "controller"
    assert {p.name for p in ctrl.iterdir()} == {"G1c.csv", "G2c.csv", "Kc.csv", "manifest.json"}
    report = json.loads((tmp_path / "o" / "synthesis_report.json").read_text())
    assert report["passed"] and report["controller_dim"] == 20


def test_spectrum_and_hankel(tmp_path, capsys):
    cfg, out = heat_config(tmp_path), str(tmp_path / "o")
    code, res, _ = run(capsys, "spectrum", "--config", str(cfg), "--out", out)
    assert code == 0 and res["open_abscissa"] > 0 > res["closed_abscissa"]
    spec = read_spectrum(tmp_path / "o" / "spectrum.csv")
    assert spec["open"].real.max() > 0 and spec["closed"].real.max() < 0
    assert len(spec["closed"]) == len(spec["open"]) + 20
    assert (tmp_path / "o" / "spectrum.svg").read_text().startswith("<svg")
    code, res, _ = run(capsys, "hankel", "--config", str(cfg), "--out", out)
    assert code == 0 and res["r"] == 12
    sigma = np.loadtxt(tmp_path / "o" / "hankel.csv", delimiter=",", skiprows=1)[:, 1]
    assert np.all(np.diff(sigma) <= 0)


def test_simulate_and_saved_controller(tmp_path, capsys):
    cfg, out = heat_config(tmp_path), tmp_path / "o"
    assert run(capsys, "synthesize", "--config", str(cfg), "--out", str(out))[0] == 0
    code, met, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(out),
                       "--controller", str(out / "controller"))
    assert code == 0 and not met["diverged"] and met["closed_loop_margin"] > 0
    data = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
    assert data.shape == (401, 5)
    assert np.allclose(data[:, 3], data[:, 1] - data[:, 2])
    assert json.loads((out / "metrics.json").read_text())["tail_rms"] == met["tail_rms"]


def test_simulate_zero_signals(tmp_path, capsys):
    cfg = toy_config(tmp_path, signals={"reference": {"channels": 1,
                                                      "terms": [{"omega": 1, "cos": [0]}]}})
    code, met, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    assert met["tail_rms"] == 0.0 and not met["decay_defined"]


def test_verify_passes(tmp_path, capsys):
    code, res, _ = run(capsys, "verify", "--config", str(heat_config(tmp_path)),
                       "--out", str(tmp_path / "o"))
    assert code == 0 and res["passed"]
    report = json.loads((tmp_path / "o" / "verify_report.json").read_text())
    assert set(report["checks"]) >= {"rosenbrock", "hautus", "internal_model", "riccati",
                                     "truncation_bound", "closed_loop"}


def test_uncontrollable_plant_fails_cleanly(tmp_path, capsys):
    cfg = toy_config(tmp_path, model={"B": [[0.0], [0.0]]})
    code, out, err = run(capsys, "synthesize", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code != 0 and out is None
    assert json.loads(err)["cause"] == "AssumptionViolated"


def test_corrupted_controller_is_parse_error(tmp_path, capsys):
    cfg, out = toy_config(tmp_path), tmp_path / "o"
    assert run(capsys, "synthesize", "--config", str(cfg), "--out", str(out))[0] == 0
    (out / "controller" / "Kc.csv").write_text("1,oops\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--out", str(out),
                       "--controller", str(out / "controller"))
    assert code == 2 and json.loads(err)["cause"] == "ConfigError"


def test_invalid_config_reports_location(tmp_path, capsys):
    cfg = toy_config(tmp_path, synthesis={"r": 0})
    code, _, err = run(capsys, "synthesize", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 2
    msg = json.loads(err)
    assert msg["cause"] == "ConfigError" and "synthesis" in msg["message"]


def test_outputs_are_deterministic(tmp_path, capsys):
    cfg = toy_config(tmp_path)
    for d in ("a", "b"):
        out = str(tmp_path / d)
        assert run(capsys, "synthesize", "--config", str(cfg), "--out", out)[0] == 0
        assert run(capsys, "simulate", "--config", str(cfg), "--out", out)[0] == 0
    for name in ("controller/G1c.csv", "controller/G2c.csv", "controller/Kc.csv",
                 "trajectory.csv", "metrics.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bundled_name_resolves(tmp_path, capsys):
    code, out, _ = run(capsys, "synthesize", "--config", "heat1d_dual",
                       "--out", str(tmp_path / "o"))
    assert code == 0 and out["dim"] == 20


def test_module_entry_point(tmp_path):
    cfg = toy_config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "regulator", "synthesize", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["dim"] == 4


def test_missing_command_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
