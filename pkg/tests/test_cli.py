import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pvtau.cli import main
from pvtau.io import TRAJECTORY_COLUMNS, parse_config, read_trajectory_csv

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def load(name):
    return json.loads((CONFIGS / name).read_text())


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_json(p):
    return json.loads(Path(p).read_text())


def test_simulate_stationary(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(CONFIGS / "stationary.json"), "--out", str(out)]) == 0
    rep = read_json(out / "report.json")
    assert rep["status"] == "completed"
    assert abs(rep["final_lntau"][0] - (np.log(2) / 30 + 0.1)) < 1e-10
    with open(out / "trajectory.csv", newline="") as fh:
        lines = fh.read().split("\n")
    assert lines[0].startswith("# pvtau ")
    assert lines[1].split(",") == TRAJECTORY_COLUMNS
    last = dict(zip(TRAJECTORY_COLUMNS, lines[-2].split(",")))
    assert abs(float(last["lntau_re"]) - 0.1231049) < 1e-7


def test_simulate_reference_report(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(CONFIGS / "reference.json"), "--out", str(out)]) == 0
    rep = read_json(out / "report.json")
    assert rep["schema"] == "pvtau.report/1"
    assert max(rep["invariant_drift"].values()) < 1e-8
    traj = read_trajectory_csv(out / "trajectory.csv")
    assert len(traj["t_re"]) == 1001 and traj["t_re"][-1] == 2.0


def test_invalid_theta_exit_code(tmp_path):
    cfg = load("stationary.json")
    cfg["theta"][0] = [1.0, 0.0]
    out = tmp_path / "out"
    assert main(["simulate", "--config", write(tmp_path, cfg), "--out", str(out)]) == 1
    assert read_json(out / "report.json")["error"]["code"] == "INVALID_THETA"


def test_path_through_origin_exit_code(tmp_path):
    cfg = load("reference.json")
    cfg["path"] = [[1.0, 0.0], [0.0, 0.0], [2.0, 0.0]]
    out = tmp_path / "out"
    assert main(["simulate", "--config", write(tmp_path, cfg), "--out", str(out)]) == 1
    assert read_json(out / "report.json")["error"]["code"] == "PATH_THROUGH_ORIGIN"


@pytest.mark.parametrize(
    "mutate,code",
    [
        (lambda c: c.pop("theta"), "CONFIG_ERROR"),
        (lambda c: c["initial"].update(b=[0.0, 0.0]), "ZERO_GAUGE_PARAMETER"),
        (lambda c: c["initial"].update(B0=[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]), "CONFIG_ERROR"),
        (lambda c: c["integrator"].update(foo=1), "CONFIG_ERROR"),
    ],
)
def test_config_errors_are_coded(tmp_path, mutate, code):
    cfg = load("reference.json")
    mutate(cfg)
    out = tmp_path / "out"
    assert main(["simulate", "--config", write(tmp_path, cfg), "--out", str(out)]) == 1
    assert read_json(out / "report.json")["error"]["code"] == code


def test_missing_config(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 1
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1


def test_simulate_blowup_exit_code(tmp_path):
    cfg = load("reference.json")
    cfg["path"] = [[1.0, 0.0], [4.7671, 3.8847]]
    cfg["integrator"] = {"rtol": 1e-10, "atol": 1e-12, "max_step": 0.05, "dense_spacing": None}
    out = tmp_path / "out"
    assert main(["simulate", "--config", write(tmp_path, cfg), "--out", str(out)]) == 2
    rep = read_json(out / "report.json")
    assert rep["status"] == "blowup"
    t_star = complex(*rep["blowup_events"][0]["t_star"])
    assert abs(t_star - (4.6282 + 3.7410j)) < 1e-3
    assert rep["zero_certificates"][0]["status"] == "certified"


def test_verify_passes(tmp_path):
    cfg = load("reference.json")
    cfg["verify"] = {"n_states": 200}
    out = tmp_path / "out"
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(out), "--seed", "7"]) == 0
    rep = read_json(out / "verify.json")
    assert rep["failed"] == [] and rep["seed"] == 7
    assert all(v < 1e-12 for v in rep["max_deviation"].values())


def test_verify_broken_rhs(tmp_path):
    cfg = load("reference.json")
    cfg["verify"] = {"n_states": 20}
    out = tmp_path / "out"
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(out), "--break-rhs"]) == 3
    assert read_json(out / "verify.json")["failed"] == ["ZERO_CURVATURE"]


def test_verify_zero_states(tmp_path):
    cfg = load("reference.json")
    cfg["verify"] = {"n_states": 0}
    out = tmp_path / "out"
    assert main(["verify", "--config", write(tmp_path, cfg), "--out", str(out)]) == 1
    assert read_json(out / "verify.json")["error"]["code"] == "CONFIG_ERROR"


def test_identities(tmp_path):
    out = tmp_path / "out"
    assert main(["identities", "--config", str(CONFIGS / "reference.json"), "--out", str(out)]) == 0
    rep = read_json(out / "identities.json")
    assert rep["values"]["u"] == [-350 / 93, 0.0]


def test_monodromy_command(tmp_path):
    out = tmp_path / "out"
    assert main(["monodromy", "--config", str(CONFIGS / "reference.json"), "--out", str(out)]) == 0
    rep = read_json(out / "monodromy.json")
    assert rep["certified"] and rep["isomonodromy_drift"] < 1e-6
    assert "Stokes" in rep["caveat"]
    assert len(rep["samples"]) == 5


def test_tau_zeros_command(tmp_path):
    out = tmp_path / "out"
    assert main(["tau-zeros", "--config", str(CONFIGS / "theta_point.json"), "--out", str(out)]) == 0
    z = read_json(out / "tau_zeros.json")["zeros"][0]
    assert z["status"] == "certified"
    assert abs(complex(*z["slope"]) - 1) < 0.05


def test_outputs_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["simulate", "--config", str(CONFIGS / "reference.json"), "--out", str(out)]) == 0
        outs.append(out)
    for name in ("trajectory.csv", "pv_residual.csv", "report.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_rtol_flag_and_env_override(tmp_path, monkeypatch):
    cfg = write(tmp_path, load("stationary.json"))
    monkeypatch.setenv("PVTAU_RTOL", "1e-6")
    monkeypatch.setenv("PVTAU_OUT", str(tmp_path / "envout"))
    assert main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "report.json").exists()
    # explicit flags beat the environment
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "flag"), "--rtol", "1e-9"]) == 0
    assert (tmp_path / "flag" / "report.json").exists()


def test_overrides_reach_integrator():
    rc = parse_config(load("reference.json"), {"rtol": 1e-7, "atol": None})
    assert rc.integrator.rtol == 1e-7 and rc.integrator.atol == 1e-12


def test_console_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "pvtau.cli", "identities", "--config", str(CONFIGS / "reference.json"),
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
