"""Command-line interface: exit codes, JSON payloads, error envelopes."""

import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from conftest import (
    LAX_C,
    LAX_LAMBDAS,
    LAX_MU,
    LAX_X0,
    NONNORMAL_C,
    random_simple_pole_system,
    schlesinger_pair,
    t_over_x_system,
    upper_triangular_system,
)
from parmono.cli import main
from parmono.expr import const, param
from parmono.halphen import HalphenRun
from parmono.jsonutil import dump_json
from parmono.sysmodel import ParamRationalMatrix, PoleLocus


@pytest.fixture()
def out_json(capsys):
    """Run main(argv) and return (exit_code, parsed stdout JSON)."""

    def run(argv):
        code = main(argv)
        captured = capsys.readouterr()
        payload = json.loads(captured.out) if captured.out.strip() else None
        return code, payload

    return run


@pytest.fixture()
def err_envelope(capsys):
    """Run main(argv) expecting a hard failure; return (code, envelope)."""

    def run(argv):
        code = main(argv)
        captured = capsys.readouterr()
        return code, json.loads(captured.err.strip().splitlines()[-1])

    return run


def _twist_family():
    C = np.array(NONNORMAL_C)
    res = tuple(
        tuple(const(C[a, b]) + param(1) if a == b else const(C[a, b])
              for b in range(2))
        for a in range(2))
    return ParamRationalMatrix(2, 1, (PoleLocus(const(0.0), (res,)),), ())


def _write_system(tmp_path, A, name="system.json"):
    path = tmp_path / name
    A.dump(path)
    return str(path)


def test_monodromy_stdout_matches_exponential(tmp_path, out_json):
    path = _write_system(tmp_path, t_over_x_system())
    code, payload = out_json(["monodromy", "--system", path,
                              "--grid", "0.2:0.4:3", "--base", "1",
                              "--jobs", "1"])
    assert code == 0
    assert payload["manifest"]["tool"] == "parmono monodromy"
    assert payload["manifest"]["options"]["grid"] == "0.2:0.4:3"
    records = payload["records"]
    assert len(records) == 3
    for rec, t in zip(records, (0.2, 0.3, 0.4)):
        assert abs(complex(*rec["t"][0]) - t) < 1e-12
        m00 = complex(*rec["M"][0][0])
        assert abs(m00 - np.exp(2j * np.pi * t)) < 1e-8


def test_monodromy_partial_failure_exit_2(tmp_path, out_json):
    A = ParamRationalMatrix(
        1, 1,
        (PoleLocus(param(1), ((((const(1.0),),),))),
         PoleLocus(const(1.0), ((((const(-1.0),),),)))),
        ())
    sys_path = _write_system(tmp_path, A)
    grid_path = tmp_path / "grid.json"
    dump_json({"points": [0.25, 1.0]}, grid_path)
    out_path = tmp_path / "records.json"
    code, _ = out_json(["monodromy", "--system", sys_path,
                        "--grid", str(grid_path), "--base", "2i",
                        "--loops", "0", "--jobs", "1",
                        "--out", str(out_path)])
    assert code == 2
    payload = json.loads(out_path.read_text())
    cells = payload["records"]
    assert cells[0].get("error") is None and cells[0]["M"] is not None
    assert cells[1]["M"] is None
    assert cells[1]["error"] in ("POLE_COLLISION", "POLE_MIGRATION")


def test_classify_projective_with_split(tmp_path, out_json):
    path = _write_system(tmp_path, _twist_family())
    argv = ["classify", "--system", path, "--grid", "0:0.2:5",
            "--base", "1", "--jobs", "1"]
    code, payload = out_json(argv)
    assert code == 0
    assert payload["verdict"] == "projectively_isomonodromic"
    assert payload["split_check"]["traceless_verdict"] == "isomonodromic"
    assert payload["split_check"]["max_drift"] < 1e-6
    code2, payload2 = out_json(argv + ["--no-split"])
    assert code2 == 0
    assert "split_check" not in payload2


def test_integrable_verdicts(tmp_path, out_json, err_envelope):
    conn = schlesinger_pair(np.array(NONNORMAL_C))
    good = tmp_path / "conn.json"
    dump_json({"A_x": conn.a_x.to_dict(),
               "A_t": [conn.a_t[0].to_dict()]}, good)
    code, payload = out_json(["integrable", "--system", str(good),
                              "--samples", "20"])
    assert code == 0
    assert payload["verdict"] == "integrable"
    assert payload["max_residual"] < 1e-12
    assert payload["pairs"][0]["directions"] == [0, 1]

    bad = tmp_path / "nodir.json"
    dump_json({"A_x": conn.a_x.to_dict(), "A_t": []}, bad)
    code, env = err_envelope(["integrable", "--system", str(bad)])
    assert code == 1
    assert env["error"] == "MISSING_DIRECTION"


def test_frobenius_output_and_resonance(tmp_path, out_json, err_envelope):
    A = random_simple_pole_system(2, seed=5)
    path = _write_system(tmp_path, A)
    code, payload = out_json(["frobenius", "--system", path,
                              "--pole", "0", "--order", "12"])
    assert code == 0
    assert payload["diagnostic"]["order"] == 12
    assert payload["diagnostic"]["slope"] > 11.0
    assert len(payload["series"]) == 13
    assert payload["location"] == [0.0, 0.0]

    res_path = _write_system(tmp_path, upper_triangular_system(), "res.json")
    code, env = err_envelope(["frobenius", "--system", res_path, "--pole", "0"])
    assert code == 1
    assert env["error"] == "RESONANT_SPECTRUM"


def test_halphen_lax_run_with_csv(tmp_path, out_json):
    run = HalphenRun(variant="HII_flow", t0=0.0, t_end=0.35, initial=LAX_X0,
                     checkpoints=3, mu=LAX_MU, lambdas=LAX_LAMBDAS,
                     C=np.array(LAX_C, dtype=complex))
    cfg = tmp_path / "lax.json"
    dump_json(run.to_dict(), cfg)
    out_path = tmp_path / "lax_out.json"
    code, _ = out_json(["halphen", "--config", str(cfg),
                        "--out", str(out_path), "--rows", "21"])
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["verdict"] == "evolution_law_verified"
    assert payload["max_residual"] < 1e-6
    assert len(payload["loops"][0]["c_samples"]) == 3
    csv_path = tmp_path / "lax_out.csv"
    assert payload["trajectory_csv"] == str(csv_path)
    with open(csv_path, newline="") as fp:
        rows = list(csv.reader(fp))
    assert len(rows) == 22
    assert "c1_re" in rows[0]


def test_halphen_plain_flow_summary(tmp_path, out_json):
    cfg = tmp_path / "dhv.json"
    dump_json({"variant": "DHV", "t_end": 1.0,
               "initial": {"w1": 0.8, "w2": 0.8, "w3": 0.8,
                           "theta": 0.0, "phi": 0.0}}, cfg)
    csv_path = tmp_path / "dhv.csv"
    code, payload = out_json(["halphen", "--config", str(cfg),
                              "--csv", str(csv_path), "--rows", "11"])
    assert code == 0
    assert payload["variant"] == "DHV"
    final = complex(*payload["final_state"][0])
    assert abs(final - 0.8 / (1 + 0.8)) < 1e-8
    with open(csv_path, newline="") as fp:
        rows = list(csv.reader(fp))
    assert rows[0][3] == "w1_re" and "beta1_re" not in rows[0]


def test_halphen_config_errors(tmp_path, err_envelope):
    cfg = tmp_path / "bad.json"
    dump_json({"variant": "HII_flow", "t_end": 0.3,
               "initial": [0.0, 1.0, [0.0, 1.0]],
               "mu": 1.0, "lambdas": [0.5, 0.0, 0.0],
               "C": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]},
              cfg)
    code, env = err_envelope(["halphen", "--config", str(cfg)])
    assert code == 1
    assert env["error"] == "CONFIG_INVALID"
    code, env = err_envelope(["halphen", "--config",
                              str(tmp_path / "missing.json")])
    assert code == 1
    assert env["error"] == "FILE_NOT_FOUND"


def test_missing_input_file_envelope(err_envelope, tmp_path):
    code, env = err_envelope(["monodromy", "--system",
                              str(tmp_path / "nope.json"),
                              "--grid", "0:1:2", "--base", "1", "--jobs", "1"])
    assert code == 1
    assert env["error"] == "FILE_NOT_FOUND"


def test_jobs_env_fallback(tmp_path, out_json, err_envelope, monkeypatch):
    path = _write_system(tmp_path, t_over_x_system())
    argv = ["monodromy", "--system", path, "--grid", "0.2:0.3:2",
            "--base", "1"]
    monkeypatch.setenv("PARMONO_JOBS", "2")
    code, payload = out_json(argv)
    assert code == 0
    assert payload["manifest"]["options"]["jobs"] == 2
    monkeypatch.setenv("PARMONO_JOBS", "many")
    code, env = err_envelope(argv)
    assert code == 1
    assert env["error"] == "CONFIG_INVALID"


def test_deterministic_output_modulo_wallclock(tmp_path):
    path = _write_system(tmp_path, _twist_family())
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(["classify", "--system", path, "--grid", "0:0.2:5",
                     "--base", "1", "--jobs", "1", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        payload["manifest"].pop("wallclock_utc")
        payload["manifest"]["options"].pop("out")
        outs.append(json.dumps(payload, sort_keys=True))
    assert outs[0] == outs[1]


def test_argparse_behaviour():
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    with pytest.raises(SystemExit) as info:
        main(["monodromy"])  # missing required arguments
    assert info.value.code == 2


def test_console_script_with_python_backend(tmp_path):
    exe = shutil.which("parmono")
    assert exe, "console script should be installed"
    path = _write_system(tmp_path, t_over_x_system())
    proc = subprocess.run(
        [exe, "monodromy", "--system", path, "--grid", "0.25:0.25:1",
         "--base", "1", "--jobs", "1"],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin:/usr/local/bin", "PARMONO_BACKEND": "python"})
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    m00 = complex(*payload["records"][0]["M"][0][0])
    assert abs(m00 - np.exp(0.5j * np.pi)) < 1e-8
