from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from mile.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from mile.dyn_panel import simulate_dyn
from mile.iv_model import ThetaIV, simulate_iv


@pytest.fixture
def panel_csv(tmp_path):
    y = simulate_dyn(400, 5, 0.5, 1.0, lambda g, n: 2 * g.standard_normal(n), rng=np.random.default_rng(1)).Y
    p = tmp_path / "panel.csv"
    lines = ["i,t,y"] + [f"{i + 1},{t + 1},{float(y[i, t])!r}" for i in range(400) for t in range(5)]
    p.write_text("\n".join(lines) + "\n")
    return p


@pytest.fixture
def iv_csv(tmp_path):
    rng = np.random.default_rng(2)
    z = rng.standard_normal((600, 3))
    d = simulate_iv(ThetaIV(0.5, 1.0), [[1, 0.3], [0.3, 1]], z, rng)
    p = tmp_path / "iv.csv"
    rows = ["y1,y2,z_1,z_2,z_3"] + [",".join(repr(float(v)) for v in (d.y1[i], d.y2[i], *z[i])) for i in range(600)]
    p.write_text("\n".join(rows) + "\n")
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate_dyn(panel_csv, capsys):
    code, out, _ = run(["estimate", "--model", "dyn", "--input", panel_csv], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["model"] == "dyn" and abs(rep["params"]["rho"] - 0.5) < 0.06
    assert set(rep["std_errors"]) == {"rho", "sigma2", "lam"}


def test_estimate_static_and_output_file(panel_csv, tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _, _ = run(["estimate", "--model", "static", "--input", panel_csv, "--output", out], capsys)
    assert code == EXIT_OK and json.loads(out.read_text())["model"] == "static"


def test_iv_needs_sigma(iv_csv, capsys):
    code, _, err = run(["estimate", "--model", "iv", "--input", iv_csv], capsys)
    assert code == EXIT_USAGE and "sigma" in err


def test_iv_with_sidecar(iv_csv, capsys):
    iv_csv.with_suffix(".json").write_text(json.dumps({"sigma": [[1, 0.3], [0.3, 1]]}))
    code, out, _ = run(["estimate", "--model", "iv", "--input", iv_csv], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert abs(rep["params"]["beta"] - 0.5) < 0.2 and "beta" in rep["std_errors"]


def test_rank_model(tmp_path, capsys):
    rng = np.random.default_rng(3)
    x = rng.standard_normal((100, 3))
    y = x + rng.standard_normal((100, 3))
    rows = ["i,t,y,x_1"] + [f"{i},{t},{float(y[i, t])!r},{float(x[i, t])!r}" for i in range(100) for t in range(3)]
    p = tmp_path / "rank.csv"
    p.write_text("\n".join(rows) + "\n")
    code, out, _ = run(["estimate", "--model", "rank", "--input", p, "--draws", 200, "--seed", 1], capsys)
    assert code == EXIT_OK and json.loads(out)["params"]["beta"][0] > 0


def test_missing_file(capsys):
    code, _, err = run(["estimate", "--model", "dyn", "--input", "/nonexistent.csv"], capsys)
    assert code == EXIT_USAGE and "no such file" in err


@pytest.mark.parametrize("body,where", [
    ("i,t,y\n1,1,0.5\n1,2,abc\n", ":3:"),
    ("i,t,y\n1,1,0.5\n1,2\n", ":3:"),
    ("i,t,q\n1,1,0.5\n", ":1:"),
    ("i,t,y\n1,1,0.5\n1,1,0.7\n", ":3:"),
])
def test_parse_errors_are_line_numbered(tmp_path, capsys, body, where):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    code, _, err = run(["estimate", "--model", "dyn", "--input", p], capsys)
    assert code == EXIT_USAGE and where in err


def test_unbalanced_panel(tmp_path, capsys):
    p = tmp_path / "u.csv"
    p.write_text("i,t,y\n1,1,0.5\n1,2,0.1\n2,1,0.3\n")
    code, _, err = run(["estimate", "--model", "dyn", "--input", p], capsys)
    assert code == EXIT_USAGE and "unbalanced" in err


def test_estimation_failure_exit_code(tmp_path, capsys):
    p = tmp_path / "c.csv"
    rng = np.random.default_rng(0)
    rows = ["i,t,y,x_1"] + [f"{i},{t},{float(rng.standard_normal())!r},1.0" for i in range(20) for t in range(3)]
    p.write_text("\n".join(rows) + "\n")
    code, _, _ = run(["estimate", "--model", "rank", "--input", p, "--draws", 10], capsys)
    assert code == EXIT_NUMERIC


def test_simulate_deterministic(tmp_path, capsys):
    args = ["simulate", "--design", "table1", "--reps", 3, "--N", 10, "--T", 2, 3]
    code1, out1, _ = run(args, capsys)
    code2, out2, _ = run(args + ["--threads", 2], capsys)
    assert code1 == code2 == EXIT_OK and out1 == out2
    assert out1.splitlines()[1].startswith("2,10,")


def test_simulate_markdown_and_design_file(tmp_path, capsys):
    d = tmp_path / "d.json"
    d.write_text(json.dumps({"rho_star": -0.5, "N": [10], "T": [3], "reps": 2, "seed": 1,
                             "estimators": ["mile", "bcols"]}))
    code, out, _ = run(["simulate", "--design", d, "--format", "markdown"], capsys)
    assert code == EXIT_OK and out.startswith("| T | N | mean_mile")


@pytest.mark.parametrize("extra", [["--reps", "0"], ["--design", "nope.json"]])
def test_simulate_usage_errors(capsys, extra):
    argv = ["simulate", "--design", "table1"] + extra
    code, _, _ = run(argv, capsys)
    assert code == EXIT_USAGE


def test_invalid_design_json(tmp_path, capsys):
    d = tmp_path / "d.json"
    d.write_text("{not json")
    assert run(["simulate", "--design", d], capsys)[0] == EXIT_USAGE


def test_bad_arguments(capsys):
    assert run(["estimate", "--model", "nope", "--input", "x"], capsys)[0] == EXIT_USAGE
    assert run([], capsys)[0] == EXIT_USAGE


def test_check_command(capsys):
    code, out, _ = run(["check"], capsys)
    assert code == EXIT_OK
    assert out.count("PASS") >= 10 and "FAIL" not in out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mile", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "estimate" in out.stdout
