import json
import subprocess
import sys

import numpy as np
import pytest

from randflight import density as dens
from randflight.cli import main, parse_grid
from randflight.errors import ConfigError
from randflight.io import read_table
from randflight.params import Model


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert np.allclose(parse_grid("0:0.9:0.3"), [0, 0.3, 0.6, 0.9])
    assert np.allclose(parse_grid("0.1:0.1:1"), [0.1])
    for bad in ("0:1", "1:0:0.1", "0:1:0", "a:b:c"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_simulate_writes_csv_and_sidecar(tmp_path, capsys):
    out = tmp_path / "x3.csv"
    args = ["simulate", "--model", "x", "--dim", "3", "--lambda", "1", "--c", "1", "--t", "1",
            "--n", "1000", "--seed", "7", "--out", str(out)]
    code, _, _ = run(args, capsys)
    assert code == 0
    header, data = read_table(out)
    assert header == ["k", "x1", "x2", "x3"] and data.shape == (1000, 4)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["seed"] == 7 and meta["config"]["n"] == 1000 and meta["argv"] == args
    assert meta["version"] and meta["toolkit"] == "randflight"
    first = out.read_bytes()
    assert run(args, capsys)[0] == 0
    assert out.read_bytes() == first


def test_simulate_fixed_k_and_workers(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["simulate", "--model", "y", "--dim", "4", "--n", "70000", "--seed", "3"]
    assert run(base + ["--out", str(a)], capsys)[0] == 0
    assert run(base + ["--workers", "3", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, text, _ = run(["simulate", "--dim", "3", "--k", "2", "--n", "5"], capsys)
    assert code == 0 and text.count("\n") == 6 and "\n2," in text


def test_config_errors(capsys):
    code, _, err = run(["simulate", "--model", "y", "--dim", "2"], capsys)
    assert code == 2 and "Second family requires dim ≥ 3" in err
    assert run(["simulate", "--model", "u3", "--dim", "4"], capsys)[0] == 2
    assert run(["simulate", "--n", "0"], capsys)[0] == 2
    assert run(["simulate", "--seed", "-1"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["pmf", "--model", "u3"], capsys)[0] == 2


def test_io_error(tmp_path, capsys):
    code, _, err = run(["simulate", "--n", "3", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 3 and "I/O" in err


def test_density_matches_closed_form(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(["density", "--model", "x", "--dim", "3", "--grid", "0:0.99:0.01", "--out", str(out)], capsys)
    assert code == 0
    header, data = read_table(out)
    assert header == ["r", "density", "radial_marginal"] and data.shape == (100, 3)
    ref = dens.closed_form_density(Model.X, 3, 1.0, 1.0, 1.0, data[:, 0])
    assert np.allclose(data[:, 1], ref, rtol=1e-15)
    assert np.allclose(data[:, 2], 4 * np.pi * data[:, 0] ** 2 * ref, rtol=1e-14)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["law"]["kind"] == "unconditional"


def test_density_grid_at_boundary(capsys):
    code, _, err = run(["density", "--dim", "3", "--grid", "0:1:0.5"], capsys)
    assert code == 2 and "ct" in err


def test_density_line_projection(capsys):
    code, text, _ = run(["density", "--model", "x", "--dim", "3", "--law", "line", "--grid", "0:0.9:0.3"], capsys)
    assert code == 0
    rows = np.array([[float(v) for v in line.split(",")] for line in text.splitlines()[1:]])
    assert np.allclose(rows[:, 1], dens.project_line(Model.X, 1, 1, 1, rows[:, 0]), rtol=1e-15)


def test_density_conditional_needs_k(capsys):
    assert run(["density", "--law", "conditional"], capsys)[0] == 2
    assert run(["density", "--law", "conditional", "--k", "2"], capsys)[0] == 0


def test_pmf(capsys):
    code, text, _ = run(["pmf", "--model", "x", "--dim", "2", "--lambda", "2", "--kmax", "4"], capsys)
    assert code == 0
    vals = [float(line.split(",")[1]) for line in text.splitlines()[1:]]
    assert vals[0] == pytest.approx(np.exp(-2.0)) and len(vals) == 5


def test_verify_hyperbessel_even_dim(capsys):
    code, text, _ = run(["verify", "--suite", "hyperbessel", "--dim", "4"], capsys)
    report = json.loads(text)
    assert code == 0 and report["passed"]
    names = [c["name"] for c in report["checks"]]
    assert "even_source_zero[4]" in names and "eigen[x4]" in names


def test_verify_mc_u3(tmp_path, capsys):
    out = tmp_path / "mc.json"
    code, _, _ = run(["verify", "--suite", "mc", "--model", "u3", "--dim", "3", "--n", "100000", "--out", str(out)], capsys)
    report = json.loads(out.read_text())
    assert code == 0
    chi = next(c for c in report["checks"] if c["name"] == "u3_radial_chi2")
    assert chi["bins"] == 32 and chi["dof"] == 31 and chi["pvalue"] >= 0.01


def test_verify_pde_alias(capsys):
    code, text, _ = run(["verify", "--suite", "pde", "--which", "xte"], capsys)
    report = json.loads(text)
    assert code == 0
    assert report["checks"][0]["name"] == "telegraph_u3"
    rep = report["checks"][0]["report"]
    for key in ("equation_id", "params", "h", "residual_max", "residual_rms", "residual_max_half",
                "order_estimate", "passed", "negative_control_ratio"):
        assert key in rep


def test_verify_failure_exit_code(capsys):
    # An impossible tolerance makes the counts suite fail.
    code, text, _ = run(["verify", "--suite", "counts", "--tol", "0"], capsys)
    assert code == 1 and json.loads(text)["passed"] is False


def test_verify_unknown_pde(capsys):
    assert run(["verify", "--suite", "pde", "--which", "nope"], capsys)[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "randflight.cli", "pmf", "--dim", "3", "--kmax", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("k,pmf")
