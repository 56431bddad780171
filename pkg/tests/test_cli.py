import filecmp
import json
import os
import subprocess
import sys

import pytest

BASE = [sys.executable, "-m", "polycap"]


def run_cli(args, cwd):
    return subprocess.run(BASE + args, cwd=cwd, capture_output=True, text=True)


def test_cusp_subcommand_and_exit_codes(tmp_path):
    r = run_cli(["cusp", "--kind", "power", "--p", "2", "--m", "2", "--n", "6",
                 "--out", "o1"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "o1" / "summary.json") as fh:
        data = json.load(fh)
    assert data["verdict"] == "irregular"
    # borderline dimension: unsupported regime code
    r = run_cli(["cusp", "--kind", "power", "--p", "2", "--m", "1", "--n", "2",
                 "--out", "o2"], tmp_path)
    assert r.returncode == 3
    # malformed configuration
    r = run_cli(["capacity", "--preset", "laplacian", "--n", "3", "--out", "o3"],
                tmp_path)
    assert r.returncode == 2


def test_capacity_run_and_manifest_rerun_bitwise(tmp_path):
    args = ["capacity", "--preset", "laplacian", "--n", "3", "--ball", "1.0",
            "--h", "0.25", "--box", "3.0", "--out", "runA"]
    assert run_cli(args, tmp_path).returncode == 0
    r = run_cli(["--config", str(tmp_path / "runA" / "manifest.json"),
                 "capacity", "--out", "runB"], tmp_path)
    assert r.returncode == 0
    assert filecmp.cmp(tmp_path / "runA" / "summary.json",
                       tmp_path / "runB" / "summary.json", shallow=False)


def test_positivity_subcommand_violated_with_witness(tmp_path):
    r = run_cli(["positivity", "--m", "2", "--n", "8", "--out", "pos"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "pos" / "summary.json") as fh:
        data = json.load(fh)
    assert data["status"] == "violated"
    assert os.path.exists(tmp_path / "pos" / "witness.csv")


def test_wiener_subcommand(tmp_path):
    r = run_cli(["wiener", "--m", "1", "--n", "3", "--domain", "cone:45",
                 "--j-max", "7", "--nodes-per-rho", "8", "--out", "w"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "w" / "summary.json") as fh:
        assert json.load(fh)["classification"] == "regular"
    assert os.path.exists(tmp_path / "w" / "series.csv")


def test_symbol_check_with_operator_file(tmp_path):
    from polycap import mn8_operator, save_operator

    path = tmp_path / "op.json"
    save_operator(mn8_operator(), path)
    r = run_cli(["symbol-check", "--operator-file", str(path), "--out", "s"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "s" / "summary.json") as fh:
        data = json.load(fh)
    assert data["elliptic"] is True and data["n"] == 8


def test_dirichlet_subcommand(tmp_path):
    r = run_cli(["dirichlet", "--preset", "laplacian", "--n", "2", "--h", "0.1",
                 "--extent", "10", "--out", "d"], tmp_path)
    assert r.returncode == 0
    assert os.path.exists(tmp_path / "d" / "solution.csv")


def test_fundsol_subcommand(tmp_path):
    r = run_cli(["fundsol", "--preset", "laplacian", "--n", "3", "--resolution", "64",
                 "--out", "f"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "f" / "summary.json") as fh:
        data = json.load(fh)
    assert data["sign_summary"]["fraction_negative"] == 0.0
    assert os.path.exists(tmp_path / "f" / "profile.csv")


def test_potential_subcommand(tmp_path):
    r = run_cli(["potential", "--preset", "laplacian", "--n", "3", "--ball", "1.0",
                 "--h", "0.25", "--box", "2.5", "--checks", "range,lower",
                 "--out", "p"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "p" / "summary.json") as fh:
        data = json.load(fh)
    assert data["range_check"]["passed"] is True
    assert os.path.exists(tmp_path / "p" / "potential.csv")


def test_decay_subcommand(tmp_path):
    r = run_cli(["decay", "--preset", "laplacian", "--n", "3", "--domain", "cone:45",
                 "--inv-h", "16", "--out", "dc"], tmp_path)
    assert r.returncode == 0
    with open(tmp_path / "dc" / "summary.json") as fh:
        assert json.load(fh)["c2"] > 0.0


def test_wiener_require_verdict_inconclusive_exit4(tmp_path):
    # a power cusp in the log-divergent regime stays inconclusive at desk scale
    r = run_cli(["wiener", "--m", "1", "--n", "3", "--domain", "cusp:power:2",
                 "--j-max", "8", "--nodes-per-rho", "16", "--require-verdict",
                 "--out", "wi"], tmp_path)
    assert r.returncode == 4
