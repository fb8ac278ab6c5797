"""Fixtures that produce real torusmut output files.

The plots package consumes the simulator only through its files, so the
fixtures shell out to the torusmut CLI and hand back directories of
samples.csv / report.json / cdf.csv / events.csv / meta.json.
"""

import json
import subprocess
import sys

import pytest


def run_torusmut(args, ok_codes=(0,)):
    proc = subprocess.run([sys.executable, "-m", "torusmut.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode in ok_codes, (
        f"torusmut {args[0]} exited {proc.returncode}:\n"
        f"{proc.stdout}\n{proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def exp_limit_dir(tmp_path_factory):
    """Validation outputs for a two-type model against the Exp(1) law,
    plus a matching limit-CDF grid (the overlay's three inputs)."""
    out = tmp_path_factory.mktemp("exp_limit")
    cfg = {
        "model": {"d": 1, "L": 10000.0, "alpha": 10000.0,
                  "mu": [0.01, 100.0]},
        "family": {"a": ["-1/2", "1/2"], "b": 1},
        "run": {"replicates": 300, "master_seed": 424242},
        "targets": [{"kind": "sigma_k_law"}],
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    # statistical verdict may be pass or fail; the files are written either way
    run_torusmut(["validate", "--config", str(cfg_path),
                  "--output-dir", str(out)], ok_codes=(0, 1))
    run_torusmut(["cdf", "--law", "exp1", "--grid", "0:6:200",
                  "--out", str(out / "cdf.csv")])
    return out


@pytest.fixture(scope="session")
def volume_report_dir(tmp_path_factory):
    """Validation report with a volume_diag target (ratio rows + band)."""
    out = tmp_path_factory.mktemp("volume_report")
    cfg = {
        "model": {"d": 1, "L": 1000000.0, "alpha": 1.0,
                  "mu": [0.0001, 0.0001]},
        "run": {"replicates": 30, "master_seed": 77},
        "targets": [{"kind": "volume_diag", "times": [2.3208, 4.6416],
                     "level": 1, "replicates": 30, "band": [0.8, 1.2]}],
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    run_torusmut(["validate", "--config", str(cfg_path),
                  "--output-dir", str(out)], ok_codes=(0, 1))
    return out


@pytest.fixture(scope="session")
def planar_events_dir(tmp_path_factory):
    """simulate --events output for a two-dimensional model."""
    out = tmp_path_factory.mktemp("planar_events")
    cfg = {
        "model": {"d": 2, "L": 30.0, "alpha": 1.0, "mu": [0.002, 0.002]},
        "run": {"replicates": 3, "master_seed": 99},
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    run_torusmut(["simulate", "--config", str(cfg_path), "--events",
                  "--output-dir", str(out)])
    return out


@pytest.fixture(scope="session")
def line_events_dir(tmp_path_factory):
    """simulate --events output for a one-dimensional model."""
    out = tmp_path_factory.mktemp("line_events")
    cfg = {
        "model": {"d": 1, "L": 500.0, "alpha": 1.0, "mu": [0.002, 0.02]},
        "run": {"replicates": 2, "master_seed": 31},
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    run_torusmut(["simulate", "--config", str(cfg_path), "--events",
                  "--output-dir", str(out)])
    return out
