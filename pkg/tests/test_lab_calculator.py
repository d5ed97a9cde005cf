#!/usr/bin/env python

"""Tests for `lab_calculator` module."""

import json
from click.testing import CliRunner
import pytest
from loclab import clirunner
from loclab import lab_calculator

FAST = {"refinement": [16, 32, 64]}


def write_config(tmp_path, expect):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "system": {"name": "standard_nonrelativistic", "params": {"sites": 16}},
        "experiments": [{"kind": "matrix", "label": "matrix", "expect": expect}],
        "tolerances": FAST,
    }))
    return str(path)


@pytest.fixture()
def runner():
    return CliRunner()


def test_list(runner):
    result = runner.invoke(lab_calculator.main, ["list"])
    assert result.exit_code == 0
    for name in clirunner.SYSTEM_CATALOG:
        assert name in result.output


def test_run_writes_report(runner, tmp_path):
    config = write_config(tmp_path, {"fails": ["microcausality"]})
    out = str(tmp_path / "report.json")
    result = runner.invoke(lab_calculator.main, ["run", config, "--out", out])
    assert result.exit_code == 0
    with open(out, encoding="utf-8") as f:
        report = clirunner.parse_report(f.read())
    assert report.violations == []
    assert report.results[0]["kind"] == "matrix"


def test_run_csv_override(runner, tmp_path):
    config = write_config(tmp_path, {})
    out = str(tmp_path / "report.csv")
    result = runner.invoke(lab_calculator.main, ["run", config, "--out", out, "--format", "csv"])
    assert result.exit_code == 0
    with open(out, encoding="utf-8", newline="") as f:
        text = f.read()
    assert text.startswith("experiment,kind,system,item")
    assert text.count("\r\n") == 13


def test_run_exits_2_on_violation(runner, tmp_path):
    config = write_config(tmp_path, {"fails": ["localizability"]})
    out = str(tmp_path / "report.json")
    result = runner.invoke(lab_calculator.main, ["run", config, "--out", out])
    assert result.exit_code == 2
    with open(out, encoding="utf-8") as f:
        assert len(json.load(f)["violations"]) == 1


def test_run_exits_1_on_invalid_config(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"system": "dirac_negative"}))
    result = runner.invoke(lab_calculator.main, ["run", str(bad)])
    assert result.exit_code == 1
    config = write_config(tmp_path, {})
    result = runner.invoke(lab_calculator.main, ["run", config, "--size", "20"])
    assert result.exit_code == 1


def test_matrix_command(runner):
    result = runner.invoke(lab_calculator.main, ["matrix", "--system", "frozen", "--size", "16"])
    assert result.exit_code == 0
    assert "frozen (sharp)" in result.output
    assert "✘ covariance" in result.output


def test_archive_command(runner, tmp_path):
    out = str(tmp_path / "frozen.h5")
    result = runner.invoke(lab_calculator.main,
                           ["archive", "--system", "frozen", "--size", "16", "--out", out])
    assert result.exit_code == 0
    assert "Archived 8 operators" in result.output
    missing = runner.invoke(lab_calculator.main, ["archive", "--system", "nothing", "--out", out])
    assert missing.exit_code == 1
