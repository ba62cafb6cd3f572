"""Command line entry points and their exit codes."""

import json
from fractions import Fraction

import pytest

from src.harness.cli import main, parse_alphas
from src.model import ParameterError


def test_parse_alphas():
    assert parse_alphas("5/3, 1.25,") == [Fraction(5, 3), Fraction(5, 4)]
    with pytest.raises(ParameterError):
        parse_alphas("five")
    with pytest.raises(ParameterError):
        parse_alphas(" , ")


def test_exponents_command(capsys):
    assert main(["exponents", "--alpha", "5/3,1.3"]) == 0
    out = capsys.readouterr().out
    assert "5/3" in out
    assert "13/10" in out


def test_exponents_rejects_bad_alpha(capsys):
    assert main(["exponents", "--alpha", "1"]) == 2
    assert "❌" in capsys.readouterr().out


def test_check_command(scenario_dir, tmp_path, capsys):
    assert main(["check", str(scenario_dir / "sweep_memristor_1d.json")]) == 0
    assert "Config valid" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "mesh": {"lengths": [1.0], "counts": [8]}}), encoding="utf-8")
    assert main(["check", str(bad)]) == 2
    assert main(["check", str(tmp_path / "missing.json")]) == 2


def test_converge_command(scenario_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MEMDRIFT_OUTPUT_ROOT", str(tmp_path))
    assert main(["converge", str(scenario_dir / "converge_poisson_1d.json"), "--levels", "2"]) == 0
    assert (tmp_path / "runs" / "converge_poisson_1d" / "convergence.csv").exists()
    assert "poisson-manufactured" in capsys.readouterr().out


def test_run_command(relax_data, tmp_path, capsys):
    relax_data["stepper"]["t_end"] = 0.002
    relax_data["output"] = {"directory": str(tmp_path / "out")}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(relax_data), encoding="utf-8")
    assert main(["run", str(path)]) == 0
    assert "✓ small-relax" in capsys.readouterr().out
    assert (tmp_path / "out" / "summary.txt").exists()
