"""Scenario files: validation, defaults, error reporting and problem building."""

import json

import numpy as np
import pytest

from src.harness import build_problem, dump_config, load_config, parse_config, resolve_output_dir
from src.harness.config import SweepConfig
from src.model import ConfigurationError, DataError


def test_bundled_scenarios_load(scenario_dir):
    paths = sorted(scenario_dir.glob("*.json"))
    assert len(paths) >= 6
    for path in paths:
        config = load_config(path)
        if config.kind != "convergence":
            problem = build_problem(config)
            assert problem.mesh.num_cells == int(np.prod(config.mesh.counts))


def test_dump_and_reload_round_trip(relax_data):
    config = parse_config(relax_data)
    again = parse_config(json.loads(dump_config(config)))
    assert again == config
    assert dump_config(again) == dump_config(config)


def test_defaults_are_filled(relax_data):
    config = parse_config(relax_data)
    assert config.stepper.mobility == "arithmetic"
    assert config.stepper.max_damping_halvings == 30
    assert config.monitors.d_mass.enabled
    assert not config.monitors.energy_decay.enabled
    assert config.output.gradient_norm_exponent == 3.0
    assert config.model.cutoff_k is None


def test_exponent_error_names_the_key(relax_data):
    relax_data["model"]["alpha_n"] = 1.0
    with pytest.raises(ConfigurationError, match="must exceed 1") as info:
        parse_config(relax_data, source="bad.json")
    assert info.value.key == "model.alpha_n"
    assert str(info.value).startswith("bad.json: model.alpha_n:")


def test_unknown_key_is_rejected(relax_data):
    relax_data["model"]["alpha_q"] = 1.5
    with pytest.raises(ConfigurationError, match="model.alpha_q"):
        parse_config(relax_data)


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  "kind": \n}\n', encoding="utf-8")
    with pytest.raises(ConfigurationError, match=r"broken\.json:4:1:"):
        load_config(path)
    with pytest.raises(ConfigurationError, match="not found"):
        load_config(tmp_path / "missing.json")


@pytest.mark.parametrize(
    "patch, match",
    [
        ({"kind": "sweep"}, "requires a sweep section"),
        ({"kind": "convergence"}, "requires a convergence section"),
        ({"kind": "insulated-energy-test"}, "requires no contacts"),
        ({"mesh": {"dim": 2, "lengths": [1.0], "counts": [4]}}, "2 entries"),
        ({"sweep": {"schedule": [[0.0, 0.0], [1.0, 1.0]], "contact": "top"}}, "not a contact"),
    ],
)
def test_section_consistency(relax_data, patch, match):
    relax_data.update(patch)
    with pytest.raises(ConfigurationError, match=match):
        parse_config(relax_data)


def test_sweep_schedule():
    sweep = SweepConfig(schedule=[(0.0, 0.0), (0.25, 1.0), (0.5, 0.0), (0.75, -1.0), (1.0, 0.0)])
    assert sweep.multiplier(0.125) == pytest.approx(0.5)
    assert sweep.multiplier(0.625) == pytest.approx(-0.5)
    assert sweep.multiplier(2.0) == 0.0
    with pytest.raises(ValueError):
        SweepConfig(schedule=[(0.0, 0.0), (0.0, 1.0)])


def test_build_problem(relax_data):
    relax_data["sweep"] = {"schedule": [[0.0, 0.5], [1.0, 1.0]]}
    problem = build_problem(parse_config(relax_data))
    assert set(problem.bc.contacts) == {"left", "right"}
    assert problem.bc.bias == 0.5
    np.testing.assert_allclose(problem.state.d[:6], 1.0)
    np.testing.assert_allclose(problem.state.d[7:], 0.2)
    assert problem.stepper.newton_tol == 1e-11


def test_table_profile_size_is_checked(relax_data):
    relax_data["initial"]["d"] = {"kind": "table", "values": [1.0, 2.0, 3.0]}
    with pytest.raises(DataError, match="3 values for 16 cells"):
        build_problem(parse_config(relax_data))


def test_partial_contact_segments(scenario_dir):
    problem = build_problem(load_config(scenario_dir / "relax_partial_contacts_2d.json"))
    assert "anode" in problem.mesh.segment_names
    assert problem.mesh.has_segment("left")


def test_output_root_from_environment(relax_data, monkeypatch, tmp_path):
    config = parse_config(relax_data)
    monkeypatch.delenv("MEMDRIFT_OUTPUT_ROOT", raising=False)
    assert str(resolve_output_dir(config)) == "runs/scenario"
    monkeypatch.setenv("MEMDRIFT_OUTPUT_ROOT", str(tmp_path))
    assert resolve_output_dir(config) == tmp_path / "runs" / "scenario"
