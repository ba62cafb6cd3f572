"""Relative free energy between perturbed and reference runs."""

import numpy as np
import pytest

from src.harness import build_problem, load_config, parse_config, relative_entropy_experiment
from src.harness.experiments import perturb_state
from src.model import ParameterError


@pytest.fixture
def short_relax(relax_data):
    relax_data["stepper"]["t_end"] = 0.005
    return parse_config(relax_data)


def test_experiment_series(short_relax):
    result = relative_entropy_experiment(short_relax, perturbation=0.05)
    assert result.deterministic
    assert len(result.series) == 2
    assert [s.dt for s in result.series] == pytest.approx([1e-3, 5e-4])
    for series in result.series:
        assert series.values[0] > 0.0
        assert series.times[-1] == pytest.approx(0.005)
        assert np.isfinite(series.rate)
    assert len(result.rates) == 2


def test_biased_relaxation_rate_is_step_independent(scenario_dir):
    data = load_config(scenario_dir / "relax_memristor_1d.json").model_dump()
    data["stepper"]["t_end"] = 0.1
    result = relative_entropy_experiment(parse_config(data))
    assert result.stable(tolerance=0.2)
    for series in result.series:
        assert series.rate < 0.0
        elapsed = series.times - series.times[0]
        bound = np.log(series.values[0]) + series.rate * elapsed
        assert np.all(np.log(series.values) <= bound + 1e-9)


def test_perturbation_shape(short_relax):
    problem = build_problem(short_relax)
    perturbed = perturb_state(problem.mesh, problem.state, 0.1)
    x = problem.mesh.centers[:, 0]
    np.testing.assert_allclose(perturbed.d, problem.state.d * (1.0 + 0.1 * np.cos(np.pi * x)))
    assert perturbed.v is None


@pytest.mark.parametrize("perturbation", [0.0, 1.0, -0.1])
def test_perturbation_range(short_relax, perturbation):
    with pytest.raises(ParameterError, match="perturbation"):
        relative_entropy_experiment(short_relax, perturbation=perturbation)
    with pytest.raises(ParameterError):
        relative_entropy_experiment(short_relax, dt_factors=())
