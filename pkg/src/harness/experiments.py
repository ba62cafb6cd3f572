"""
Relative-entropy experiment

Runs a scenario twice from identical data and once from perturbed data,
tracks the relative free energy of the perturbed run against the reference
run, and fits the Gronwall rate C in log H(t) <= log H(0) + C t. Repeating
the experiment with smaller steps shows whether the fitted rate is a
property of the dynamics rather than of the step size.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Sequence

import numpy as np

from src.diagnostics.energy import gronwall_rate, relative_free_energy
from src.model.errors import ParameterError
from src.model.mesh import Mesh
from src.model.state import State
from src.transport.stepper import DriftDiffusionSolver, integrate_interval

from .config import ScenarioConfig, build_problem
from .runner import time_grid

logger = logging.getLogger(__name__)


@dataclass
class EntropySeries:
    dt: float
    times: np.ndarray
    values: np.ndarray
    rate: float


@dataclass
class RelativeEntropyResult:
    perturbation: float
    deterministic: bool
    series: List[EntropySeries] = field(default_factory=list)

    @property
    def rates(self) -> List[float]:
        return [s.rate for s in self.series]

    def stable(self, tolerance: float = 0.2) -> bool:
        """Every fitted rate within ``tolerance`` (relative) of the first one."""
        first = self.rates[0]
        scale = max(abs(first), 1e-300)
        return all(abs(rate - first) <= tolerance * scale for rate in self.rates[1:])


def perturb_state(mesh: Mesh, state: State, perturbation: float) -> State:
    """Scale every density by 1 + perturbation * cos(pi x / L_x); the potential is dropped."""
    shape = 1.0 + perturbation * np.cos(np.pi * mesh.centers[:, 0] / mesh.lengths[0])
    return State(time=state.time, n=state.n * shape, p=state.p * shape, d=state.d * shape, v=None)


def trajectory(solver: DriftDiffusionSolver, state: State, t_end: float) -> List[State]:
    """States at every step time, starting with ``state`` (with its potential)."""
    state = solver.with_potential(state)
    states = [state]
    for t_next in time_grid(state.time, t_end, solver.stepper.dt):
        state, _ = integrate_interval(solver, state, float(t_next))
        states.append(state)
    return states


def _identical(a: List[State], b: List[State]) -> bool:
    return all(
        np.array_equal(x.n, y.n) and np.array_equal(x.p, y.p) and np.array_equal(x.d, y.d) and np.array_equal(x.v, y.v)
        for x, y in zip(a, b)
    ) and len(a) == len(b)


def relative_entropy_experiment(
    config: ScenarioConfig, perturbation: float = 0.01, dt_factors: Sequence[float] = (1.0, 0.5)
) -> RelativeEntropyResult:
    """
    Relative free energy between a perturbed and an unperturbed run.

    Args:
        config: A relax scenario; its stepper.dt is scaled by each factor
        perturbation: Relative size of the initial perturbation
        dt_factors: Step-size multipliers, one series each

    Raises:
        ParameterError: If perturbation is not in (0, 1) or no factor is given
        StepFailure: If a run cannot be completed
        DomainError: If a perturbed density turns negative beyond roundoff
    """
    if not 0.0 < perturbation < 1.0:
        raise ParameterError("perturbation must lie in (0, 1)", name="perturbation", value=perturbation)
    if not dt_factors:
        raise ParameterError("Need at least one dt factor", name="dt_factors")
    problem = build_problem(config)
    mesh, t_end = problem.mesh, config.stepper.t_end
    result = RelativeEntropyResult(perturbation=perturbation, deterministic=True)
    for i, factor in enumerate(dt_factors):
        stepper = replace(problem.stepper, dt=problem.stepper.dt * factor)
        solver = DriftDiffusionSolver(mesh, problem.bc, problem.params, stepper)
        reference = trajectory(solver, problem.state, t_end)
        if i == 0:
            result.deterministic = _identical(reference, trajectory(solver, problem.state, t_end))
        perturbed = trajectory(solver, perturb_state(mesh, problem.state, perturbation), t_end)
        values = np.array(
            [relative_free_energy(mesh, problem.params, u, ref, problem.bc) for u, ref in zip(perturbed, reference)]
        )
        times = np.array([s.time for s in reference])
        rate = gronwall_rate(times, values)
        logger.info("dt=%.3e: H(0)=%.4e H(T)=%.4e rate=%.4f", stepper.dt, values[0], values[-1], rate)
        result.series.append(EntropySeries(dt=stepper.dt, times=times, values=values, rate=rate))
    return result
