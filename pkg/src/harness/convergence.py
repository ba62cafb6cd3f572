"""
Convergence studies

Mesh refinement studies with analytic or fine-grid references:

* ``poisson-manufactured``: V = sin(pi x) (1D) or sin(pi x) sin(pi y) (2D)
  with homogeneous contacts on every side.
* ``poisson-mixed``: V = x^2/2 - x with a contact on the left and insulating
  faces elsewhere.
* ``porous-medium``: the vacancy equation without drift, compared against
  the finest level of the same study.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from src.model.errors import ConfigurationError, ParameterError
from src.model.mesh import Mesh, build_uniform_mesh
from src.model.state import BoundarySpec, ContactData, ModelParams, initial_state
from src.poisson.solver import PoissonSystem
from src.transport.stepper import DriftDiffusionSolver, integrate_interval

from .config import CONVERGENCE_CASES, ScenarioConfig, build_stepper
from .records import format_value

logger = logging.getLogger(__name__)


@dataclass
class ConvergenceRow:
    level: int
    cells: int
    h: float
    error: float
    order: Optional[float] = None
    estimate: Optional[float] = None
    mass_drift: Optional[float] = None


@dataclass
class ConvergenceTable:
    case: str
    norm: str
    rows: List[ConvergenceRow] = field(default_factory=list)

    @property
    def orders(self) -> List[float]:
        return [row.order for row in self.rows if row.order is not None]

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else float("nan")

    def to_text(self) -> str:
        lines = [
            f"Convergence study: {self.case} ({self.norm} error)",
            f"{'level':>5}  {'cells':>7}  {'h':>12}  {'error':>12}  {'order':>7}  {'estimate':>12}",
        ]
        for row in self.rows:
            order = f"{row.order:7.3f}" if row.order is not None else f"{'-':>7}"
            estimate = f"{row.estimate:12.4e}" if row.estimate is not None else f"{'-':>12}"
            lines.append(f"{row.level:>5}  {row.cells:>7}  {row.h:12.4e}  {row.error:12.4e}  {order}  {estimate}")
        return "\n".join(lines)

    def write_csv(self, path: Path) -> None:
        header = "level,cells,h,error,order,estimate,mass_drift"
        body = [
            ",".join(
                [str(r.level), str(r.cells), format_value(r.h), format_value(r.error)]
                + ["" if v is None else format_value(v) for v in (r.order, r.estimate, r.mass_drift)]
            )
            for r in self.rows
        ]
        Path(path).write_text("\n".join([header] + body) + "\n", encoding="utf-8")


def _attach_orders(rows: List[ConvergenceRow]) -> None:
    for coarse, fine in zip(rows, rows[1:]):
        if coarse.error > 0.0 and fine.error > 0.0:
            fine.order = float(np.log(coarse.error / fine.error) / np.log(coarse.h / fine.h))


def _check_levels(levels: int) -> None:
    if levels < 2:
        raise ParameterError(f"A convergence study needs at least 2 levels, got {levels}", name="levels", value=levels)


def _zero_contact() -> ContactData:
    return ContactData(n_d=0.0, p_d=0.0, v_d=0.0)


def _poisson_case(case: str, dim: int, cells: int) -> Tuple[Mesh, BoundarySpec, np.ndarray, np.ndarray]:
    """Mesh, boundary, exact potential and source (per unit lambda^2) of one level."""
    mesh = build_uniform_mesh(dim, [1.0] * dim, [cells] * dim)
    x = mesh.centers[:, 0]
    if case == "poisson-manufactured":
        sides = ("left", "right") if dim == 1 else ("left", "right", "bottom", "top")
        bc = BoundarySpec(contacts={side: _zero_contact() for side in sides})
        exact = np.sin(np.pi * x)
        if dim == 2:
            exact = exact * np.sin(np.pi * mesh.centers[:, 1])
        source = -dim * np.pi ** 2 * exact
        return mesh, bc, exact, source
    if case == "poisson-mixed":
        bc = BoundarySpec(contacts={"left": _zero_contact()})
        return mesh, bc, 0.5 * x ** 2 - x, np.ones(mesh.num_cells)
    raise ConfigurationError(f"Unknown Poisson case '{case}'", key="convergence.case")


def poisson_convergence(
    case: str, levels: int, base_cells: int = 16, dim: int = 1, debye_length: float = 1.0
) -> ConvergenceTable:
    """
    Discrete L^2 error of the Poisson solver on successively halved meshes.

    Raises:
        ParameterError: If levels < 2
        ConfigurationError: For an unknown case
    """
    _check_levels(levels)
    table = ConvergenceTable(case=case, norm="L2")
    for level in range(levels):
        cells = base_cells * 2 ** level
        mesh, bc, exact, source = _poisson_case(case, dim, cells)
        system = PoissonSystem.for_boundary(mesh, bc, debye_length)
        v = system.solve(debye_length ** 2 * source, np.zeros(bc.dirichlet_faces(mesh).size))
        error = float(np.sqrt(np.sum(mesh.volumes * (v - exact) ** 2)))
        table.rows.append(ConvergenceRow(level=level, cells=cells, h=1.0 / cells, error=error))
        logger.info("%s level %d: cells=%d error=%.4e", case, level, cells, error)
    _attach_orders(table.rows)
    return table


def restrict(field_values: np.ndarray, times: int = 1) -> np.ndarray:
    """Average neighbouring pairs of 1D cells ``times`` times."""
    values = np.asarray(field_values, dtype=float)
    for _ in range(times):
        values = 0.5 * (values[0::2] + values[1::2])
    return values


def _porous_run(config: ScenarioConfig, cells: int, dt: float) -> Tuple[Mesh, np.ndarray, float]:
    conv = config.convergence
    mesh = build_uniform_mesh(1, [config.mesh.lengths[0]], [cells])
    params = ModelParams(
        alpha_n=config.model.alpha_n,
        alpha_p=config.model.alpha_p,
        alpha_d=config.model.alpha_d,
        debye_length=config.model.debye_length,
        doping=config.model.doping.evaluate(mesh),
        cutoff_k=config.model.cutoff_k,
    )
    stepper_section = config.stepper.model_copy(update={"dt": dt, "drift": False})
    solver = DriftDiffusionSolver(mesh, BoundarySpec(gauge=True), params, build_stepper(stepper_section))
    state = initial_state(
        mesh,
        config.initial.n.evaluate(mesh),
        config.initial.p.evaluate(mesh),
        config.initial.d.evaluate(mesh),
    )
    mass0 = float(np.sum(mesh.volumes * state.d))
    steps = int(round(conv.t_end / dt))
    for k in range(1, steps + 1):
        t_next = conv.t_end if k == steps else k * dt
        state, _ = integrate_interval(solver, state, t_next)
    drift = abs(float(np.sum(mesh.volumes * state.d)) - mass0) / max(1.0, abs(mass0))
    return mesh, state.d, drift


def porous_medium_convergence(config: ScenarioConfig, levels: int) -> ConvergenceTable:
    """
    Drift-free vacancy diffusion on ``levels + 1`` meshes, the finest serving as reference.

    Row l reports the L^1 distance of level l to the restricted reference and
    the estimate ||u_l - R u_(l+1)||_L1. Cells and the time step are refined
    together.

    Raises:
        ParameterError: If levels < 2 or the mesh is not one-dimensional
    """
    _check_levels(levels)
    if config.mesh.dim != 1:
        raise ParameterError("The porous-medium study runs in 1D", name="dim", value=config.mesh.dim)
    conv = config.convergence
    solutions = []
    for level in range(levels + 1):
        cells = conv.base_cells * 2 ** level
        mesh, d, drift = _porous_run(config, cells, conv.dt / 2 ** level)
        solutions.append((mesh, d, drift))
        logger.info("porous-medium level %d: cells=%d mass drift=%.2e", level, cells, drift)

    reference = solutions[-1][1]
    table = ConvergenceTable(case="porous-medium", norm="L1")
    for level in range(levels):
        mesh, d, drift = solutions[level]
        vol = mesh.volumes
        error = float(np.sum(vol * np.abs(d - restrict(reference, levels - level))))
        estimate = float(np.sum(vol * np.abs(d - restrict(solutions[level + 1][1], 1))))
        table.rows.append(
            ConvergenceRow(
                level=level,
                cells=mesh.num_cells,
                h=mesh.spacing[0],
                error=error,
                estimate=estimate,
                mass_drift=drift,
            )
        )
    _attach_orders(table.rows)
    return table


def convergence_study(config: ScenarioConfig, levels: Optional[int] = None) -> ConvergenceTable:
    """
    Run the convergence case configured in ``config.convergence``.

    Args:
        config: Scenario with a convergence section
        levels: Overrides ``convergence.levels``

    Raises:
        ConfigurationError: No convergence section
        ParameterError: Fewer than two levels
    """
    if config.convergence is None:
        raise ConfigurationError("Scenario has no convergence section", key="convergence")
    conv = config.convergence
    levels = conv.levels if levels is None else levels
    if conv.case not in CONVERGENCE_CASES:
        raise ConfigurationError(f"Unknown convergence case '{conv.case}'", key="convergence.case")
    if conv.case == "porous-medium":
        return porous_medium_convergence(config, levels)
    return poisson_convergence(conv.case, levels, conv.base_cells, conv.dim, config.model.debye_length)
