"""
Implicit Euler stepper

Advances (n, p, D) and V together. One backward Euler step solves the
monolithic system

    vol * (v - v_old) / dt + sum of outgoing face fluxes = 0     for n, p, D
    lambda^2 * (L V - b) + vol * (n - p - D + A) = 0             for V

(plus a multiplier row in gauge mode) by Newton's method with step halving.
Contact data enter n and p through half-cell boundary faces; D has no
boundary flux anywhere. Because every face flux appears with opposite signs
in its two cells, each Newton update keeps the vacancy mass fixed.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.cutoff.functions import CutoffFamily
from src.model.errors import ConfigurationError, DataError, ParameterError, StepFailure
from src.model.mesh import Mesh
from src.model.state import SPECIES, BoundarySpec, ModelParams, State
from src.poisson.solver import PoissonSystem, boundary_load

from .flux import FLUX_FORMS, MOBILITIES, face_mobility, mobility_weight, potential_and_slope

logger = logging.getLogger(__name__)

NEGATIVE_DENSITY_EVENT = -1e-8


@dataclass(frozen=True)
class TimeStepper:
    """Step size, Newton settings and flux options of a run."""

    dt: float = 1e-3
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    max_damping_halvings: int = 30
    dt_min: float = 1e-8
    floor_epsilon: Optional[float] = None
    mobility: str = "arithmetic"
    drift: bool = True
    jacobian: str = "analytic"

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}", name="dt", value=self.dt)
        if not self.newton_tol > 0.0:
            raise ParameterError(f"newton_tol must be positive, got {self.newton_tol}", name="newton_tol")
        if self.newton_max_iter < 1:
            raise ParameterError("newton_max_iter must be at least 1", name="newton_max_iter")
        if self.max_damping_halvings < 0:
            raise ParameterError("max_damping_halvings must be nonnegative", name="max_damping_halvings")
        if not self.dt_min > 0.0:
            raise ParameterError("dt_min must be positive", name="dt_min", value=self.dt_min)
        if self.floor_epsilon is not None and self.floor_epsilon < 0.0:
            raise ParameterError("floor_epsilon must be nonnegative", name="floor_epsilon")
        if self.mobility not in MOBILITIES:
            raise ParameterError(f"Unknown mobility '{self.mobility}'", name="mobility", value=self.mobility)
        if self.jacobian not in ("analytic", "finite-difference"):
            raise ParameterError(f"Unknown jacobian '{self.jacobian}'", name="jacobian", value=self.jacobian)

    def floor_for(self, cutoff: Optional[CutoffFamily]) -> float:
        if self.floor_epsilon is not None:
            return float(self.floor_epsilon)
        return 0.0 if cutoff is not None else 1e-14


@dataclass
class NewtonReport:
    """Outcome of one implicit Euler step."""

    dt: float
    iterations: int = 0
    residual: float = float("inf")
    history: List[float] = field(default_factory=list)
    damping_events: int = 0
    converged: bool = False


class DriftDiffusionSolver:
    """
    Coupled drift-diffusion-Poisson stepper for one mesh and parameter set.

    The unknown vector is [n, p, d, V] (and the gauge multiplier). The
    Poisson operator is assembled once; the contact potential can be
    rescaled between steps with ``set_bias``.
    """

    def __init__(self, mesh: Mesh, bc: BoundarySpec, params: ModelParams, stepper: TimeStepper):
        params.validate_for_solver()
        bc.validate(mesh)
        self.mesh = mesh
        self.params = params
        self.stepper = stepper
        self.cutoff = CutoffFamily(params.cutoff_k) if params.cutoff_k is not None else None
        self.floor = stepper.floor_for(self.cutoff)
        self.poisson = PoissonSystem.for_boundary(mesh, bc, params.debye_length)
        self.doping = params.doping_field(mesh)
        self.faces = bc.dirichlet_faces(mesh)
        self.face_cells = mesh.bface_cell[self.faces]
        self.face_tau = mesh.bface_area[self.faces] / mesh.bface_dist[self.faces]
        self.edge_tau = mesh.edge_area / mesh.edge_dist
        self.bc = bc
        self._refresh_boundary()

    # ------------------------------------------------------------ boundary

    def _refresh_boundary(self) -> None:
        n_d, p_d, v_d = self.bc.face_values(self.mesh)
        self.face_density = {"n": n_d, "p": p_d}
        self.face_potential = v_d
        self.load = boundary_load(self.mesh, self.faces, v_d)

    def set_bias(self, multiplier: float) -> None:
        """Scale the contact potential to ``multiplier * V_D``."""
        self.bc = self.bc.scaled(multiplier)
        self._refresh_boundary()

    # ------------------------------------------------------------- layout

    @property
    def num_cells(self) -> int:
        return self.mesh.num_cells

    @property
    def size(self) -> int:
        return 4 * self.num_cells + (1 if self.bc.gauge else 0)

    def _block(self, name: str) -> slice:
        n = self.num_cells
        offset = {"n": 0, "p": n, "d": 2 * n, "V": 3 * n}[name]
        return slice(offset, offset + n)

    def source(self, n: np.ndarray, p: np.ndarray, d: np.ndarray) -> np.ndarray:
        return n - p - d + self.doping

    def with_potential(self, state: State) -> State:
        """Return ``state`` with V solved from its densities if V is missing."""
        if state.v is not None:
            return state
        v = self.poisson.solve(self.source(state.n, state.p, state.d), self.face_potential)
        return state.with_potential(v)

    def pack(self, state: State) -> np.ndarray:
        state = self.with_potential(state)
        parts = [state.n, state.p, state.d, state.v]
        if self.bc.gauge:
            f = self.source(state.n, state.p, state.d)
            parts.append([-np.sum(self.mesh.volumes * f) / self.mesh.measure])
        return np.concatenate([np.asarray(x, dtype=float) for x in parts])

    def unpack(self, x: np.ndarray, time: float) -> State:
        return State(
            time=time,
            n=x[self._block("n")].copy(),
            p=x[self._block("p")].copy(),
            d=x[self._block("d")].copy(),
            v=x[self._block("V")].copy(),
        )

    # ----------------------------------------------------------- transport

    def _transport(self, species: str, v: np.ndarray, V: np.ndarray, jacobian: bool):
        """Net outgoing flux per cell for one species, with Jacobian triplets."""
        mesh = self.mesh
        alpha = self.params.alpha(species)
        z = FLUX_FORMS[species].charge if self.stepper.drift else 0
        mu, dmu = potential_and_slope(v, alpha, self.cutoff, self.floor)
        mob, dmob = mobility_weight(v, self.cutoff)
        w = mu + z * V
        lo, hi = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
        m, wt_lo, wt_hi = face_mobility(mob[lo], mob[hi], w[lo], w[hi], self.stepper.mobility)
        dw = w[lo] - w[hi]
        flux = self.edge_tau * m * dw
        out = np.zeros(self.num_cells)
        np.add.at(out, lo, flux)
        np.add.at(out, hi, -flux)

        rows: List[np.ndarray] = []
        cols: List[np.ndarray] = []
        vals: List[np.ndarray] = []
        if jacobian:
            d_lo = self.edge_tau * (wt_lo * dmob[lo] * dw + m * dmu[lo])
            d_hi = self.edge_tau * (wt_hi * dmob[hi] * dw - m * dmu[hi])
            rows += [lo, lo, hi, hi]
            cols += [("v", lo), ("v", hi), ("v", lo), ("v", hi)]
            vals += [d_lo, d_hi, -d_lo, -d_hi]
            if z != 0:
                g = self.edge_tau * m * z
                rows += [lo, lo, hi, hi]
                cols += [("V", lo), ("V", hi), ("V", lo), ("V", hi)]
                vals += [g, -g, -g, g]

        if species != "d" and self.faces.size:
            cells = self.face_cells
            v_face = self.face_density[species]
            mu_face, _ = potential_and_slope(v_face, alpha, self.cutoff, self.floor)
            mob_face, _ = mobility_weight(v_face, self.cutoff)
            w_face = mu_face + z * self.face_potential
            mb, wt_cell, _ = face_mobility(mob[cells], mob_face, w[cells], w_face, self.stepper.mobility)
            dwb = w[cells] - w_face
            np.add.at(out, cells, self.face_tau * mb * dwb)
            if jacobian:
                rows += [cells]
                cols += [("v", cells)]
                vals += [self.face_tau * (wt_cell * dmob[cells] * dwb + mb * dmu[cells])]
                if z != 0:
                    rows += [cells]
                    cols += [("V", cells)]
                    vals += [self.face_tau * mb * z]
        return out, (rows, cols, vals)

    def face_fluxes(self, species: str, state: State) -> np.ndarray:
        """Outward particle flux (total over each face) through every contact face."""
        state = self.with_potential(state)
        if species == "d" or self.faces.size == 0:
            return np.zeros(self.faces.size)
        alpha = self.params.alpha(species)
        z = FLUX_FORMS[species].charge if self.stepper.drift else 0
        v = state.species(species)
        mu, _ = potential_and_slope(v, alpha, self.cutoff, self.floor)
        mob, _ = mobility_weight(v, self.cutoff)
        w = mu + z * state.v
        v_face = self.face_density[species]
        mu_face, _ = potential_and_slope(v_face, alpha, self.cutoff, self.floor)
        mob_face, _ = mobility_weight(v_face, self.cutoff)
        w_face = mu_face + z * self.face_potential
        cells = self.face_cells
        mb, _, _ = face_mobility(mob[cells], mob_face, w[cells], w_face, self.stepper.mobility)
        return self.face_tau * mb * (w[cells] - w_face)

    # ------------------------------------------------------------ residual

    def species_residual(self, old: State, x: np.ndarray, dt: float) -> np.ndarray:
        """Unscaled residual of the three transport equations, length 3N."""
        V = x[self._block("V")]
        vol = self.mesh.volumes
        parts = []
        for species in SPECIES:
            v = x[self._block(species)]
            out, _ = self._transport(species, v, V, jacobian=False)
            parts.append(vol * (v - old.species(species)) / dt + out)
        return np.concatenate(parts)

    def residual(self, old: State, x: np.ndarray, dt: float) -> np.ndarray:
        n, p, d, V = (x[self._block(b)] for b in ("n", "p", "d", "V"))
        vol = self.mesh.volumes
        poisson = self.poisson.operator @ V - self.params.debye_length ** 2 * self.load + vol * self.source(n, p, d)
        parts = [self.species_residual(old, x, dt), poisson]
        if self.bc.gauge:
            parts[1] = poisson + vol * x[-1]
            parts.append([np.sum(vol * V)])
        return np.concatenate(parts)

    def scale(self, dt: float) -> np.ndarray:
        """Row weights turning the residual into density and potential units."""
        vol = self.mesh.volumes
        weights = [np.tile(dt / vol, 3), 1.0 / vol]
        if self.bc.gauge:
            weights.append([1.0 / self.mesh.measure])
        return np.concatenate(weights)

    def jacobian(self, old: State, x: np.ndarray, dt: float) -> sp.csc_matrix:
        if self.stepper.jacobian == "finite-difference":
            return sp.csc_matrix(finite_difference_jacobian(self, old, x, dt))
        n = self.num_cells
        vol = self.mesh.volumes
        V = x[self._block("V")]
        cells = np.arange(n)
        rows: List[np.ndarray] = []
        cols: List[np.ndarray] = []
        vals: List[np.ndarray] = []
        for species in SPECIES:
            offset = self._block(species).start
            _, (r, c, v) = self._transport(species, x[self._block(species)], V, jacobian=True)
            for rr, (kind, cc), vv in zip(r, c, v):
                rows.append(offset + rr)
                cols.append((offset if kind == "v" else 3 * n) + cc)
                vals.append(vv)
            rows.append(offset + cells)
            cols.append(offset + cells)
            vals.append(vol / dt)
        coupling = {"n": 1.0, "p": -1.0, "d": -1.0}
        for species, sign in coupling.items():
            rows.append(3 * n + cells)
            cols.append(self._block(species).start + cells)
            vals.append(sign * vol)
        op = self.poisson.operator.tocoo()
        rows.append(3 * n + op.row)
        cols.append(3 * n + op.col)
        vals.append(op.data)
        if self.bc.gauge:
            rows += [3 * n + cells, np.full(n, 4 * n)]
            cols += [np.full(n, 4 * n), 3 * n + cells]
            vals += [vol, vol]
        size = self.size
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
        ).tocsc()

    # -------------------------------------------------------------- Newton

    def step(self, state: State, t_target: float) -> Tuple[State, NewtonReport]:
        """
        One backward Euler step from ``state.time`` to ``t_target``.

        Raises:
            StepFailure: If Newton's method does not reach the tolerance
        """
        dt = float(t_target - state.time)
        if not dt > 0.0:
            raise ParameterError(f"Step size must be positive, got {dt}", name="dt", value=dt)
        stepper = self.stepper
        old = self.with_potential(state)
        x = self.pack(old)
        weights = self.scale(dt)
        report = NewtonReport(dt=dt)

        residual = self.residual(old, x, dt)
        norm = float(np.max(np.abs(weights * residual)))
        report.history.append(norm)
        while norm > stepper.newton_tol or not np.isfinite(norm):
            if report.iterations >= stepper.newton_max_iter:
                report.residual = norm
                raise StepFailure(
                    f"Newton did not converge in {report.iterations} iterations (residual {norm:.3e})",
                    report,
                )
            try:
                delta = spla.spsolve(self.jacobian(old, x, dt), -residual)
            except RuntimeError as exc:
                report.residual = norm
                raise StepFailure(f"Newton linear solve failed: {exc}", report) from exc
            if not np.all(np.isfinite(delta)):
                report.residual = norm
                raise StepFailure("Newton update is not finite", report)

            base = float(np.linalg.norm(weights * residual))
            damping = 1.0
            for _ in range(stepper.max_damping_halvings + 1):
                trial = x + damping * delta
                trial_residual = self.residual(old, trial, dt)
                trial_norm = float(np.linalg.norm(weights * trial_residual))
                if np.isfinite(trial_norm) and trial_norm < base:
                    break
                damping *= 0.5
                report.damping_events += 1
            else:
                report.residual = norm
                raise StepFailure(
                    f"Damping ladder exhausted after {stepper.max_damping_halvings} halvings",
                    report,
                )
            x, residual = trial, trial_residual
            report.iterations += 1
            norm = float(np.max(np.abs(weights * residual)))
            report.history.append(norm)
            logger.debug("newton it=%d residual=%.3e damping=%.3g", report.iterations, norm, damping)

        report.residual = norm
        report.converged = True
        new = self.unpack(x, t_target)
        lowest = min(float(new.n.min()), float(new.p.min()), float(new.d.min()))
        if lowest < NEGATIVE_DENSITY_EVENT:
            logger.warning("Density dipped to %.3e at t=%.6g", lowest, t_target)
        return new, report

    # ------------------------------------------------------------ currents

    def contact_current(self, state: State, segment: str) -> float:
        """
        Conduction current through a contact, J_n.nu + J_p.nu integrated.

        In particle fluxes this is (outward hole flux) - (outward electron flux).
        """
        if not self.mesh.has_segment(segment):
            raise ConfigurationError(f"Unknown boundary segment '{segment}'", key=segment)
        if segment not in self.bc.contacts:
            raise ConfigurationError(f"Segment '{segment}' is not a contact", key=segment)
        mask = np.isin(self.faces, self.mesh.segment_faces(segment))
        electrons = self.face_fluxes("n", state)
        holes = self.face_fluxes("p", state)
        return float(np.sum(holes[mask]) - np.sum(electrons[mask]))


def finite_difference_jacobian(
    solver: DriftDiffusionSolver, old: State, x: np.ndarray, dt: float, eps: float = 1e-7
) -> np.ndarray:
    """Dense central-difference Jacobian of the full residual."""
    size = x.size
    jac = np.empty((size, size))
    for j in range(size):
        h = eps * max(1.0, abs(x[j]))
        plus = x.copy()
        minus = x.copy()
        plus[j] += h
        minus[j] -= h
        jac[:, j] = (solver.residual(old, plus, dt) - solver.residual(old, minus, dt)) / (2.0 * h)
    return jac


def assemble_residual(
    mesh: Mesh,
    bc: BoundarySpec,
    params: ModelParams,
    state_old: State,
    candidate: State,
    dt: float,
    stepper: Optional[TimeStepper] = None,
) -> np.ndarray:
    """
    Transport residual [n, p, d] of ``candidate`` after one step from ``state_old``.

    The candidate's potential is used as given; a missing potential is solved
    from the candidate densities.
    """
    solver = DriftDiffusionSolver(mesh, bc, params, stepper or TimeStepper(dt=dt))
    for label in ("n", "p", "d"):
        if candidate.species(label).shape != (mesh.num_cells,) or state_old.species(label).shape != (mesh.num_cells,):
            raise DataError(f"Field {label} does not match the mesh", field=label)
    x = solver.pack(candidate)
    return solver.species_residual(state_old, x, dt)


def advance(
    mesh: Mesh, bc: BoundarySpec, params: ModelParams, stepper: TimeStepper, state: State
) -> Tuple[State, NewtonReport]:
    """One implicit Euler step of size ``stepper.dt``."""
    solver = DriftDiffusionSolver(mesh, bc, params, stepper)
    return solver.step(state, state.time + stepper.dt)


def integrate_interval(
    solver: DriftDiffusionSolver,
    state: State,
    t_end: float,
    before_step: Optional[Callable[[float], None]] = None,
) -> Tuple[State, List[NewtonReport]]:
    """
    Reach ``t_end`` from ``state.time``, halving the step after each failure.

    ``before_step`` is called with the end time of every attempted step,
    substeps included, so time-dependent boundary data can follow it.

    Raises:
        StepFailure: When the step would drop below ``stepper.dt_min``
    """
    if before_step is not None:
        before_step(t_end)
    try:
        new, report = solver.step(state, t_end)
        return new, [report]
    except StepFailure as failure:
        span = t_end - state.time
        if 0.5 * span < solver.stepper.dt_min:
            raise StepFailure(
                f"Step size fell below dt_min={solver.stepper.dt_min:g} at t={state.time:.6g}",
                failure.report,
            ) from failure
        logger.warning("Step %.3e failed at t=%.6g; halving", span, state.time)
        t_mid = state.time + 0.5 * span
        middle, first = integrate_interval(solver, state, t_mid, before_step)
        end, second = integrate_interval(solver, middle, t_end, before_step)
        return end, first + second


def terminal_current(
    mesh: Mesh,
    bc: BoundarySpec,
    params: ModelParams,
    state: State,
    segment: str,
    stepper: Optional[TimeStepper] = None,
) -> float:
    """Signed conduction current through a contact segment."""
    solver = DriftDiffusionSolver(mesh, bc, params, stepper or TimeStepper())
    return solver.contact_current(state, segment)


def species_masses(mesh: Mesh, state: State) -> Dict[str, float]:
    return {s: float(np.sum(mesh.volumes * state.species(s))) for s in SPECIES}
