"""
Free energy, dissipation and relative entropy

Discrete counterparts of the Lyapunov structure of the model. The internal
energies are cell sums, the electric energy is the two-point quadratic form
of V - V_D, and contact data are carried into the domain by discrete
harmonic lifts. The dissipation uses the same face mobilities and
electrochemical potentials as the stepper, so an implicit Euler step obeys

    H(new) - H(old) <= -dt * dissipation(new)

up to the Newton tolerance.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.cutoff.functions import CutoffFamily, truncated_internal_energy
from src.model.errors import DataError, DomainError, ParameterError
from src.model.mesh import Mesh
from src.model.state import SPECIES, BoundarySpec, ModelParams, State
from src.poisson.solver import electric_quadratic_form, harmonic_lift, solve_poisson
from src.transport.flux import CHARGES, face_mobility, mobility_weight, potential_and_slope

ROUNDOFF_NEGATIVITY = 1e-12


@dataclass(frozen=True)
class EnergyBreakdown:
    internal_n: float
    internal_p: float
    internal_d: float
    electric: float
    cross_term: float

    @property
    def total(self) -> float:
        return self.internal_n + self.internal_p + self.internal_d + self.electric + self.cross_term


@dataclass(frozen=True)
class BoundaryLifts:
    """Harmonic extensions of n_D, p_D and V_D (zero without contacts)."""

    n: np.ndarray
    p: np.ndarray
    v: np.ndarray

    @classmethod
    def build(cls, mesh: Mesh, bc: BoundarySpec) -> "BoundaryLifts":
        n_d, p_d, v_d = bc.face_values(mesh)
        return cls(
            n=harmonic_lift(mesh, bc, n_d),
            p=harmonic_lift(mesh, bc, p_d),
            v=harmonic_lift(mesh, bc, v_d),
        )


def _check_alpha(alpha: float, name: str = "alpha") -> None:
    if not alpha > 1.0:
        raise ParameterError(f"{name} must exceed 1, got {alpha}", name=name, value=alpha)


def _power_energy(v: np.ndarray, alpha: float, reference: np.ndarray) -> np.ndarray:
    vp = np.maximum(v, 0.0)
    return v * (vp ** (alpha - 1.0) - np.maximum(reference, 0.0) ** (alpha - 1.0)) / (alpha - 1.0)


def _ensure_potential(mesh: Mesh, bc: Optional[BoundarySpec], params: ModelParams, state: State) -> np.ndarray:
    if state.v is not None:
        return state.v
    if bc is None:
        raise DataError("State has no potential and no boundary data to solve for one", field="v")
    return solve_poisson(mesh, bc, params, state.n, state.p, state.d)


def free_energy(
    mesh: Mesh,
    bc: BoundarySpec,
    params: ModelParams,
    state: State,
    truncated: Optional[bool] = None,
    lifts: Optional[BoundaryLifts] = None,
) -> EnergyBreakdown:
    """
    Discrete free energy of a state.

    Args:
        mesh, bc, params: Problem definition
        state: Densities and (optionally) the potential
        truncated: Use the cutoff internal energies. ``None`` follows
            ``params.cutoff_k``.
        lifts: Precomputed boundary lifts, reused across a run

    Raises:
        ParameterError: If an exponent is not above 1
    """
    for s in SPECIES:
        _check_alpha(params.alpha(s), f"alpha_{s}")
    lifts = lifts or BoundaryLifts.build(mesh, bc)
    v = _ensure_potential(mesh, bc, params, state)
    vol = mesh.volumes
    use_cutoff = params.cutoff_k is not None if truncated is None else truncated
    if use_cutoff:
        if params.cutoff_k is None:
            raise ParameterError("Truncated energy needs cutoff_k", name="cutoff_k")
        family = CutoffFamily(params.cutoff_k)
        h_n = truncated_internal_energy(family, params.alpha_n, state.n, lifts.n)
        h_p = truncated_internal_energy(family, params.alpha_p, state.p, lifts.p)
        h_d = family.r_gamma(params.alpha_d, state.d) / (params.alpha_d - 1.0)
    else:
        h_n = _power_energy(state.n, params.alpha_n, lifts.n)
        h_p = _power_energy(state.p, params.alpha_p, lifts.p)
        h_d = _power_energy(state.d, params.alpha_d, np.zeros_like(state.d))
    electric = electric_quadratic_form(mesh, v - lifts.v, params.debye_length, bc.dirichlet_faces(mesh))
    return EnergyBreakdown(
        internal_n=float(np.sum(vol * h_n)),
        internal_p=float(np.sum(vol * h_p)),
        internal_d=float(np.sum(vol * h_d)),
        electric=electric,
        cross_term=float(np.sum(vol * state.d * lifts.v)),
    )


def dissipation(
    mesh: Mesh,
    params: ModelParams,
    state: State,
    cutoff: Optional[CutoffFamily] = None,
    bc: Optional[BoundarySpec] = None,
    mobility: str = "arithmetic",
    floor: Optional[float] = None,
    drift: bool = True,
) -> float:
    """
    Sum over species and faces of m * area * dist * |d(mu + z V) / dist|^2.

    Contact half-faces for n and p are included when ``bc`` is given.
    """
    v = _ensure_potential(mesh, bc, params, state)
    if floor is None:
        floor = 0.0 if cutoff is not None else 1e-14
    lo, hi = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    tau = mesh.edge_area / mesh.edge_dist
    faces = bc.dirichlet_faces(mesh) if bc is not None else np.zeros(0, dtype=int)
    face_values = dict(zip(("n", "p"), bc.face_values(mesh)[:2])) if bc is not None else {}
    v_face = bc.face_values(mesh)[2] if bc is not None else None
    total = 0.0
    for s in SPECIES:
        alpha = params.alpha(s)
        z = CHARGES[s] if drift else 0
        dens = state.species(s)
        mu, _ = potential_and_slope(dens, alpha, cutoff, floor)
        mob, _ = mobility_weight(dens, cutoff)
        w = mu + z * v
        m, _, _ = face_mobility(mob[lo], mob[hi], w[lo], w[hi], mobility)
        total += float(np.sum(tau * m * (w[lo] - w[hi]) ** 2))
        if s != "d" and faces.size:
            cells = mesh.bface_cell[faces]
            mu_b, _ = potential_and_slope(face_values[s], alpha, cutoff, floor)
            mob_b, _ = mobility_weight(face_values[s], cutoff)
            w_b = mu_b + z * v_face
            mb, _, _ = face_mobility(mob[cells], mob_b, w[cells], w_b, mobility)
            tau_b = mesh.bface_area[faces] / mesh.bface_dist[faces]
            total += float(np.sum(tau_b * mb * (w[cells] - w_b) ** 2))
    return total


def relative_density(v, vbar, alpha: float):
    """
    h(v | vbar) = h(v) - h(vbar) - h'(vbar) (v - vbar) with h(v) = v^alpha / (alpha - 1).

    Raises:
        DomainError: If v < 0 or vbar <= 0
    """
    _check_alpha(alpha)
    v_arr = np.asarray(v, dtype=float)
    vbar_arr = np.asarray(vbar, dtype=float)
    if np.any(vbar_arr <= 0.0):
        raise DomainError("Reference density must be strictly positive", name="vbar")
    if np.any(v_arr < 0.0):
        raise DomainError("Density must be nonnegative", name="v")
    h = v_arr ** alpha / (alpha - 1.0)
    h_bar = vbar_arr ** alpha / (alpha - 1.0)
    slope = alpha / (alpha - 1.0) * vbar_arr ** (alpha - 1.0)
    rel = h - h_bar - slope * (v_arr - vbar_arr)
    rel = np.maximum(rel, 0.0)
    return float(rel) if rel.ndim == 0 else rel


def relative_free_energy(
    mesh: Mesh,
    params: ModelParams,
    state: State,
    ref_state: State,
    bc: Optional[BoundarySpec] = None,
    include_electric: bool = True,
) -> float:
    """
    Relative free energy of ``state`` with respect to a strictly positive ``ref_state``.

    The electric part is (lambda^2 / 2) times the quadratic form of V - Vbar,
    which vanishes on contacts. Densities down to -ROUNDOFF_NEGATIVITY are
    read as zero.

    Raises:
        DomainError: If a density of ``state`` is more negative than that, or
            the reference is not strictly positive
    """
    vol = mesh.volumes
    total = 0.0
    for s in SPECIES:
        dens = np.asarray(state.species(s), dtype=float)
        if np.any(dens < -ROUNDOFF_NEGATIVITY):
            raise DomainError(f"Density {s} is negative (min {dens.min():.3e})", name=s)
        total += float(np.sum(vol * relative_density(np.maximum(dens, 0.0), ref_state.species(s), params.alpha(s))))
    if include_electric:
        v = _ensure_potential(mesh, bc, params, state)
        v_ref = _ensure_potential(mesh, bc, params, ref_state)
        faces = bc.dirichlet_faces(mesh) if bc is not None else None
        total += electric_quadratic_form(mesh, v - v_ref, params.debye_length, faces)
    return total


@dataclass(frozen=True)
class QuadraticBoundReport:
    alpha: float
    infimum: float
    refined_infimum: float

    @property
    def stable(self) -> bool:
        scale = max(abs(self.infimum), abs(self.refined_infimum), 1e-300)
        return abs(self.infimum - self.refined_infimum) <= 0.01 * scale

    @property
    def passed(self) -> bool:
        return self.infimum > 0.0 and self.refined_infimum > 0.0 and self.stable


def quadratic_ratio_limit(vbar, alpha: float):
    """Limit of h(v | vbar) / |v - vbar|^2 as v -> vbar, i.e. alpha * vbar^(alpha - 2) / 2."""
    return 0.5 * alpha * np.asarray(vbar, dtype=float) ** (alpha - 2.0)


def _ratio_infimum(alpha: float, m: float, M: float, points: int) -> float:
    v = np.linspace(0.0, M, points)
    vbar = np.linspace(m, M, points)
    vv, bb = np.meshgrid(v, vbar, indexing="ij")
    gap = np.abs(vv - bb)
    keep = gap > 1e-3 * M
    ratio = relative_density(vv[keep], bb[keep], alpha) / gap[keep] ** 2
    return float(np.min(ratio))


def verify_quadratic_bound(alpha: float, m: float, M: float, samples: int = 200) -> QuadraticBoundReport:
    """
    Infimum of h(v | vbar) / |v - vbar|^2 over 0 <= v <= M, m <= vbar <= M.

    Pairs closer than 1e-3 * M are skipped; their limiting ratio is given by
    ``quadratic_ratio_limit``. The grid is refined twofold to judge stability.

    Raises:
        ParameterError: If m <= 0, M <= m or samples < 2
    """
    _check_alpha(alpha)
    if not m > 0.0:
        raise ParameterError(f"Lower reference bound m must be positive, got {m}", name="m", value=m)
    if not M > m:
        raise ParameterError(f"Upper bound M must exceed m, got M={M}, m={m}", name="M", value=M)
    if samples < 2:
        raise ParameterError("Need at least 2 samples per axis", name="samples", value=samples)
    return QuadraticBoundReport(
        alpha=alpha,
        infimum=_ratio_infimum(alpha, m, M, samples),
        refined_infimum=_ratio_infimum(alpha, m, M, 2 * samples - 1),
    )


def power_law_identity_residual(x: np.ndarray, n: np.ndarray, nbar: np.ndarray, alpha: float) -> float:
    """
    Relative defect of the power-law identity

        n (h'(n) - h'(nbar))' - nbar (h''(nbar) (n - nbar))' = (alpha - 1) h(n | nbar)'

    on a smooth 1D profile, derivatives taken with ``numpy.gradient``.
    """
    _check_alpha(alpha)
    n = np.asarray(n, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    h1 = lambda v: alpha / (alpha - 1.0) * v ** (alpha - 1.0)
    h2 = lambda v: alpha * v ** (alpha - 2.0)
    lhs = n * np.gradient(h1(n) - h1(nbar), x, edge_order=2) - nbar * np.gradient(
        h2(nbar) * (n - nbar), x, edge_order=2
    )
    rhs = (alpha - 1.0) * np.gradient(relative_density(n, nbar, alpha), x, edge_order=2)
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300))


def gronwall_rate(times: Sequence[float], values: Sequence[float]) -> float:
    """
    Smallest C with log H(t) <= log H(0) + C t over the recorded times t > 0.

    Raises:
        DataError: If H(0) is not positive or fewer than two samples are given
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2:
        raise DataError("Need at least two samples for a rate", field="times")
    if not values[0] > 0.0:
        raise DataError("Initial relative energy must be positive", field="values")
    later = times > times[0]
    logs = np.log(np.maximum(values[later], 1e-300)) - math.log(values[0])
    return float(np.max(logs / (times[later] - times[0])))
