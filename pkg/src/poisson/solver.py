"""
Poisson solver

Two-point flux discretisation of lambda^2 * Laplace(V) = n - p - D + A on a
uniform mesh. Dirichlet data sit on half-cell boundary faces, insulating
faces assemble nothing. With the stiffness matrix L (Dirichlet faces on the
diagonal) and the boundary load b, the discrete equation per cell reads

    lambda^2 * (L V - b) + vol * f = 0.

Without contacts the gauge mode appends a Lagrange multiplier that pins the
volume-weighted mean of V to zero and absorbs the mean of f.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.model.errors import ConfigurationError, NumericalError, ParameterError
from src.model.mesh import Mesh
from src.model.state import BoundarySpec, ModelParams

logger = logging.getLogger(__name__)


def stiffness_matrix(mesh: Mesh, dirichlet_faces: np.ndarray) -> sp.csr_matrix:
    """Symmetric positive semidefinite two-point operator (no lambda factor)."""
    n = mesh.num_cells
    lo, hi = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    tau = mesh.edge_area / mesh.edge_dist
    rows = np.concatenate([lo, hi, lo, hi])
    cols = np.concatenate([lo, hi, hi, lo])
    vals = np.concatenate([tau, tau, -tau, -tau])
    if dirichlet_faces.size:
        cells = mesh.bface_cell[dirichlet_faces]
        tau_b = mesh.bface_area[dirichlet_faces] / mesh.bface_dist[dirichlet_faces]
        rows = np.concatenate([rows, cells])
        cols = np.concatenate([cols, cells])
        vals = np.concatenate([vals, tau_b])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def boundary_load(mesh: Mesh, dirichlet_faces: np.ndarray, face_values: np.ndarray) -> np.ndarray:
    """Vector b with b_i = sum over contact faces of cell i of (area / dist) * V_D."""
    load = np.zeros(mesh.num_cells)
    if dirichlet_faces.size:
        tau_b = mesh.bface_area[dirichlet_faces] / mesh.bface_dist[dirichlet_faces]
        np.add.at(load, mesh.bface_cell[dirichlet_faces], tau_b * np.asarray(face_values, dtype=float))
    return load


class PoissonSystem:
    """
    Assembled Poisson operator for one mesh and one set of contact faces.

    The sparse factorisation is computed on first use and reused for every
    later right-hand side.
    """

    def __init__(self, mesh: Mesh, dirichlet_faces: np.ndarray, debye_length: float, gauge: bool = False):
        if not debye_length > 0.0:
            raise ParameterError(f"debye_length must be positive, got {debye_length}", name="debye_length")
        dirichlet_faces = np.asarray(dirichlet_faces, dtype=int)
        if dirichlet_faces.size == 0 and not gauge:
            raise ConfigurationError(
                "Poisson operator is singular without contact faces; enable gauge mode",
                key="gauge",
            )
        if dirichlet_faces.size and gauge:
            raise ConfigurationError("Gauge mode requires an all-insulating boundary", key="gauge")
        self.mesh = mesh
        self.dirichlet_faces = dirichlet_faces
        self.debye_length = float(debye_length)
        self.gauge = gauge
        self.stiffness = stiffness_matrix(mesh, dirichlet_faces)
        self.operator = (self.debye_length ** 2) * self.stiffness
        self._matrix = self._bordered() if gauge else self.operator.tocsc()
        self._lu = None

    @classmethod
    def for_boundary(cls, mesh: Mesh, bc: BoundarySpec, debye_length: float) -> "PoissonSystem":
        return cls(mesh, bc.dirichlet_faces(mesh), debye_length, gauge=bc.gauge)

    def _bordered(self) -> sp.csc_matrix:
        vol = self.mesh.volumes[:, None]
        return sp.bmat([[self.operator, sp.csr_matrix(vol)], [sp.csr_matrix(vol.T), None]]).tocsc()

    def _factor(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self._matrix)
            except RuntimeError as exc:
                raise NumericalError(f"Poisson factorisation failed: {exc}", {"solver": "direct"}) from exc
        return self._lu

    def right_hand_side(self, source: np.ndarray, face_values: Optional[np.ndarray] = None) -> np.ndarray:
        rhs = -self.mesh.volumes * np.asarray(source, dtype=float)
        if self.dirichlet_faces.size:
            values = np.zeros(self.dirichlet_faces.size) if face_values is None else face_values
            rhs = rhs + self.debye_length ** 2 * boundary_load(self.mesh, self.dirichlet_faces, values)
        if self.gauge:
            rhs = np.concatenate([rhs, [0.0]])
        return rhs

    def solve(
        self,
        source: np.ndarray,
        face_values: Optional[np.ndarray] = None,
        solver: str = "direct",
        tol: float = 1e-12,
    ) -> np.ndarray:
        """
        Solve for V given the cell source f = n - p - D + A.

        Args:
            source: Per-cell source f
            face_values: V_D on the contact faces (zeros when omitted)
            solver: "direct" (sparse LU) or "iterative" (CG, MINRES in gauge mode)
            tol: Relative residual target

        Raises:
            NumericalError: If the solve fails or misses the residual target
        """
        rhs = self.right_hand_side(source, face_values)
        if solver == "direct":
            x = self._factor().solve(rhs)
        elif solver == "iterative":
            method = spla.minres if self.gauge else spla.cg
            x, info = method(self._matrix, rhs, rtol=tol, maxiter=20 * rhs.size)
            if info != 0:
                raise NumericalError(
                    "Iterative Poisson solve did not converge",
                    {"info": int(info), "iterations": 20 * rhs.size, "residual": self.relative_residual(x, rhs)},
                )
        else:
            raise ParameterError(f"Unknown Poisson solver '{solver}'", name="solver", value=solver)

        residual = self.relative_residual(x, rhs)
        if not np.isfinite(residual) or residual > max(tol, 1e-12):
            raise NumericalError(
                f"Poisson residual {residual:.3e} above tolerance {tol:.1e}",
                {"solver": solver, "residual": residual},
            )
        return x[: self.mesh.num_cells]

    def relative_residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Backward error ||b - A x|| / (||A|| ||x|| + ||b||) in the infinity norm."""
        r = rhs - self._matrix @ x
        norm_a = spla.norm(self._matrix, np.inf)
        denom = norm_a * np.max(np.abs(x)) + np.max(np.abs(rhs))
        if denom == 0.0:
            return 0.0
        return float(np.max(np.abs(r)) / denom)

    def quadratic_form(self, w: np.ndarray) -> float:
        """(lambda^2 / 2) * w^T L w, the electric energy of a potential vanishing on contacts."""
        return 0.5 * float(w @ (self.operator @ w))


def electric_quadratic_form(mesh: Mesh, w: np.ndarray, debye_length: float, dirichlet_faces=None) -> float:
    """
    (lambda^2 / 2) * sum over faces of area * dist * |grad w|^2.

    Contact faces, when given, contribute their half-cell gradient with w = 0
    on the face.
    """
    faces = np.zeros(0, dtype=int) if dirichlet_faces is None else np.asarray(dirichlet_faces, dtype=int)
    lo, hi = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    energy = np.sum(mesh.edge_area / mesh.edge_dist * (w[hi] - w[lo]) ** 2)
    if faces.size:
        cells = mesh.bface_cell[faces]
        energy += np.sum(mesh.bface_area[faces] / mesh.bface_dist[faces] * w[cells] ** 2)
    return 0.5 * debye_length ** 2 * float(energy)


def charge_source(mesh: Mesh, params: ModelParams, n: np.ndarray, p: np.ndarray, d: np.ndarray) -> np.ndarray:
    return np.asarray(n) - np.asarray(p) - np.asarray(d) + params.doping_field(mesh)


def solve_poisson(
    mesh: Mesh,
    bc: BoundarySpec,
    params: ModelParams,
    n: np.ndarray,
    p: np.ndarray,
    d: np.ndarray,
    solver: str = "direct",
    tol: float = 1e-12,
    system: Optional[PoissonSystem] = None,
) -> np.ndarray:
    """
    Potential for given densities with the boundary conditions of ``bc``.

    Raises:
        ConfigurationError: No contact and no gauge mode
        NumericalError: Linear solver breakdown
    """
    bc.validate(mesh)
    for label, field in (("n", n), ("p", p), ("d", d)):
        if np.shape(field) != (mesh.num_cells,):
            raise ConfigurationError(f"Field {label} does not match the mesh", key=label)
    system = system or PoissonSystem.for_boundary(mesh, bc, params.debye_length)
    _, _, v_d = bc.face_values(mesh)
    return system.solve(charge_source(mesh, params, n, p, d), v_d, solver=solver, tol=tol)


def harmonic_lift(mesh: Mesh, bc: BoundarySpec, face_values: np.ndarray) -> np.ndarray:
    """
    Discrete extension of contact data into the domain.

    Solves the homogeneous problem L w = b with the given contact values and
    insulating faces elsewhere. Without contacts the lift is zero.
    """
    faces = bc.dirichlet_faces(mesh)
    if faces.size == 0:
        return np.zeros(mesh.num_cells)
    system = PoissonSystem(mesh, faces, 1.0)
    return system.solve(np.zeros(mesh.num_cells), face_values)


def grad_lr_norm(mesh: Mesh, v: np.ndarray, r: float, bc: Optional[BoundarySpec] = None) -> float:
    """
    Edge-based discrete L^r norm of grad V.

    (sum over faces of area * dist * |dV / dist|^r)^(1/r). With ``bc`` the
    half-cell contact faces are included; insulating faces carry zero
    gradient. ``r = inf`` gives the largest face gradient.
    """
    if not r >= 1.0:
        raise ParameterError(f"Norm exponent r must be at least 1, got {r}", name="r", value=r)
    v = np.asarray(v, dtype=float)
    lo, hi = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    grads = [np.abs(v[hi] - v[lo]) / mesh.edge_dist]
    weights = [mesh.edge_area * mesh.edge_dist]
    if bc is not None and bc.contacts:
        faces = bc.dirichlet_faces(mesh)
        _, _, v_d = bc.face_values(mesh)
        grads.append(np.abs(v[mesh.bface_cell[faces]] - v_d) / mesh.bface_dist[faces])
        weights.append(mesh.bface_area[faces] * mesh.bface_dist[faces])
    grad = np.concatenate(grads)
    weight = np.concatenate(weights)
    if np.isinf(r):
        return float(np.max(grad)) if grad.size else 0.0
    return float(np.sum(weight * grad ** r) ** (1.0 / r))


def elliptic_norm_pair(
    mesh: Mesh,
    bc: BoundarySpec,
    params: ModelParams,
    n: np.ndarray,
    p: np.ndarray,
    d: np.ndarray,
    v: np.ndarray,
    r: float = 3.0,
) -> Tuple[float, float]:
    """(||grad V||_{L^r}, ||n - p - D + A||_{L^{3r/(3+r)}}) for inspecting the elliptic ratio."""
    q = 3.0 * r / (3.0 + r)
    source = charge_source(mesh, params, n, p, d)
    source_norm = float(np.sum(mesh.volumes * np.abs(source) ** q) ** (1.0 / q))
    return grad_lr_norm(mesh, v, r, bc), source_norm
