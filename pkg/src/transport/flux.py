"""
Entropy-variable fluxes

Each species moves down the gradient of its electrochemical potential
w = mu(v) + z * V with mu(v) = alpha / (alpha - 1) * v^(alpha - 1) and
charge sign z = -1 for electrons, +1 for holes and vacancies. The two-point
particle flux across a face, oriented left to right, is

    m * (w_left - w_right) / dist

with a nonnegative face mobility m. Under a cutoff, mu uses
alpha / (alpha - 1) * S_k^(alpha - 1)(v) and the mobility uses T_k(v).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.cutoff.functions import CutoffFamily
from src.model.errors import DomainError, ParameterError


MOBILITIES = ("arithmetic", "upwind")


@dataclass(frozen=True)
class FluxForm:
    """Species tag and the sign of its coupling to the potential."""

    species: str
    charge: int

    @classmethod
    def of(cls, species: str) -> "FluxForm":
        if species not in CHARGES:
            raise ParameterError(f"Unknown species '{species}'", name="species", value=species)
        return cls(species, CHARGES[species])


CHARGES = {"n": -1, "p": 1, "d": 1}
FLUX_FORMS = {name: FluxForm(name, z) for name, z in CHARGES.items()}


def chemical_potential(v, alpha: float):
    """
    mu(v) = alpha / (alpha - 1) * v^(alpha - 1), the derivative of v^alpha / (alpha - 1).

    Raises:
        DomainError: For negative densities
        ParameterError: For alpha <= 1
    """
    if not alpha > 1.0:
        raise ParameterError(f"alpha must exceed 1, got {alpha}", name="alpha", value=alpha)
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("Chemical potential is undefined for negative densities", name="v")
    mu = alpha / (alpha - 1.0) * arr ** (alpha - 1.0)
    return float(mu) if arr.ndim == 0 else mu


def potential_and_slope(
    v: np.ndarray, alpha: float, cutoff: Optional[CutoffFamily] = None, floor: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """mu and d mu / dv as used by the scheme (floored or truncated)."""
    v = np.asarray(v, dtype=float)
    scale = alpha / (alpha - 1.0)
    if cutoff is not None:
        mu = scale * cutoff.s_gamma(alpha - 1.0, v)
        slope = alpha * np.clip(v, cutoff.lower, cutoff.upper) ** (alpha - 2.0)
        return np.asarray(mu, dtype=float), np.asarray(slope, dtype=float)
    vf = np.maximum(v, floor)
    active = v > floor
    mu = scale * vf ** (alpha - 1.0)
    slope = np.where(active, alpha * np.where(active, v, 1.0) ** (alpha - 2.0), 0.0)
    return mu, slope


def mobility_weight(v: np.ndarray, cutoff: Optional[CutoffFamily] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Cell mobility (v clipped at zero, or T_k(v)) and its derivative."""
    v = np.asarray(v, dtype=float)
    if cutoff is not None:
        return np.asarray(cutoff.truncate(v), dtype=float), np.asarray(cutoff.truncate_derivative(v), dtype=float)
    return np.maximum(v, 0.0), (v > 0.0).astype(float)


def face_mobility(
    m_left: np.ndarray, m_right: np.ndarray, w_left: np.ndarray, w_right: np.ndarray, mobility: str
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Face mobility with its weights on the left and right cell mobilities.

    Returns (m, dm/dm_left, dm/dm_right).
    """
    if mobility == "arithmetic":
        half = np.full(np.shape(m_left), 0.5)
        return 0.5 * (m_left + m_right), half, half
    if mobility == "upwind":
        from_left = w_left >= w_right
        m = np.where(from_left, m_left, m_right)
        return m, from_left.astype(float), (~from_left).astype(float)
    raise ParameterError(f"Unknown mobility '{mobility}'. Known: {list(MOBILITIES)}", name="mobility", value=mobility)


def edge_flux(
    species,
    v_left,
    v_right,
    V_left,
    V_right,
    dist,
    alpha: float,
    cutoff: Optional[CutoffFamily] = None,
    mobility: str = "arithmetic",
    floor: float = 0.0,
):
    """
    Particle flux per unit face area, oriented left to right.

    Args:
        species: A ``FluxForm`` or species name ("n", "p", "d")
        v_left, v_right: Densities in the two cells
        V_left, V_right: Potentials in the two cells
        dist: Distance between the cell centres
        alpha: Diffusion exponent of the species
        cutoff: Optional truncation family
        mobility: "arithmetic" or "upwind"
        floor: Density floor for mu without cutoff

    Raises:
        ParameterError: For dist <= 0
    """
    form = species if isinstance(species, FluxForm) else FluxForm.of(species)
    dist = np.asarray(dist, dtype=float)
    if np.any(dist <= 0.0):
        raise ParameterError("Face distance must be positive", name="dist")
    v_left = np.asarray(v_left, dtype=float)
    v_right = np.asarray(v_right, dtype=float)
    mu_l, _ = potential_and_slope(v_left, alpha, cutoff, floor)
    mu_r, _ = potential_and_slope(v_right, alpha, cutoff, floor)
    w_l = mu_l + form.charge * np.asarray(V_left, dtype=float)
    w_r = mu_r + form.charge * np.asarray(V_right, dtype=float)
    m_l, _ = mobility_weight(v_left, cutoff)
    m_r, _ = mobility_weight(v_right, cutoff)
    m, _, _ = face_mobility(m_l, m_r, w_l, w_r, mobility)
    flux = m * (w_l - w_r) / dist
    return float(flux) if np.ndim(flux) == 0 else flux
