"""
Truncation family

The clamp T_k(v) = min(k, max(1/k, v)) and its integrated powers

    S_k^g(v) = g * int_0^v T_k(y)^(g-1) dy
    S_k^0(v) = int_0^v dy / T_k(y)
    R_k^g(v) = g * int_0^v S_k^(g-1)(y) dy

evaluated through their closed three-branch forms. All functions accept
scalars or numpy arrays and return a float for scalar input. At the
breakpoints v = 1/k and v = k derivatives use the middle branch.
"""

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np
from scipy import integrate

from src.model.errors import ParameterError


def _out(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _as_array(v):
    arr = np.asarray(v, dtype=float)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class CutoffFamily:
    """Cutoff functions at truncation level ``k`` (real, at least 2)."""

    k: float

    def __post_init__(self):
        if not self.k >= 2.0:
            raise ParameterError(f"Cutoff level k must be at least 2, got {self.k}", name="k", value=self.k)

    @property
    def lower(self) -> float:
        return 1.0 / self.k

    @property
    def upper(self) -> float:
        return float(self.k)

    # ------------------------------------------------------------------ T_k

    def truncate(self, v):
        arr, scalar = _as_array(v)
        return _out(np.clip(arr, self.lower, self.upper), scalar)

    def truncate_derivative(self, v):
        arr, scalar = _as_array(v)
        inside = (arr >= self.lower) & (arr <= self.upper)
        return _out(inside.astype(float), scalar)

    # ------------------------------------------------------------ S_k^gamma

    def _s_gamma_branches(self, gamma: float, v: np.ndarray):
        k = float(self.k)
        t = np.clip(v, self.lower, self.upper)
        lower = gamma * k ** (1.0 - gamma) * v
        middle = t ** gamma + (gamma - 1.0) * k ** (-gamma)
        upper = gamma * k ** (gamma - 1.0) * v - (gamma - 1.0) * (k ** gamma - k ** (-gamma))
        return lower, middle, upper

    def s_gamma(self, gamma: float, v):
        """S_k^gamma(v) for gamma > 0."""
        if not gamma > 0.0:
            raise ParameterError(f"S_k^gamma needs gamma > 0, got {gamma}", name="gamma", value=gamma)
        arr, scalar = _as_array(v)
        return _out(self._select(arr, *self._s_gamma_branches(float(gamma), arr)), scalar)

    def s_gamma_derivative(self, gamma: float, v):
        """d/dv S_k^gamma(v) = gamma * T_k(v)^(gamma - 1)."""
        if not gamma > 0.0:
            raise ParameterError(f"S_k^gamma needs gamma > 0, got {gamma}", name="gamma", value=gamma)
        arr, scalar = _as_array(v)
        t = np.clip(arr, self.lower, self.upper)
        return _out(gamma * t ** (gamma - 1.0), scalar)

    # ---------------------------------------------------------------- S_k^0

    def _s_zero_branches(self, v: np.ndarray):
        k = float(self.k)
        t = np.clip(v, self.lower, self.upper)
        lower = k * v
        middle = 1.0 + np.log(k * t)
        upper = 1.0 + 2.0 * np.log(k) + (v - k) / k
        return lower, middle, upper

    def s_zero(self, v):
        arr, scalar = _as_array(v)
        return _out(self._select(arr, *self._s_zero_branches(arr)), scalar)

    def s_zero_derivative(self, v):
        arr, scalar = _as_array(v)
        return _out(1.0 / np.clip(arr, self.lower, self.upper), scalar)

    # ------------------------------------------------------------ R_k^gamma

    def _r_gamma_branches(self, gamma: float, v: np.ndarray):
        k = float(self.k)
        g = gamma
        t = np.clip(v, self.lower, self.upper)
        lower = 0.5 * g * (g - 1.0) * k ** (2.0 - g) * v ** 2
        middle = t ** g + g * (g - 2.0) * k ** (1.0 - g) * t - 0.5 * (g - 1.0) * (g - 2.0) * k ** (-g)
        upper = (
            0.5 * g * (g - 1.0) * k ** (g - 2.0) * v ** 2
            - g * (g - 2.0) * (k ** (g - 1.0) - k ** (1.0 - g)) * v
            + 0.5 * (g - 1.0) * (g - 2.0) * (k ** g - k ** (-g))
        )
        return lower, middle, upper

    def r_gamma(self, gamma: float, v):
        """R_k^gamma(v) for gamma > 1; nonnegative and convex."""
        if not gamma > 1.0:
            raise ParameterError(f"R_k^gamma needs gamma > 1, got {gamma}", name="gamma", value=gamma)
        arr, scalar = _as_array(v)
        return _out(self._select(arr, *self._r_gamma_branches(float(gamma), arr)), scalar)

    def r_gamma_derivative(self, gamma: float, v):
        """d/dv R_k^gamma(v) = gamma * S_k^(gamma - 1)(v)."""
        if not gamma > 1.0:
            raise ParameterError(f"R_k^gamma needs gamma > 1, got {gamma}", name="gamma", value=gamma)
        return gamma * self.s_gamma(gamma - 1.0, v)

    # ------------------------------------------------------------- helpers

    def _select(self, v: np.ndarray, lower, middle, upper) -> np.ndarray:
        return np.where(v < self.lower, lower, np.where(v > self.upper, upper, middle))

    def breakpoint_defects(self, gamma: float) -> Dict[str, float]:
        """
        Relative jumps between adjacent closed-form branches at 1/k and k.

        Keys are ``"<function>@<breakpoint>"`` for S_k^gamma, S_k^0 and
        R_k^gamma (the last only when gamma > 1).
        """
        defects: Dict[str, float] = {}
        points = {"1/k": self.lower, "k": self.upper}
        families = {
            "s_gamma": lambda v: self._s_gamma_branches(float(gamma), v),
            "s_zero": self._s_zero_branches,
        }
        if gamma > 1.0:
            families["r_gamma"] = lambda v: self._r_gamma_branches(float(gamma), v)
        for name, branches in families.items():
            for label, point in points.items():
                lower, middle, upper = branches(np.array(point))
                left, right = (lower, middle) if label == "1/k" else (middle, upper)
                scale = max(abs(float(left)), abs(float(right)), 1e-300)
                defects[f"{name}@{label}"] = abs(float(left) - float(right)) / scale
        return defects


# ------------------------------------------------------------ quadrature oracles


def _integrate(func: Callable[[float], float], v: float, breakpoints) -> float:
    if v == 0.0:
        return 0.0
    lo, hi = min(0.0, v), max(0.0, v)
    inner = [b for b in breakpoints if lo < b < hi]
    value, _ = integrate.quad(func, lo, hi, points=inner or None, epsabs=0.0, epsrel=1e-13, limit=200)
    return value if v > 0.0 else -value


def quadrature_s_gamma(family: CutoffFamily, gamma: float, v: float) -> float:
    """S_k^gamma(v) by adaptive quadrature of its defining integral."""
    return gamma * _integrate(lambda y: family.truncate(y) ** (gamma - 1.0), float(v), (family.lower, family.upper))


def quadrature_s_zero(family: CutoffFamily, v: float) -> float:
    return _integrate(lambda y: 1.0 / family.truncate(y), float(v), (family.lower, family.upper))


def quadrature_r_gamma(family: CutoffFamily, gamma: float, v: float) -> float:
    """R_k^gamma(v) by quadrature of gamma * S_k^(gamma-1), the inner function in closed form."""
    return gamma * _integrate(
        lambda y: family.s_gamma(gamma - 1.0, y), float(v), (family.lower, family.upper)
    )


def truncated_internal_energy(family: CutoffFamily, alpha: float, v, boundary_value=0.0):
    """
    Internal energy of the truncated scheme,
    (R_k^alpha(v) - alpha * S_k^(alpha-1)(v_D) * v) / (alpha - 1).
    """
    v = np.asarray(v, dtype=float)
    linear = alpha * family.s_gamma(alpha - 1.0, np.asarray(boundary_value, dtype=float)) * v
    return (family.r_gamma(alpha, v) - linear) / (alpha - 1.0)
