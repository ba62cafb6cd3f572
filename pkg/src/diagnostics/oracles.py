"""Closed-form reference solutions used by the harness and the tests."""

import numpy as np

from src.model.errors import ParameterError


def barenblatt_profile(x, t: float, alpha: float, c: float, center: float = 0.0):
    """
    Self-similar solution of u_t = (u^alpha)_xx on the real line.

    u(x, t) = t^-k * (c - kappa * (x - center)^2 / t^(2k))_+^(1/(alpha - 1))
    with k = 1 / (alpha + 1) and kappa = k (alpha - 1) / (2 alpha).

    Raises:
        ParameterError: If alpha <= 1, t <= 0 or c <= 0
    """
    if not alpha > 1.0:
        raise ParameterError(f"alpha must exceed 1, got {alpha}", name="alpha", value=alpha)
    if not t > 0.0:
        raise ParameterError(f"Time must be positive, got {t}", name="t", value=t)
    if not c > 0.0:
        raise ParameterError(f"Profile constant must be positive, got {c}", name="c", value=c)
    k = 1.0 / (alpha + 1.0)
    kappa = k * (alpha - 1.0) / (2.0 * alpha)
    xi = (np.asarray(x, dtype=float) - center) / t ** k
    u = t ** -k * np.maximum(c - kappa * xi ** 2, 0.0) ** (1.0 / (alpha - 1.0))
    return float(u) if u.ndim == 0 else u


def barenblatt_support(t: float, alpha: float, c: float) -> float:
    """Half-width of the support of ``barenblatt_profile`` at time t."""
    k = 1.0 / (alpha + 1.0)
    kappa = k * (alpha - 1.0) / (2.0 * alpha)
    return float(np.sqrt(c / kappa) * t ** k)
