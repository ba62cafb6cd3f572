"""
Exponent calculus

Interpolation exponents, integrability thresholds and the two bootstrap
recursions behind the boundedness argument. Every routine accepts floats or
``fractions.Fraction``; the threshold flags are decided exactly for
rational input so that boundary values such as 6/5 are classified without
rounding.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import List, Optional, Union

from src.model.errors import ParameterError

Number = Union[float, Fraction]

SIX_FIFTHS = Fraction(6, 5)
THREE_HALVES = Fraction(3, 2)
ALPHA_STAR = (11.0 + math.sqrt(37.0)) / 14.0
RECURSION_TOLERANCE = 1e-12


def _require_alpha(alpha: Number) -> None:
    if not alpha > 1:
        raise ParameterError(f"alpha must exceed 1, got {alpha}", name="alpha", value=alpha)


def _exact(alpha: Number) -> bool:
    return isinstance(alpha, Rational)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=RECURSION_TOLERANCE, abs_tol=RECURSION_TOLERANCE)


def theta(alpha: Number) -> Number:
    """(2a - 1)(3 - a) / (5a - 3)."""
    return (2 * alpha - 1) * (3 - alpha) / (5 * alpha - 3)


def theta_tilde(alpha: Number) -> Optional[Number]:
    """(2a - 1)(3 - 2a) / (5a - 3), defined for a < 3/2."""
    if not alpha < THREE_HALVES:
        return None
    return (2 * alpha - 1) * (3 - 2 * alpha) / (5 * alpha - 3)


def gradient_exponent(alpha: Number) -> Number:
    """(9 - 5a) / (5a - 3); below 1 exactly when a > 6/5."""
    return (9 - 5 * alpha) / (5 * alpha - 3)


def dual_exponent(alpha: Number) -> Number:
    """beta = 2a / (a + 1)."""
    return 2 * alpha / (alpha + 1)


def fixed_point_g(alpha: Number) -> Number:
    """G(a) = (21a^2 - 35a + 12) / (6 - 4a), the limit of the Moser exponents."""
    if not alpha < THREE_HALVES:
        raise ParameterError(f"G(alpha) needs alpha < 3/2, got {alpha}", name="alpha", value=alpha)
    return (21 * alpha ** 2 - 35 * alpha + 12) / (6 - 4 * alpha)


def passes_six_fifths(alpha: Number) -> bool:
    return Fraction(alpha) > SIX_FIFTHS


def passes_alpha_star(alpha: Number) -> bool:
    """alpha > (11 + sqrt(37)) / 14, the larger root of 7a^2 - 11a + 3."""
    if _exact(alpha):
        a = Fraction(alpha)
        return a > Fraction(11, 14) and 7 * a * a - 11 * a + 3 > 0
    return float(alpha) > ALPHA_STAR


@dataclass(frozen=True)
class ExponentReport:
    alpha: float
    theta: float
    theta_tilde: Optional[float]
    gradient_exponent: float
    beta_dual: float
    passes_6_5: bool
    passes_alpha_star: bool


def exponent_report(alpha: Number) -> ExponentReport:
    """
    Interpolation exponents and threshold flags for one diffusion exponent.

    Raises:
        ParameterError: If alpha <= 1
    """
    _require_alpha(alpha)
    tilde = theta_tilde(alpha)
    return ExponentReport(
        alpha=float(alpha),
        theta=float(theta(alpha)),
        theta_tilde=None if tilde is None else float(tilde),
        gradient_exponent=float(gradient_exponent(alpha)),
        beta_dual=float(dual_exponent(alpha)),
        passes_6_5=passes_six_fifths(alpha),
        passes_alpha_star=passes_alpha_star(alpha),
    )


def gradient_space_exponent(alpha: Number) -> float:
    """Integrability of grad v^alpha in space: 2a / (3 - a) for a < 3/2, otherwise a."""
    _require_alpha(alpha)
    if alpha < THREE_HALVES:
        return float(2 * alpha / (3 - alpha))
    return float(alpha)


def time_integrability_exponent(alpha: Number) -> float:
    """q = (5a - 3) / (3 - 2a), the time exponent of each bootstrap step (a < 3/2)."""
    _require_alpha(alpha)
    if not alpha < THREE_HALVES:
        raise ParameterError(f"Time exponent needs alpha < 3/2, got {alpha}", name="alpha", value=alpha)
    return float((5 * alpha - 3) / (3 - 2 * alpha))


# ----------------------------------------------------------------- Moser


@dataclass(frozen=True)
class MoserReport:
    alpha: float
    gammas: List[float]
    closed_form: List[float]
    fixed_point: float
    max_deviation: float
    increasing: bool

    @property
    def limit_exponent(self) -> float:
        """Integrability reached in the limit, G(alpha) + 1."""
        return self.fixed_point + 1.0

    @property
    def meets_target(self) -> bool:
        return self.limit_exponent >= 1.5

    @property
    def consistent(self) -> bool:
        return all(_close(a, b) for a, b in zip(self.gammas, self.closed_form))


def _check_moser_range(alpha: Number) -> None:
    if not SIX_FIFTHS < Fraction(alpha) < THREE_HALVES:
        raise ParameterError(
            f"Moser iteration needs 6/5 < alpha < 3/2, got {alpha}", name="alpha", value=alpha
        )


def moser_sequence(alpha: Number, m_max: int) -> MoserReport:
    """
    Exponents gamma_0 .. gamma_{m_max} of the Moser bootstrap.

    gamma_0 = alpha - 1 and gamma_{m+1} = (21a^2 - 35a + 12)/(9 - 6a) + gamma_m / 3,
    compared against the closed form G(a)(1 - 3^-m) + (a - 1) 3^-m.

    Raises:
        ParameterError: If alpha is outside (6/5, 3/2) or m_max < 0
    """
    _check_moser_range(alpha)
    if m_max < 0:
        raise ParameterError("m_max must be nonnegative", name="m_max", value=m_max)
    a = float(alpha)
    shift = (21.0 * a * a - 35.0 * a + 12.0) / (9.0 - 6.0 * a)
    g = float(fixed_point_g(alpha))
    gammas = [a - 1.0]
    for _ in range(m_max):
        gammas.append(shift + gammas[-1] / 3.0)
    closed = [g * (1.0 - 3.0 ** -m) + (a - 1.0) * 3.0 ** -m for m in range(m_max + 1)]
    deviation = max(abs(x - y) / max(abs(y), 1.0) for x, y in zip(gammas, closed))
    return MoserReport(
        alpha=a,
        gammas=gammas,
        closed_form=closed,
        fixed_point=g,
        max_deviation=deviation,
        increasing=all(b > c for b, c in zip(gammas[1:], gammas[:-1])),
    )


def moser_interpolation_theta(alpha: Number, gamma: Number, gamma_m: Number) -> float:
    """
    Interpolation exponent of one Moser step from L^(gamma_m + 1) to L^(gamma + 1).

    (a + g)(5 - 3a + 3g - g_m) / ((3a + 3g - g_m - 1)(g - a + 2))
    """
    _require_alpha(alpha)
    a, g, gm = float(alpha), float(gamma), float(gamma_m)
    denominator = (3.0 * a + 3.0 * g - gm - 1.0) * (g - a + 2.0)
    if denominator <= 0.0:
        raise ParameterError("Moser step exponents out of range", name="gamma", value=gamma)
    return (a + g) * (5.0 - 3.0 * a + 3.0 * g - gm) / denominator


@dataclass(frozen=True)
class MoserStep:
    gamma_m: float
    gamma_next: float
    theta: float
    r: float
    q: float

    @property
    def closes(self) -> bool:
        """The Hoelder pairing r * q / (q - 1) = 2 that fixes gamma_next."""
        return math.isclose(self.r * self.q / (self.q - 1.0), 2.0, rel_tol=1e-10)


def moser_step_exponents(alpha: Number, gamma_m: Number) -> MoserStep:
    _check_moser_range(alpha)
    a, gm = float(alpha), float(gamma_m)
    gamma_next = (21.0 * a * a - 35.0 * a + 12.0) / (9.0 - 6.0 * a) + gm / 3.0
    r = (4.0 + 6.0 * gamma_next - 2.0 * gm) / (3.0 * a + 3.0 * gamma_next - gm - 1.0)
    return MoserStep(
        gamma_m=gm,
        gamma_next=gamma_next,
        theta=moser_interpolation_theta(alpha, gamma_next, gm),
        r=r,
        q=time_integrability_exponent(alpha),
    )


# -------------------------------------------------------------- Alikakos


@dataclass(frozen=True)
class AlikakosReport:
    gamma0: float
    alpha: float
    gammas: List[float]
    closed_form: List[float]
    ratio_bounds: List[bool] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return all(_close(a, b) for a, b in zip(self.gammas, self.closed_form))

    @property
    def bounded(self) -> bool:
        return all(self.ratio_bounds)


def alikakos_sequence(gamma0: Number, alpha: Number, k_max: int) -> AlikakosReport:
    """
    Doubling exponents gamma_k = 2 gamma_{k-1} + 1 - a of the L^infinity iteration.

    The closed form is 2^k (gamma_0 + 1 - a) + a - 1. For every k both
    2^k / gamma_k <= 1/c and (2^(k+1) - (k + 2)) / gamma_k <= 2/c are checked,
    with c = gamma_0 + 1 - a.

    Raises:
        ParameterError: If gamma0 <= 0, alpha <= 1 or gamma0 + 1 <= alpha
    """
    _require_alpha(alpha)
    if not gamma0 > 0:
        raise ParameterError(f"gamma0 must be positive, got {gamma0}", name="gamma0", value=gamma0)
    if not gamma0 + 1 > alpha:
        raise ParameterError(
            f"gamma0 + 1 must exceed alpha for an increasing sequence (gamma0={gamma0}, alpha={alpha})",
            name="gamma0",
            value=gamma0,
        )
    if k_max < 0:
        raise ParameterError("k_max must be nonnegative", name="k_max", value=k_max)
    a, g0 = float(alpha), float(gamma0)
    c = g0 + 1.0 - a
    gammas = [g0]
    for _ in range(k_max):
        gammas.append(2.0 * gammas[-1] + 1.0 - a)
    closed = [2.0 ** k * c + a - 1.0 for k in range(k_max + 1)]
    slack = 1.0 + RECURSION_TOLERANCE
    bounds = [
        2.0 ** k / gk <= slack / c and (2.0 ** (k + 1) - (k + 2)) / gk <= 2.0 * slack / c
        for k, gk in enumerate(gammas)
    ]
    return AlikakosReport(gamma0=g0, alpha=a, gammas=gammas, closed_form=closed, ratio_bounds=bounds)


@dataclass(frozen=True)
class HolderExponents:
    eta: float
    mu: float
    theta: float
    p: float
    q: float
    beta: float

    @property
    def balanced(self) -> bool:
        """1/(6 - mu) + 1/(3 + eta) + 1/2 = 1."""
        return math.isclose(1.0 / (6.0 - self.mu) + 1.0 / (3.0 + self.eta) + 0.5, 1.0, rel_tol=1e-12)

    @property
    def young_pair(self) -> bool:
        return math.isclose(1.0 / self.p + 1.0 / self.q, 1.0, rel_tol=1e-12) and math.isclose(
            (1.0 - self.theta) * self.q / 2.0, 1.0, rel_tol=1e-12
        )


def alikakos_holder_exponents(eta: float) -> HolderExponents:
    """
    Hoelder and Young exponents of one doubling step for a potential gradient in L^(3+eta).

    Raises:
        ParameterError: If eta <= 0
    """
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}", name="eta", value=eta)
    eta = float(eta)
    mu = 4.0 * eta / (1.0 + eta)
    th = (30.0 - 6.0 * mu) / (30.0 - 5.0 * mu)
    return HolderExponents(
        eta=eta,
        mu=mu,
        theta=th,
        p=2.0 / (1.0 + th),
        q=2.0 / (1.0 - th),
        beta=10.0 * (6.0 - mu) / mu,
    )
