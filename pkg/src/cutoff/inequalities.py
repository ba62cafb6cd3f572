"""
Inequality margins for the truncation family

For a sample set, computes the smallest constants C for which

    TS:  T_k(v)^g             <= S_k^g(v) + C                  (g > 0)
    SR:  |S_k^g(v)|^(b/g)     <= C * R_k^b(v) + C              (b > 1, g >= b/2)
    vS:  v                    <= C * S_k^b(v)^(1/b) + C        (v >= 0, 0 < b <= 1)
    vR:  v                    <= delta * R_k^b(v) + C(delta)   (v >= 0, b > 1, delta > 0)

hold, and whether those constants are stable when the samples are refined.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from src.model.errors import ParameterError

from .functions import CutoffFamily


INEQUALITIES = ("TS", "SR", "vS", "vR")
REFINEMENT = 4
STABILITY_TOLERANCE = 0.01


@dataclass(frozen=True)
class InequalityMargin:
    name: str
    constant: float
    refined_constant: float

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.constant) and np.isfinite(self.refined_constant))

    @property
    def stable(self) -> bool:
        scale = max(abs(self.constant), abs(self.refined_constant), 1e-12)
        return abs(self.refined_constant - self.constant) <= STABILITY_TOLERANCE * scale

    @property
    def passed(self) -> bool:
        return self.finite and self.stable


@dataclass
class TruncationReport:
    k: float
    gamma: float
    beta: float
    delta: float
    margins: Dict[str, InequalityMargin] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.margins.values())

    def constant(self, name: str) -> float:
        return self.margins[name].constant


def refine_samples(samples: np.ndarray, factor: int = REFINEMENT) -> np.ndarray:
    """Insert ``factor - 1`` equispaced points between consecutive sorted samples."""
    pts = np.unique(np.asarray(samples, dtype=float))
    if pts.size < 2:
        return pts
    frac = np.arange(factor) / factor
    inner = pts[:-1, None] + frac[None, :] * np.diff(pts)[:, None]
    return np.concatenate([inner.ravel(), pts[-1:]])


def _check_ranges(name: str, gamma: float, beta: float, delta: float) -> Optional[str]:
    if name == "TS" and not gamma > 0.0:
        return "TS needs gamma > 0"
    if name == "SR" and not (beta > 1.0 and gamma >= beta / 2.0):
        return "SR needs beta > 1 and gamma >= beta / 2"
    if name == "vS" and not (0.0 < beta <= 1.0):
        return "vS needs 0 < beta <= 1"
    if name == "vR" and not (beta > 1.0 and delta > 0.0):
        return "vR needs beta > 1 and delta > 0"
    return None


def _constant(name: str, family: CutoffFamily, gamma: float, beta: float, delta: float, v: np.ndarray) -> float:
    if name == "TS":
        gap = family.truncate(v) ** gamma - family.s_gamma(gamma, v)
        return float(max(0.0, np.max(gap)))
    if name == "SR":
        lhs = np.abs(family.s_gamma(gamma, v)) ** (beta / gamma)
        return float(np.max(lhs / (family.r_gamma(beta, v) + 1.0)))
    v = v[v >= 0.0]
    if v.size == 0:
        raise ParameterError(f"{name} holds for v >= 0 only; no nonnegative samples given", name="samples")
    if name == "vS":
        root = np.maximum(family.s_gamma(beta, v), 0.0) ** (1.0 / beta)
        return float(np.max(v / (root + 1.0)))
    return float(max(0.0, np.max(v - delta * family.r_gamma(beta, v))))


def verify_lemma_inequalities(
    family: CutoffFamily,
    gamma: float,
    beta: float,
    samples: Sequence[float],
    delta: float = 1.0,
    which: Optional[Sequence[str]] = None,
) -> TruncationReport:
    """
    Measure the four truncation inequalities over a sample set.

    Args:
        family: Cutoff family at level k
        gamma, beta, delta: Inequality parameters
        samples: Sample points v
        which: Inequalities to check. ``None`` checks every inequality whose
            parameter range is satisfied.

    Returns:
        TruncationReport with one margin per checked inequality

    Raises:
        ParameterError: If a requested inequality is outside its parameter
            range, or nothing is left to check
    """
    samples = np.unique(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ParameterError("Sample set is empty", name="samples")

    if which is None:
        names = [n for n in INEQUALITIES if _check_ranges(n, gamma, beta, delta) is None]
        if not names:
            raise ParameterError(
                f"No inequality applies to gamma={gamma}, beta={beta}, delta={delta}",
                name="beta",
                value=beta,
            )
    else:
        names = list(which)
        for name in names:
            if name not in INEQUALITIES:
                raise ParameterError(f"Unknown inequality '{name}'. Known: {list(INEQUALITIES)}", name="which")
            problem = _check_ranges(name, gamma, beta, delta)
            if problem is not None:
                raise ParameterError(f"{problem} (gamma={gamma}, beta={beta}, delta={delta})", name=name)

    refined = refine_samples(samples)
    report = TruncationReport(k=family.k, gamma=gamma, beta=beta, delta=delta)
    for name in names:
        report.margins[name] = InequalityMargin(
            name=name,
            constant=_constant(name, family, gamma, beta, delta, samples),
            refined_constant=_constant(name, family, gamma, beta, delta, refined),
        )
    return report
