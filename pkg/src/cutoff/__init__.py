"""Truncation functions T_k, S_k, R_k and their inequality checks."""

from .functions import (
    CutoffFamily,
    quadrature_r_gamma,
    quadrature_s_gamma,
    quadrature_s_zero,
    truncated_internal_energy,
)
from .inequalities import InequalityMargin, TruncationReport, refine_samples, verify_lemma_inequalities

__all__ = [
    'CutoffFamily',
    'quadrature_r_gamma',
    'quadrature_s_gamma',
    'quadrature_s_zero',
    'truncated_internal_energy',
    'InequalityMargin',
    'TruncationReport',
    'refine_samples',
    'verify_lemma_inequalities',
]
