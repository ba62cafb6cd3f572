"""Energies, norms, exponent calculus and reference solutions."""

from .energy import (
    BoundaryLifts,
    EnergyBreakdown,
    QuadraticBoundReport,
    dissipation,
    free_energy,
    gronwall_rate,
    power_law_identity_residual,
    quadratic_ratio_limit,
    relative_density,
    relative_free_energy,
    verify_quadratic_bound,
)
from .exponents import (
    ALPHA_STAR,
    AlikakosReport,
    ExponentReport,
    HolderExponents,
    MoserReport,
    MoserStep,
    alikakos_holder_exponents,
    alikakos_sequence,
    exponent_report,
    fixed_point_g,
    gradient_space_exponent,
    moser_interpolation_theta,
    moser_sequence,
    moser_step_exponents,
    time_integrability_exponent,
)
from .norms import bounded_growth, lq_norm
from .oracles import barenblatt_profile, barenblatt_support

__all__ = [
    'BoundaryLifts',
    'EnergyBreakdown',
    'QuadraticBoundReport',
    'dissipation',
    'free_energy',
    'gronwall_rate',
    'power_law_identity_residual',
    'quadratic_ratio_limit',
    'relative_density',
    'relative_free_energy',
    'verify_quadratic_bound',
    'ALPHA_STAR',
    'AlikakosReport',
    'ExponentReport',
    'HolderExponents',
    'MoserReport',
    'MoserStep',
    'alikakos_holder_exponents',
    'alikakos_sequence',
    'exponent_report',
    'fixed_point_g',
    'gradient_space_exponent',
    'moser_interpolation_theta',
    'moser_sequence',
    'moser_step_exponents',
    'time_integrability_exponent',
    'bounded_growth',
    'lq_norm',
    'barenblatt_profile',
    'barenblatt_support',
]
