"""Entropy-variable fluxes and the implicit Euler / Newton stepper."""

from .flux import (
    CHARGES,
    FLUX_FORMS,
    MOBILITIES,
    FluxForm,
    chemical_potential,
    edge_flux,
    face_mobility,
    mobility_weight,
    potential_and_slope,
)
from .stepper import (
    DriftDiffusionSolver,
    NewtonReport,
    TimeStepper,
    advance,
    assemble_residual,
    finite_difference_jacobian,
    integrate_interval,
    species_masses,
    terminal_current,
)

__all__ = [
    'CHARGES',
    'FLUX_FORMS',
    'MOBILITIES',
    'FluxForm',
    'chemical_potential',
    'edge_flux',
    'face_mobility',
    'mobility_weight',
    'potential_and_slope',
    'DriftDiffusionSolver',
    'NewtonReport',
    'TimeStepper',
    'advance',
    'assemble_residual',
    'finite_difference_jacobian',
    'integrate_interval',
    'species_masses',
    'terminal_current',
]
