"""Mixed Dirichlet-Neumann Poisson solver and potential norms."""

from .solver import (
    PoissonSystem,
    boundary_load,
    charge_source,
    electric_quadratic_form,
    elliptic_norm_pair,
    grad_lr_norm,
    harmonic_lift,
    solve_poisson,
    stiffness_matrix,
)

__all__ = [
    'PoissonSystem',
    'boundary_load',
    'charge_source',
    'electric_quadratic_form',
    'elliptic_norm_pair',
    'grad_lr_norm',
    'harmonic_lift',
    'solve_poisson',
    'stiffness_matrix',
]
