"""Mixed Dirichlet-Neumann Poisson solver."""

import numpy as np
import pytest

from src.harness.convergence import poisson_convergence
from src.model import BoundarySpec, ConfigurationError, ContactData, ModelParams, ParameterError, build_uniform_mesh
from src.poisson import (
    PoissonSystem,
    electric_quadratic_form,
    grad_lr_norm,
    harmonic_lift,
    solve_poisson,
)


def _contact(v_d=0.0):
    return ContactData(n_d=1.0, p_d=1.0, v_d=v_d)


@pytest.mark.parametrize("dim, levels, base", [(1, 4, 8), (2, 3, 8)])
def test_manufactured_solution_order(dim, levels, base):
    table = poisson_convergence("poisson-manufactured", levels, base, dim)
    errors = [row.error for row in table.rows]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert table.min_order >= 1.9


@pytest.mark.parametrize("debye_length", [1.0, 0.5])
def test_mixed_problem_error_is_a_constant_shift(debye_length):
    cells = 20
    mesh = build_uniform_mesh(1, [1.0], [cells])
    bc = BoundarySpec(contacts={"left": _contact()})
    system = PoissonSystem.for_boundary(mesh, bc, debye_length)
    x = mesh.centers[:, 0]
    v = system.solve(np.full(cells, debye_length ** 2), np.zeros(1))
    h = 1.0 / cells
    np.testing.assert_allclose(v - (0.5 * x ** 2 - x), -h * h / 8.0, atol=1e-12)


def test_mixed_case_converges_at_second_order():
    table = poisson_convergence("poisson-mixed", 4, 8)
    for order in table.orders:
        assert order == pytest.approx(2.0, abs=1e-6)


def test_contact_values_and_insulated_faces():
    mesh = build_uniform_mesh(1, [1.0], [10])
    bc = BoundarySpec(contacts={"left": _contact(0.0), "right": _contact(2.0)})
    params = ModelParams(alpha_n=1.5, alpha_p=1.5, alpha_d=1.5, debye_length=0.3)
    ones = np.ones(mesh.num_cells)
    v = solve_poisson(mesh, bc, params, ones, ones, np.zeros(mesh.num_cells))
    # neutral charge: linear profile through the contact values
    np.testing.assert_allclose(v, 2.0 * mesh.centers[:, 0], atol=1e-12)


def test_gauge_mode_pins_the_mean():
    mesh = build_uniform_mesh(2, [1.0, 1.0], [8, 8])
    x, y = mesh.centers.T
    system = PoissonSystem(mesh, np.zeros(0, dtype=int), 0.7, gauge=True)
    v = system.solve(np.cos(np.pi * x) * np.cos(np.pi * y) + 3.0)
    assert np.sum(mesh.volumes * v) == pytest.approx(0.0, abs=1e-12)
    iterative = system.solve(np.cos(np.pi * x) * np.cos(np.pi * y) + 3.0, solver="iterative", tol=1e-8)
    np.testing.assert_allclose(iterative, v, atol=1e-5)


def test_iterative_matches_direct_with_contacts():
    mesh = build_uniform_mesh(2, [1.0, 1.0], [6, 6], {"anode": ["left", "bottom"]})
    bc = BoundarySpec(contacts={"anode": _contact(1.0)})
    system = PoissonSystem.for_boundary(mesh, bc, 1.0)
    f = np.sin(np.pi * mesh.centers[:, 0])
    face_values = np.ones(bc.dirichlet_faces(mesh).size)
    direct = system.solve(f, face_values)
    iterative = system.solve(f, face_values, solver="iterative", tol=1e-9)
    np.testing.assert_allclose(iterative, direct, atol=1e-6)


def test_singular_configurations_are_rejected():
    mesh = build_uniform_mesh(1, [1.0], [4])
    with pytest.raises(ConfigurationError, match="singular"):
        PoissonSystem(mesh, np.zeros(0, dtype=int), 1.0)
    with pytest.raises(ConfigurationError, match="all-insulating"):
        PoissonSystem(mesh, np.array([0]), 1.0, gauge=True)


def test_harmonic_lift_of_linear_data_is_linear():
    mesh = build_uniform_mesh(1, [1.0], [16])
    bc = BoundarySpec(contacts={"left": _contact(), "right": _contact()})
    lift = harmonic_lift(mesh, bc, np.array([1.0, 3.0]))
    np.testing.assert_allclose(lift, 1.0 + 2.0 * mesh.centers[:, 0], atol=1e-12)
    assert np.all(harmonic_lift(mesh, BoundarySpec(gauge=True), np.zeros(0)) == 0.0)


def test_gradient_norms_of_a_linear_potential():
    cells = 16
    mesh = build_uniform_mesh(1, [1.0], [cells])
    x = mesh.centers[:, 0]
    bc = BoundarySpec(contacts={"left": _contact(0.0), "right": _contact(1.0)})
    assert grad_lr_norm(mesh, x, 3.0, bc) == pytest.approx(1.0)
    assert grad_lr_norm(mesh, x, np.inf, bc) == pytest.approx(1.0)
    interior = (cells - 1) / cells
    assert grad_lr_norm(mesh, x, 2.0) == pytest.approx(np.sqrt(interior))
    assert electric_quadratic_form(mesh, x, 0.5) == pytest.approx(0.5 * 0.25 * interior)


def test_gradient_norm_exponent_range():
    mesh = build_uniform_mesh(1, [1.0], [4])
    with pytest.raises(ParameterError, match="at least 1"):
        grad_lr_norm(mesh, np.zeros(4), 0.5)


def test_zero_source_obeys_the_maximum_principle():
    mesh = build_uniform_mesh(2, [1.0, 1.0], [12, 12], {"anode": ["left"], "cathode": ["right"]})
    bc = BoundarySpec(contacts={"anode": _contact(0.3), "cathode": _contact(1.7)})
    params = ModelParams(alpha_n=1.5, alpha_p=1.5, alpha_d=1.5, debye_length=0.4)
    ones = np.ones(mesh.num_cells)
    v = solve_poisson(mesh, bc, params, ones, ones, np.zeros(mesh.num_cells))
    assert v.min() >= 0.3 - 1e-12
    assert v.max() <= 1.7 + 1e-12
    assert v.min() < v.max()


def test_operator_is_symmetric_and_matches_the_energy():
    mesh = build_uniform_mesh(2, [1.0, 0.5], [6, 4], {"anode": ["bottom"]})
    bc = BoundarySpec(contacts={"anode": _contact(0.0)})
    system = PoissonSystem.for_boundary(mesh, bc, 0.6)
    asymmetry = system.operator - system.operator.T
    assert abs(asymmetry).max() <= 1e-14
    w = np.random.default_rng(3).normal(size=mesh.num_cells)
    energy = electric_quadratic_form(mesh, w, 0.6, bc.dirichlet_faces(mesh))
    assert system.quadratic_form(w) == pytest.approx(energy, rel=1e-12)
    assert energy > 0.0


def test_gradient_norm_of_a_sine():
    mesh = build_uniform_mesh(1, [1.0], [256])
    bc = BoundarySpec(contacts={"left": _contact(0.0), "right": _contact(0.0)})
    v = np.sin(np.pi * mesh.centers[:, 0])
    assert grad_lr_norm(mesh, v, 2.0, bc) == pytest.approx(np.pi / np.sqrt(2.0), rel=1e-3)
