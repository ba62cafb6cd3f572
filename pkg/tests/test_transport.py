"""Fluxes, the coupled implicit Euler step and its structural properties."""

import numpy as np
import pytest

from src.diagnostics import BoundaryLifts, barenblatt_profile, dissipation, free_energy
from src.model import (
    BoundarySpec,
    ConfigurationError,
    ContactData,
    DataError,
    DomainError,
    ModelParams,
    ParameterError,
    State,
    StepFailure,
    build_uniform_mesh,
    initial_state,
)
from src.transport import (
    DriftDiffusionSolver,
    NewtonReport,
    TimeStepper,
    assemble_residual,
    chemical_potential,
    edge_flux,
    finite_difference_jacobian,
    integrate_interval,
    species_masses,
)

ALPHA = 5.0 / 3.0


def _params(**kw):
    values = dict(alpha_n=ALPHA, alpha_p=ALPHA, alpha_d=ALPHA, debye_length=0.5)
    values.update(kw)
    return ModelParams(**values)


def _contacts(v_left=0.0, v_right=1.0):
    return BoundarySpec(
        contacts={
            "left": ContactData(n_d=1.0, p_d=1.0, v_d=v_left),
            "right": ContactData(n_d=1.0, p_d=1.0, v_d=v_right),
        }
    )


def _insulated_state(mesh):
    return initial_state(
        mesh,
        lambda x: 0.5 + 0.8 * np.exp(-0.5 * ((x - 0.3) / 0.1) ** 2),
        lambda x: 0.4 + 0.8 * x,
        lambda x: 0.2 + np.where((x > 0.5) & (x < 0.9), np.sin(np.pi * (x - 0.5) / 0.4) ** 2, 0.0),
    )


# ------------------------------------------------------------------ fluxes


def test_chemical_potential():
    assert chemical_potential(1.0, 2.0) == pytest.approx(2.0)
    assert chemical_potential(0.0, ALPHA) == 0.0
    with pytest.raises(DomainError):
        chemical_potential(-1.0, 2.0)
    with pytest.raises(ParameterError):
        chemical_potential(1.0, 1.0)


def test_edge_flux_value_and_signs():
    assert edge_flux("d", 1.0, 0.5, 0.0, 0.0, 0.1, 2.0) == pytest.approx(7.5)
    # potential rising to the right pulls electrons right and pushes holes left
    assert edge_flux("n", 1.0, 1.0, 0.0, 1.0, 0.1, 2.0) > 0.0
    assert edge_flux("p", 1.0, 1.0, 0.0, 1.0, 0.1, 2.0) < 0.0
    assert edge_flux("p", 0.7, 0.7, 0.3, 0.3, 0.1, ALPHA) == 0.0


@pytest.mark.parametrize("mobility", ["arithmetic", "upwind"])
@pytest.mark.parametrize("species", ["n", "p", "d"])
def test_edge_flux_is_antisymmetric(species, mobility):
    forward = edge_flux(species, 0.8, 0.3, 0.1, -0.4, 0.05, ALPHA, mobility=mobility)
    backward = edge_flux(species, 0.3, 0.8, -0.4, 0.1, 0.05, ALPHA, mobility=mobility)
    assert forward == pytest.approx(-backward)


def test_edge_flux_rejects_bad_input():
    with pytest.raises(ParameterError, match="distance"):
        edge_flux("n", 1.0, 1.0, 0.0, 0.0, 0.0, 2.0)
    with pytest.raises(ParameterError, match="Unknown species"):
        edge_flux("x", 1.0, 1.0, 0.0, 0.0, 0.1, 2.0)
    with pytest.raises(ParameterError, match="Unknown mobility"):
        edge_flux("n", 1.0, 0.5, 0.0, 0.0, 0.1, 2.0, mobility="harmonic")


# ---------------------------------------------------------------- Jacobian


@pytest.mark.parametrize(
    "mobility, cutoff_k, gauge",
    [("arithmetic", None, False), ("upwind", None, False), ("arithmetic", 4.0, False), ("arithmetic", None, True)],
)
def test_analytic_jacobian_matches_finite_differences(mobility, cutoff_k, gauge):
    mesh = build_uniform_mesh(1, [1.0], [8])
    bc = BoundarySpec(gauge=True) if gauge else _contacts()
    solver = DriftDiffusionSolver(mesh, bc, _params(cutoff_k=cutoff_k), TimeStepper(mobility=mobility))
    x = mesh.centers[:, 0]
    old = initial_state(mesh, 1.0 + 0.3 * x, 1.2 - 0.5 * x ** 2, 0.6 + 0.2 * np.sin(3.0 * x))
    candidate = initial_state(mesh, 1.1 + 0.2 * x, 1.1 - 0.4 * x, 0.7 + 0.1 * np.cos(2.0 * x))
    vec = solver.pack(candidate)
    vec[solver.num_cells * 3 : solver.num_cells * 4] += 0.3 * np.sin(2.0 * x)
    analytic = solver.jacobian(old, vec, 1e-2).toarray()
    numeric = finite_difference_jacobian(solver, old, vec, 1e-2)
    scale = np.max(np.abs(numeric))
    np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6 * scale)


# ----------------------------------------------------------------- stepping


def test_insulated_run_dissipates_energy_and_keeps_vacancies():
    mesh = build_uniform_mesh(1, [1.0], [64])
    bc = BoundarySpec(gauge=True)
    params = _params()
    dt = 1e-3
    solver = DriftDiffusionSolver(mesh, bc, params, TimeStepper(dt=dt, newton_tol=1e-12))
    lifts = BoundaryLifts.build(mesh, bc)
    state = solver.with_potential(_insulated_state(mesh))
    energy = free_energy(mesh, bc, params, state, lifts=lifts).total
    mass_d = species_masses(mesh, state)["d"]
    for step in range(1, 201):
        state, report = solver.step(state, step * dt)
        assert report.converged
        new_energy = free_energy(mesh, bc, params, state, lifts=lifts).total
        assert new_energy - energy <= 1e-10 * max(1.0, abs(energy))
        assert new_energy - energy + dt * dissipation(mesh, params, state, bc=bc) <= 1e-9
        assert abs(species_masses(mesh, state)["d"] - mass_d) <= 1e-12 * max(1.0, abs(mass_d))
        energy = new_energy
    assert min(state.n.min(), state.p.min(), state.d.min()) >= 0.0


def test_truncated_scheme_dissipates_truncated_energy():
    mesh = build_uniform_mesh(1, [1.0], [32])
    bc = BoundarySpec(gauge=True)
    params = _params(cutoff_k=4.0)
    solver = DriftDiffusionSolver(mesh, bc, params, TimeStepper(newton_tol=1e-12))
    state = solver.with_potential(_insulated_state(mesh))
    energy = free_energy(mesh, bc, params, state).total
    for step in range(1, 21):
        state, _ = solver.step(state, step * 1e-3)
        new_energy = free_energy(mesh, bc, params, state, truncated=True).total
        assert new_energy <= energy + 1e-10
        energy = new_energy


def test_porous_medium_limit_follows_the_self_similar_profile():
    mesh = build_uniform_mesh(1, [1.0], [200])
    params = ModelParams(alpha_n=2.0, alpha_p=2.0, alpha_d=2.0)
    dt, t0, t_end, c = 2e-4, 0.01, 0.03, 0.05
    solver = DriftDiffusionSolver(mesh, BoundarySpec(gauge=True), params, TimeStepper(dt=dt, drift=False))
    x = mesh.centers[:, 0]
    state = initial_state(mesh, 1.0, 1.0, barenblatt_profile(x, t0, 2.0, c, 0.5))
    state = State(time=t0, n=state.n, p=state.p, d=state.d)
    for step in range(1, 101):
        state, _ = integrate_interval(solver, state, t0 + step * dt)
    exact = barenblatt_profile(x, t_end, 2.0, c, 0.5)
    error = np.sum(mesh.volumes * np.abs(state.d - exact)) / np.sum(mesh.volumes * exact)
    assert error < 0.05
    np.testing.assert_allclose(state.n, 1.0, atol=1e-12)


def test_contact_currents_balance_the_charge():
    mesh = build_uniform_mesh(1, [1.0], [32])
    bc = _contacts(0.0, 1.0)
    params = _params()
    dt = 1e-3
    solver = DriftDiffusionSolver(mesh, bc, params, TimeStepper(dt=dt, newton_tol=1e-12))
    state = solver.with_potential(_insulated_state(mesh))

    def charge(s):
        masses = species_masses(mesh, s)
        return masses["p"] + masses["d"] - masses["n"]

    for step in range(1, 11):
        new, _ = solver.step(state, step * dt)
        current = solver.contact_current(new, "left") + solver.contact_current(new, "right")
        assert (charge(new) - charge(state)) / dt + current == pytest.approx(0.0, abs=1e-8)
        state = new


def test_reversed_bias_mirrors_the_device():
    mesh = build_uniform_mesh(1, [1.0], [24])
    params = _params()
    stepper = TimeStepper(dt=2e-3, newton_tol=1e-12)
    profile = lambda x: 0.3 + 0.6 * x ** 2
    forward = DriftDiffusionSolver(mesh, _contacts(0.0, 1.0), params, stepper)
    reverse = DriftDiffusionSolver(mesh, _contacts(0.0, -1.0), params, stepper)
    a = initial_state(mesh, 1.0, 1.0, profile)
    b = initial_state(mesh, 1.0, 1.0, lambda x: profile(1.0 - x))
    for step in range(1, 11):
        a, _ = forward.step(a, step * 2e-3)
        b, _ = reverse.step(b, step * 2e-3)
    for s in ("n", "p", "d"):
        np.testing.assert_allclose(b.species(s), a.species(s)[::-1], atol=1e-9)
    assert reverse.contact_current(b, "left") == pytest.approx(forward.contact_current(a, "right"), abs=1e-9)


def test_residual_is_local():
    mesh = build_uniform_mesh(1, [1.0], [16])
    bc = _contacts()
    params = _params()
    x = mesh.centers[:, 0]
    old = initial_state(mesh, 1.0, 1.0, 0.5 + x)
    candidate = State(time=1e-3, n=1.0 + 0.1 * x, p=1.0 - 0.1 * x, d=0.5 + x, v=x.copy())
    base = assemble_residual(mesh, bc, params, old, candidate, 1e-3)
    bumped_d = candidate.d.copy()
    bumped_d[8] += 0.2
    bumped = State(time=1e-3, n=candidate.n, p=candidate.p, d=bumped_d, v=candidate.v)
    changed = assemble_residual(mesh, bc, params, old, bumped, 1e-3)
    rows = np.flatnonzero(np.abs(changed - base) > 0.0)
    np.testing.assert_array_equal(rows, 32 + np.array([7, 8, 9]))


def test_converged_step_has_small_residual():
    mesh = build_uniform_mesh(1, [1.0], [16])
    bc = _contacts()
    params = _params()
    solver = DriftDiffusionSolver(mesh, bc, params, TimeStepper(newton_tol=1e-11))
    old = solver.with_potential(_insulated_state(mesh))
    new, report = solver.step(old, 1e-3)
    residual = assemble_residual(mesh, bc, params, old, new, 1e-3)
    assert np.max(np.abs(residual * 1e-3 / np.tile(mesh.volumes, 3))) <= 1e-11
    assert report.iterations >= 1
    assert report.history[-1] == report.residual


def test_truncated_residual_matches_direct_inside_the_band():
    k = 8.0
    mesh = build_uniform_mesh(1, [1.0], [16])
    bc = _contacts()
    rng = np.random.default_rng(7)

    def draw():
        return rng.uniform(2.0 / k, k / 2.0, mesh.num_cells)

    old = State(time=0.0, n=draw(), p=draw(), d=draw())
    candidate = State(time=1e-3, n=draw(), p=draw(), d=draw(), v=rng.uniform(-1.0, 1.0, mesh.num_cells))
    direct = assemble_residual(mesh, bc, _params(), old, candidate, 1e-3)
    truncated = assemble_residual(mesh, bc, _params(cutoff_k=k), old, candidate, 1e-3)
    np.testing.assert_allclose(truncated, direct, rtol=0.0, atol=1e-10 * np.max(np.abs(direct)))

    outside = State(time=1e-3, n=candidate.n, p=candidate.p, d=np.full(mesh.num_cells, 0.5 / k), v=candidate.v)
    outside.d[5] = 2.0
    gap = assemble_residual(mesh, bc, _params(cutoff_k=k), old, outside, 1e-3) - assemble_residual(
        mesh, bc, _params(), old, outside, 1e-3
    )
    assert np.max(np.abs(gap)) > 1e-6


def test_residual_shape_mismatch():
    mesh = build_uniform_mesh(1, [1.0], [8])
    old = initial_state(mesh, 1.0, 1.0, 1.0)
    bad = State(time=0.0, n=np.ones(7), p=np.ones(8), d=np.ones(8), v=np.zeros(8))
    with pytest.raises(DataError, match="does not match"):
        assemble_residual(mesh, _contacts(), _params(), old, bad, 1e-3)


def test_interval_is_halved_after_failures(monkeypatch):
    mesh = build_uniform_mesh(1, [1.0], [16])
    solver = DriftDiffusionSolver(mesh, _contacts(), _params(), TimeStepper())
    real_step = solver.step

    def limited(state, t_target):
        if t_target - state.time > 1.5e-3:
            raise StepFailure("step too long", NewtonReport(dt=t_target - state.time))
        return real_step(state, t_target)

    monkeypatch.setattr(solver, "step", limited)
    state = solver.with_potential(_insulated_state(mesh))
    end, reports = integrate_interval(solver, state, 4e-3)
    assert len(reports) == 4
    assert end.time == pytest.approx(4e-3)
    assert all(r.dt == pytest.approx(1e-3) for r in reports)


def test_interval_hook_sees_every_substep_end(monkeypatch):
    mesh = build_uniform_mesh(1, [1.0], [16])
    solver = DriftDiffusionSolver(mesh, _contacts(), _params(), TimeStepper())
    real_step = solver.step

    def limited(state, t_target):
        if t_target - state.time > 1.5e-3:
            raise StepFailure("step too long", NewtonReport(dt=t_target - state.time))
        return real_step(state, t_target)

    monkeypatch.setattr(solver, "step", limited)
    seen = []
    state = solver.with_potential(_insulated_state(mesh))
    integrate_interval(solver, state, 4e-3, before_step=seen.append)
    assert seen == pytest.approx([4e-3, 2e-3, 1e-3, 2e-3, 4e-3, 3e-3, 4e-3])


def test_step_failure_below_minimum_step():
    mesh = build_uniform_mesh(1, [1.0], [16])
    stepper = TimeStepper(dt=0.1, newton_max_iter=1, newton_tol=1e-14, dt_min=0.02)
    solver = DriftDiffusionSolver(mesh, _contacts(), _params(), stepper)
    with pytest.raises(StepFailure, match="dt_min") as info:
        integrate_interval(solver, _insulated_state(mesh), 0.1)
    assert info.value.report is not None


def test_bias_changes_the_contact_potential():
    mesh = build_uniform_mesh(1, [1.0], [16])
    solver = DriftDiffusionSolver(mesh, _contacts(0.0, 1.0), _params(), TimeStepper())
    solver.set_bias(-0.5)
    np.testing.assert_allclose(solver.face_potential, [0.0, -0.5])
    with pytest.raises(ConfigurationError, match="Unknown boundary segment"):
        solver.contact_current(initial_state(mesh, 1.0, 1.0, 1.0), "top")


def test_stepper_parameters_are_validated():
    with pytest.raises(ParameterError, match="dt"):
        TimeStepper(dt=0.0)
    with pytest.raises(ParameterError, match="mobility"):
        TimeStepper(mobility="harmonic")
    with pytest.raises(ParameterError, match="jacobian"):
        TimeStepper(jacobian="secant")
    assert TimeStepper().floor_for(None) == 1e-14
