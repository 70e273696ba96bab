"""Flux layout, semi-discrete right-hand side, and the implicit stepper."""

import numpy as np
import pytest

from decflow import diagnostics as dg
from decflow import fields as fd
from decflow import integrator as ig
from decflow import mesh as msh
from decflow import physics as ph

GAS = ph.GasParams()
INVISCID = ph.PhysParams(mu=0.0, zeta=0.0, lam=0.0, insulated=True)


def rest_state(geom):
    return ph.FluidState(np.zeros((geom.n, geom.n)), np.ones(geom.n), np.zeros(geom.n))


def shear_state(geom, amp=0.3):
    a = fd.init_from_velocity(
        geom, lambda p: np.array([amp * np.sin(2 * np.pi * p[1]), 0.0]), no_slip=True
    )
    return ph.FluidState(a, np.ones(geom.n), np.zeros(geom.n))


# ---------------------------------------------------------------------------
# Flux layout
# ---------------------------------------------------------------------------


def test_layout_size_frozen(gen65, rhombus):
    assert ig.FluxLayout.build(gen65).size == 52
    # Every rhombus cell touches the boundary: no free fluxes at all.
    assert ig.FluxLayout.build(rhombus).size == 0


def test_layout_roundtrip_and_membership(gen65, rng):
    layout = ig.FluxLayout.build(gen65)
    flux = rng.normal(size=layout.size)
    a = layout.to_matrix(flux)
    np.testing.assert_allclose(layout.from_matrix(a), flux, rtol=1e-14)
    res = fd.membership_residuals(gen65, a)
    assert res["S"] < 1e-13  # row sums re-add what the diagonal absorbed
    assert res["V"] < 1e-15
    assert res["support"] == 0.0
    assert res["no_slip"] == 0.0


def test_momentum_vector_values(gen65, rng):
    layout = ig.FluxLayout.build(gen65)
    a = layout.to_matrix(rng.normal(size=layout.size))
    d = 0.5 + rng.random(gen65.n)
    m = ig.momentum_vector(gen65, layout, a, d)
    z = fd.flat(gen65, a, two_away=False)
    np.testing.assert_array_equal(m, (fd.pair_mean(d) * z)[layout.rows, layout.cols])


# ---------------------------------------------------------------------------
# Semi-discrete system
# ---------------------------------------------------------------------------


def test_rhs_vanishes_at_rest(gen65):
    layout = ig.FluxLayout.build(gen65)
    mdot, ddot, sdot = ig.semi_discrete_rhs(gen65, rest_state(gen65), GAS, INVISCID, layout)
    np.testing.assert_array_equal(mdot, 0.0)
    np.testing.assert_array_equal(ddot, 0.0)
    np.testing.assert_array_equal(sdot, 0.0)


def test_rk4_preserves_mass(gen65):
    state = shear_state(gen65)
    mass0 = np.sum(gen65.omega * state.d)
    for _ in range(10):
        state = ig.rk4_step(gen65, state, 1e-3, GAS, INVISCID)
    assert np.sum(gen65.omega * state.d) == pytest.approx(mass0, rel=1e-12)


# ---------------------------------------------------------------------------
# Variational stepper
# ---------------------------------------------------------------------------


def test_rest_is_a_fixed_point(gen65):
    stepper = ig.VariationalStepper(gen65, GAS, INVISCID, h=1e-2)
    state = rest_state(gen65)
    for _ in range(20):
        state, report = stepper.step(state)
        assert report.newton_iters == 0
    np.testing.assert_array_equal(state.a, 0.0)
    np.testing.assert_array_equal(state.d, 1.0)
    np.testing.assert_array_equal(state.s, 0.0)


@pytest.mark.parametrize("kind", ["exponential", "cayley"])
def test_mass_is_conserved(gen65, kind):
    phys = ph.PhysParams(mu=0.01, zeta=0.0, lam=0.01, insulated=True)
    stepper = ig.VariationalStepper(gen65, GAS, phys, h=1e-3, kind=kind)
    state = shear_state(gen65)
    mass0 = np.sum(gen65.omega * state.d)
    drift = 0.0
    for _ in range(100):
        state, _ = stepper.step(state)
        drift = max(drift, abs(np.sum(gen65.omega * state.d) - mass0))
    assert drift < 1e-12 * mass0


def test_entropy_never_decreases(gen65):
    phys = ph.PhysParams(mu=0.01, zeta=0.0, lam=0.01, insulated=True)
    stepper = ig.VariationalStepper(gen65, GAS, phys, h=1e-3)
    state = shear_state(gen65)
    total = np.sum(gen65.omega * state.s)
    for _ in range(100):
        state, _ = stepper.step(state)
        new = np.sum(gen65.omega * state.s)
        assert new >= total - 1e-12
        total = new


def test_friction_drains_kinetic_energy(gen65):
    phys = ph.PhysParams(mu=0.05, zeta=0.0, lam=0.0, insulated=True)
    stepper = ig.VariationalStepper(gen65, GAS, phys, h=1e-3)
    state = shear_state(gen65)
    kin0 = 0.5 * np.sum(gen65.omega * state.d * ph.kinetic_density(gen65, state.a))
    for _ in range(200):
        state, _ = stepper.step(state)
    kin = 0.5 * np.sum(gen65.omega * state.d * ph.kinetic_density(gen65, state.a))
    assert kin < 0.8 * kin0


def test_step_history_matches_run(gen65):
    phys = ph.PhysParams(mu=0.01, zeta=0.0, lam=0.0, insulated=True)
    by_run = ig.VariationalStepper(gen65, GAS, phys, h=1e-3).run(shear_state(gen65), 5)
    state = shear_state(gen65)
    stepper = ig.VariationalStepper(gen65, GAS, phys, h=1e-3)
    for _ in range(5):
        state, _ = stepper.step(state)
    np.testing.assert_array_equal(by_run.a, state.a)
    np.testing.assert_array_equal(by_run.d, state.d)
    np.testing.assert_array_equal(by_run.s, state.s)


def test_observer_sees_the_initial_state(gen65):
    stepper = ig.VariationalStepper(gen65, GAS, INVISCID, h=1e-3)
    seen = []
    stepper.run(shear_state(gen65), 3, observer=lambda k, t, s, r: seen.append((k, t, r)))
    assert [k for k, _, _ in seen] == [0, 1, 2, 3]
    np.testing.assert_allclose([t for _, t, _ in seen], [0.0, 1e-3, 2e-3, 3e-3], atol=1e-18)
    assert seen[0][2].newton_iters == 0 and seen[0][2].entropy_iters == 0
    assert seen[1][2].newton_iters > 0


def test_solver_failure_names_the_step(gen65):
    stepper = ig.VariationalStepper(gen65, GAS, INVISCID, h=1e-3, newton_max=1)
    with pytest.raises(ig.IntegratorError, match="step 1: momentum solve stalled"):
        stepper.run(shear_state(gen65), 3)


def test_uniform_heating_raises_energy_at_the_injected_rate(gen65):
    rate = 0.8
    heat = lambda t: np.full(gen65.n, rate)
    stepper = ig.VariationalStepper(gen65, GAS, INVISCID, h=1e-4, heat_source=heat)
    state = rest_state(gen65)
    e0 = dg.total_energy(gen65, state, GAS)
    steps = 50
    for k in range(steps):
        state, _ = stepper.step(state, t=k * 1e-4)
    # Uniform heating of a uniform rest state stays at rest...
    np.testing.assert_array_equal(state.a, 0.0)
    # ...and deposits (sum Omega D R) per unit time, up to O(h).
    e1 = dg.total_energy(gen65, state, GAS)
    expected = steps * 1e-4 * np.sum(gen65.omega * state.d * rate)
    assert e1 - e0 == pytest.approx(expected, rel=5e-3)
