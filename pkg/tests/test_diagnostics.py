"""Scalar diagnostics: totals, balance residuals, circulation."""

import numpy as np
import pytest

from decflow import diagnostics as dg
from decflow import fields as fd
from decflow import integrator as ig
from decflow import physics as ph

GAS = ph.GasParams()


def rest_state(geom):
    return ph.FluidState(np.zeros((geom.n, geom.n)), np.ones(geom.n), np.zeros(geom.n))


def shear_state(geom, amp=0.3):
    a = fd.init_from_velocity(
        geom, lambda p: np.array([amp * np.sin(2 * np.pi * p[1]), 0.0]), no_slip=True
    )
    return ph.FluidState(a, np.ones(geom.n), np.zeros(geom.n))


def test_rest_sample_is_trivial(gen65):
    phys = ph.PhysParams(mu=0.1, zeta=0.1, lam=0.1, theta_env=1.0, insulated=False)
    s = dg.sample(gen65, rest_state(gen65), GAS, phys)
    assert s.total_mass == pytest.approx(1.0, rel=1e-14)
    assert s.total_energy == pytest.approx(1.0, rel=1e-14)  # eps(1, 0) = 1
    assert s.total_entropy == 0.0
    assert s.entropy_production == pytest.approx(0.0, abs=1e-15)
    assert s.boundary_heat == pytest.approx(0.0, abs=1e-15)
    assert s.heat_source == 0.0


def test_total_energy_is_kinetic_plus_internal(gen65):
    state = shear_state(gen65)
    kin = 0.5 * np.sum(gen65.omega * state.d * ph.kinetic_density(gen65, state.a))
    internal = np.sum(gen65.omega * ph.internal_energy(state.d, state.s, GAS)[0])
    assert dg.total_energy(gen65, state, GAS) == pytest.approx(kin + internal, rel=1e-13)


def test_energy_residual_of_identical_times_is_zero(gen65):
    phys = ph.PhysParams(mu=0.0, zeta=0.0, lam=0.0)
    s = dg.sample(gen65, rest_state(gen65), GAS, phys, t=1.0)
    assert dg.energy_residual(s, s) == 0.0


def _one_step_residuals(geom, h):
    # Insulated so the only energy sources are friction (internal, cancels)
    # and the prescribed heating; the first-order defect then comes from the
    # difference quotient alone. (A boundary temperature clamp would add an
    # unmodelled source, so this balance is only meaningful when insulated.)
    phys = ph.PhysParams(mu=0.02, zeta=0.01, lam=0.05, insulated=True)
    heat = lambda t: np.full(geom.n, 0.2)
    stepper = ig.VariationalStepper(geom, GAS, phys, h=h, heat_source=heat)
    state, t = shear_state(geom), 0.0
    for k in range(5):
        state, _ = stepper.step(state, t)
        t += h
    prev = dg.sample(geom, state, GAS, phys, t=t, heat=heat(t))
    state, _ = stepper.step(state, t)
    t += h
    cur = dg.sample(geom, state, GAS, phys, t=t, heat=heat(t))
    e_res = dg.energy_residual(prev, cur)
    s_res = (cur.total_entropy - prev.total_entropy) / h - 0.5 * (
        prev.entropy_production + cur.entropy_production
    )
    return e_res, s_res


def test_balance_residuals_shrink_linearly(gen65):
    e2, s2 = _one_step_residuals(gen65, 2e-4)
    e1, s1 = _one_step_residuals(gen65, 1e-4)
    assert abs(e2) < 5e-5 and abs(s2) < 1e-4
    assert 1.5 < abs(e2) / abs(e1) < 2.5
    assert 1.5 < abs(s2) / abs(s1) < 2.5


# ---------------------------------------------------------------------------
# Vorticity and circulation
# ---------------------------------------------------------------------------


def test_gradient_flow_has_no_interior_circulation(gen65, rng):
    f = rng.normal(size=gen65.n)
    a = fd.sharp(gen65, fd.d0(gen65, f))
    om = dg.vorticity_field(gen65, a)
    assert np.abs(om[gen65.ring_cyclic]).max() < 1e-13


def test_kelvin_circulation_matches_nodal_vorticity(gen65, rng):
    layout = ig.FluxLayout.build(gen65)
    a = layout.to_matrix(rng.normal(size=layout.size))
    ring = [0, 1, 7, 14, 19, 13]  # the fan around interior node 8
    circ = dg.kelvin_circulation(gen65, a, np.ones(gen65.n), ring)
    assert circ == pytest.approx(dg.vorticity_field(gen65, a)[8], rel=1e-13)
    # A non-uniform density reweights the loop.
    d = 1.0 + 0.3 * np.sin(np.arange(gen65.n))
    assert dg.kelvin_circulation(gen65, a, d, ring) != pytest.approx(circ, rel=1e-6)


def test_kelvin_circulation_rejects_bad_loops(gen65):
    a = np.zeros((gen65.n, gen65.n))
    with pytest.raises(ValueError, match="at least three"):
        dg.kelvin_circulation(gen65, a, np.ones(gen65.n), [0, 1])
    far = int(np.flatnonzero(~gen65.adj[0])[-1])
    with pytest.raises(ValueError, match=f"cells 0 and {far} in the loop are not adjacent"):
        dg.kelvin_circulation(gen65, a, np.ones(gen65.n), [0, far, 1])
