"""Discrete fields: pairings, derivative, flat/sharp, vorticity, transport."""

import numpy as np
import pytest

from decflow import fields as fd
from decflow import mesh as msh
from decflow import verify as vf


# ---------------------------------------------------------------------------
# Pairings and elementary operators (frozen on the rhombus)
# ---------------------------------------------------------------------------


def test_pairing0_is_area_weighted(rhombus):
    got = fd.pairing0(rhombus, [1.0, 2.0], [3.0, 4.0])
    assert got == pytest.approx(rhombus.omega[0] * (3.0 + 8.0), rel=1e-14)


def test_pairing1_single_entry(rhombus):
    z = np.zeros((2, 2))
    b = np.zeros((2, 2))
    z[0, 1], b[0, 1] = 3.0, 5.0
    assert fd.pairing1(rhombus, z, b) == pytest.approx(
        rhombus.omega[0] * 15.0, rel=1e-14
    )


def test_d0_is_pair_difference(rhombus):
    z = fd.d0(rhombus, [2.0, 5.0])
    np.testing.assert_allclose(z, [[0.0, 3.0], [-3.0, 0.0]], atol=0)


def test_d0_vanishes_off_adjacency(small43):
    z = fd.d0(small43, np.arange(small43.n, dtype=float))
    assert (z[~small43.adj] == 0).all()


def test_divergence_is_twice_diagonal():
    a = np.array([[-0.5, 0.5], [0.25, -0.25]])
    np.testing.assert_allclose(fd.div(a), [-1.0, -0.5], atol=0)


def test_act_fn_matches_matrix_action(rng):
    a = rng.normal(size=(5, 5))
    f = rng.normal(size=5)
    np.testing.assert_allclose(fd.act_fn(a, f), -a @ f, atol=0)


def test_act_den_is_weighted_transpose(small43, rng):
    d = 1.0 + rng.random(small43.n)
    a = vf.random_tangent(small43, rng)
    expected = (a.T @ (small43.omega * d)) / small43.omega
    np.testing.assert_allclose(fd.act_den(small43, d, a), expected, atol=0)


def test_pair_mean():
    m = fd.pair_mean([1.0, 3.0])
    np.testing.assert_allclose(m, [[1.0, 2.0], [2.0, 3.0]], atol=0)


# ---------------------------------------------------------------------------
# Flat / sharp
# ---------------------------------------------------------------------------


def test_flat_adjacent_coefficient(rhombus):
    a = np.array([[-1.0, 1.0], [2.0, -2.0]])
    z = fd.flat(rhombus, a)
    # 2 * Omega * |*h| / |h| = 0.5 on both sides of the rhombus.
    assert z[0, 1] == pytest.approx(0.5 * a[0, 1], rel=1e-13)
    assert z[1, 0] == pytest.approx(0.5 * a[1, 0], rel=1e-13)


def test_flat_two_away_extends_adjacent_entries(jittered, rng):
    a = vf.random_tangent(jittered, rng, velocity_scale=True)
    full = fd.flat(jittered, a)
    adj_only = fd.flat(jittered, a, two_away=False)
    assert np.array_equal(full[jittered.adj], adj_only[jittered.adj])
    # The completed entries live strictly off the adjacency pattern.
    off = ~jittered.adj & ~np.eye(jittered.n, dtype=bool)
    assert np.abs(full[off]).max() > 0
    assert np.abs(adj_only[off]).max() == 0


def test_sharp_inverts_flat(jittered, rng):
    a = vf.random_tangent(jittered, rng, velocity_scale=True)
    back = fd.sharp(jittered, fd.flat(jittered, a))
    np.testing.assert_allclose(back, a, atol=1e-13)


def test_lambda_ignores_two_away_entries(jittered, rng):
    a = vf.random_tangent(jittered, rng)
    z_full = fd.flat(jittered, a)
    z_adj = fd.flat(jittered, a, two_away=False)
    np.testing.assert_allclose(
        fd.lambda_op(jittered, z_full), fd.lambda_op(jittered, z_adj), atol=0
    )


def _degree_four_geometry():
    # Four triangles around one interior node of degree 4: the smallest
    # configuration where a two-away entry is determined by two different
    # fan triplets.
    text = (
        "5 4\n"
        "0 0\n1.1 -0.06\n1.04 1.03\n-0.07 0.96\n0.54 0.46\n"
        "0 1 4\n1 2 4\n2 3 4\n3 0 4\n"
    )
    return msh.compute_geometry(msh.load_mesh(text))


def test_flat_ambiguity_is_detected():
    geom = _degree_four_geometry()
    issues = msh.validate(geom.mesh)
    assert any("degree 4 < 5" in s for s in issues)
    a = vf.random_tangent(geom, np.random.default_rng(1))
    with pytest.raises(fd.FlatAmbiguityError, match="two-away"):
        fd.flat(geom, a)
    fd.flat(geom, a, check=False)  # opting out must not raise


def test_degree_six_fans_are_unambiguous(gen65, jittered):
    assert len(gen65.dup_row) == 0
    assert len(jittered.dup_row) == 0


# ---------------------------------------------------------------------------
# Vorticity
# ---------------------------------------------------------------------------


def test_total_vorticity_frozen_ring(gen65):
    ring = [0, 1, 7, 14, 19, 13]
    z = np.zeros((gen65.n, gen65.n))
    expected = 0.0
    for t, i in enumerate(ring):
        j = ring[(t + 1) % len(ring)]
        z[i, j] = float(t + 1)
        expected += float(t + 1)
    assert fd.total_vorticity(gen65, z)[8] == pytest.approx(expected, rel=1e-15)


def test_gradients_have_no_interior_vorticity(jittered, rng):
    # Summing exact differences around a closed fan telescopes to zero.
    f = vf.random_function(jittered, rng)
    om = fd.total_vorticity(jittered, fd.d0(jittered, f))
    assert np.abs(om[jittered.ring_cyclic]).max() < 1e-14
    assert np.abs(om[~jittered.ring_cyclic]).max() > 1e-3


def test_hodge_of_rest_is_zero(small43):
    np.testing.assert_array_equal(fd.hodge(small43, np.zeros((small43.n,) * 2)), 0.0)


def test_wedge_star_is_symmetric(jittered, rng):
    za = fd.flat(jittered, vf.random_tangent(jittered, rng))
    zb = fd.flat(jittered, vf.random_tangent(jittered, rng))
    np.testing.assert_allclose(
        fd.wedge_star(jittered, za, zb), fd.wedge_star(jittered, zb, za), atol=0
    )


# ---------------------------------------------------------------------------
# Projections and Lie derivatives
# ---------------------------------------------------------------------------


def test_projections_are_idempotent(rng):
    lmat = rng.normal(size=(6, 6))
    q = fd.proj_Q(lmat)
    p = fd.proj_P(lmat)
    assert (np.diagonal(q) == 0).all()
    np.testing.assert_allclose(fd.proj_Q(q), q, atol=0)
    np.testing.assert_allclose(fd.proj_P(p), p, atol=1e-15)
    np.testing.assert_allclose(p, -p.T, atol=1e-15)
    # The antisymmetrizer factors through the row-sum-zero projection.
    np.testing.assert_allclose(fd.proj_P(q), p, atol=1e-15)


def test_lie_derivative_routes_agree(small43, rng):
    # The homotopy-formula route matches the matrix product for
    # antisymmetric one-forms and row-sum-zero fields.
    a = vf.random_tangent(small43, rng)
    z = rng.normal(size=(small43.n, small43.n))
    f = z - z.T
    np.testing.assert_allclose(
        fd.lie_deriv_oneform(a, f),
        fd.lie_deriv_oneform_cartan(a, f),
        atol=1e-12,
    )


def test_momentum_transport_routes_agree(jittered, rng):
    # Weighted-commutator route versus the kite-quadrature assembly,
    # compared where the latter is defined (adjacent entries).
    a = vf.random_tangent(jittered, rng)
    b = vf.random_tangent(jittered, rng)
    d = vf.random_density(jittered, rng)
    lmat = d[:, None] * fd.flat(jittered, b)
    direct = fd.lie_deriv_oneform_density(jittered, a, lmat)
    kite = fd.lie_deriv_oneform_density_kite(jittered, a, b, d)
    diff = np.where(jittered.adj, direct - kite, 0.0)
    scale = np.abs(np.where(jittered.adj, direct, 0.0)).max()
    assert np.abs(diff).max() <= 1e-12 * scale


# ---------------------------------------------------------------------------
# Velocity sampling and reconstruction
# ---------------------------------------------------------------------------


def test_constant_velocity_is_exact(jittered):
    a = fd.init_from_velocity(jittered, lambda p: np.array([1.0, 0.25]), no_slip=False)
    inner = jittered.mesh.interior_cells
    assert np.abs(fd.div(a)[inner]).max() < 1e-13
    u = fd.reconstruct_velocity(jittered, a)
    np.testing.assert_allclose(u[inner] - [1.0, 0.25], 0.0, atol=1e-13)


def test_init_from_velocity_membership(jittered):
    u = lambda p: np.array([np.sin(p[1]), np.cos(p[0])])
    free = fd.init_from_velocity(jittered, u, no_slip=False)
    res = fd.membership_residuals(jittered, free)
    assert res["S"] == 0.0
    assert res["V"] < 1e-14
    assert res["support"] == 0.0
    assert res["no_slip"] > 1e-3

    clamped = fd.init_from_velocity(jittered, u, no_slip=True)
    assert fd.membership_residuals(jittered, clamped)["no_slip"] == 0.0


def test_boundary_div_reads_environment_column():
    j = np.zeros((3, 3))
    j[0, 2], j[1, 2] = 0.5, -0.25
    np.testing.assert_allclose(fd.boundary_div(j, 2), [-1.0, 0.5], atol=0)
