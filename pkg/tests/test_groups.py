"""Group difference maps and their trivialized tangents."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decflow import groups as gr
from decflow import verify as vf


def small_matrix(seed, n=5, norm=0.3):
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=(n, n))
    return norm * xi / np.linalg.norm(xi, 2)


@pytest.mark.parametrize("kind", gr.KINDS)
def test_nilpotent_map_is_exact(kind):
    # xi^2 = 0 collapses both the exponential and the Cayley map to I + xi.
    xi = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(gr.tau(xi, kind), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


@pytest.mark.parametrize("kind", gr.KINDS)
def test_tau_of_zero_is_identity(kind):
    np.testing.assert_array_equal(gr.tau(np.zeros((4, 4)), kind), np.eye(4))


@pytest.mark.parametrize("kind", gr.KINDS)
def test_tau_inverse(kind):
    xi = small_matrix(3)
    q = gr.tau(xi, kind)
    np.testing.assert_allclose(q @ gr.tau(-xi, kind), np.eye(5), atol=1e-13)
    np.testing.assert_allclose(gr.tau_inv(q, kind), gr.tau(-xi, kind), atol=1e-13)


@pytest.mark.parametrize("kind", gr.KINDS)
def test_dtau_at_zero_is_identity_map(kind):
    delta = small_matrix(5)
    np.testing.assert_allclose(gr.dtau(np.zeros((5, 5)), delta, kind), delta, atol=1e-15)
    np.testing.assert_allclose(
        gr.dtau_inv(np.zeros((5, 5)), delta, kind), delta, atol=1e-15
    )


@pytest.mark.parametrize("kind", gr.KINDS)
def test_dtau_roundtrip(kind):
    xi, delta = small_matrix(7), small_matrix(8)
    eta = gr.dtau(xi, delta, kind)
    np.testing.assert_allclose(gr.dtau_inv(xi, eta, kind), delta, atol=1e-13)


def test_commutator():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(gr.commutator(a, b), [[1.0, 0.0], [0.0, -1.0]])


def test_dtau_inv_star_is_the_pairing_adjoint():
    rng = np.random.default_rng(11)
    omega = 0.5 + rng.random(6)
    xi = small_matrix(12, n=6)
    lmat = rng.normal(size=(6, 6))
    bmat = rng.normal(size=(6, 6))
    for kind in gr.KINDS:
        lhs = np.trace(gr.dtau_inv(xi, bmat, kind).T @ (omega[:, None] * lmat))
        rhs = np.trace(bmat.T @ (omega[:, None] * gr.dtau_inv_star(omega, xi, lmat, kind)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


# ---------------------------------------------------------------------------
# Failure modes
# ---------------------------------------------------------------------------


def test_unknown_kind_is_rejected():
    with pytest.raises(gr.GroupMapError, match="unknown group map kind"):
        gr.tau(np.zeros((2, 2)), "pade")


def test_series_guard_rejects_large_arguments():
    xi = np.eye(3) * 1.5
    with pytest.raises(gr.GroupMapError, match="reduce the time step"):
        gr.dtau(xi, xi, "exponential")
    with pytest.raises(gr.GroupMapError, match="reduce the time step"):
        gr.dtau_inv(xi, xi, "exponential")


def test_cayley_singularity():
    xi = np.diag([2.0, 0.0])
    with pytest.raises(gr.GroupMapError, match="cayley map is singular"):
        gr.tau(xi, "cayley")


# ---------------------------------------------------------------------------
# Identities used by the integrator (shared with the randomized suite)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", gr.KINDS)
def test_shift_identities_on_a_mesh(small43, rng, kind):
    assert vf.check_tau_shift(small43, rng, kind) < 1e-10
    assert vf.check_dtau_inv_shift(small43, rng, kind) < 1e-10
    assert vf.check_transport_adjoint(small43, rng, kind) < 1e-12


@pytest.mark.parametrize("kind", gr.KINDS)
def test_dtau_inv_matches_finite_differences(small43, rng, kind):
    assert vf.check_dtau_inv_fd(small43, rng, kind) < 1e-6


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(gr.KINDS))
def test_tau_inverse_property(seed, kind):
    xi = small_matrix(seed)
    np.testing.assert_allclose(
        gr.tau(xi, kind) @ gr.tau(-xi, kind), np.eye(5), atol=1e-12
    )


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(gr.KINDS))
def test_dtau_roundtrip_property(seed, kind):
    rng = np.random.default_rng(seed)
    xi = small_matrix(rng.integers(2**31), norm=float(0.5 * rng.random()))
    delta = rng.normal(size=(5, 5))
    eta = gr.dtau(xi, delta, kind)
    np.testing.assert_allclose(
        gr.dtau_inv(xi, eta, kind), delta, atol=1e-11 * max(1.0, np.abs(delta).max())
    )
