"""Matrix group maps used by the discrete-time integrator.

A group difference map ``tau`` turns a scaled velocity matrix into a
transport matrix close to the identity; the integrator needs ``tau``, the
left-trivialized tangent ``dtau`` of ``tau``, its inverse ``dtau_inv``, and
the adjoint of ``dtau_inv`` with respect to the area-weighted pairing.

Two kinds are provided:

* ``"exponential"``: the matrix exponential.  ``dtau_inv`` is the classical
  Bernoulli-number series ``sum_n (B_n / n!) ad_{-xi}^n(eta)`` (with the
  ``B_1 = -1/2`` convention), truncated adaptively; ``dtau`` is the series
  ``sum_n (1/(n+1)!) ad_{-xi}^n(delta)``.
* ``"cayley"``: ``(I - xi/2)^-1 (I + xi/2)`` with the closed-form tangents
  ``dtau(delta) = (I + xi/2)^-1 delta (I - xi/2)^-1`` and
  ``dtau_inv(eta) = (I + xi/2) eta (I - xi/2)``.  Note the Cayley map does
  not preserve the row-sum-zero structure of transported quantities the way
  the exponential does, so the exponential is the default everywhere.

Both kinds satisfy, for any square ``xi`` and ``delta``,

    dtau_{-xi}(delta)                  = Ad_{tau(xi)} dtau_{xi}(delta)
    dtau_inv_{-xi}(Ad_{tau(xi)} delta) = dtau_inv_{xi}(delta)

which the verification suite checks.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.special import bernoulli

__all__ = [
    "tau",
    "tau_inv",
    "dtau",
    "dtau_inv",
    "dtau_inv_star",
    "commutator",
    "GroupMapError",
    "KINDS",
]

KINDS = ("exponential", "cayley")

_SERIES_CAP = 24
_BERNOULLI = bernoulli(_SERIES_CAP)  # B_1 = -1/2 convention


class GroupMapError(ValueError):
    """Raised for unknown kinds, singular Cayley denominators, or arguments
    too large for the tangent series to converge."""


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise GroupMapError(f"unknown group map kind {kind!r}; use one of {KINDS}")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _cayley_factors(xi: np.ndarray):
    n = xi.shape[0]
    eye = np.eye(n)
    p = eye - 0.5 * xi
    q = eye + 0.5 * xi
    if abs(np.linalg.det(p)) < 1e-300:
        raise GroupMapError("cayley map is singular: 2 is an eigenvalue of xi")
    return p, q


def tau(xi: np.ndarray, kind: str = "exponential") -> np.ndarray:
    """Group difference map: matrix exponential or Cayley transform."""
    _check_kind(kind)
    xi = np.asarray(xi, dtype=float)
    if kind == "exponential":
        return expm(xi)
    p, q = _cayley_factors(xi)
    return np.linalg.solve(p, q)


def tau_inv(q: np.ndarray, kind: str = "exponential") -> np.ndarray:
    """Inverse of the group element (not of the map): ``tau(xi)^-1``."""
    _check_kind(kind)
    return np.linalg.inv(np.asarray(q, dtype=float))


def _series_guard(xi: np.ndarray) -> None:
    norm = float(np.linalg.norm(xi, 2))
    if norm >= 1.0:
        raise GroupMapError(
            f"tangent-map series needs |xi| < 1, got {norm:.3f}; "
            "reduce the time step"
        )


def dtau(xi: np.ndarray, delta: np.ndarray, kind: str = "exponential") -> np.ndarray:
    """Left-trivialized tangent of ``tau`` at ``xi`` applied to ``delta``:
    ``tau(xi)^-1 d/dt tau(xi + t delta)``."""
    _check_kind(kind)
    xi = np.asarray(xi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if kind == "cayley":
        p, q = _cayley_factors(xi)
        # Q^-1 delta P^-1, computed as solve(Q, delta) then right-divide by P
        return np.linalg.solve(q, np.linalg.solve(p.T, delta.T).T)
    _series_guard(xi)
    scale = float(np.max(np.abs(delta))) or 1.0
    term = delta.copy()
    total = term.copy()
    for n in range(1, _SERIES_CAP + 1):
        term = commutator(-xi, term) / (n + 1.0)
        total += term
        if float(np.max(np.abs(term))) <= 1e-14 * scale:
            break
    return total


def dtau_inv(xi: np.ndarray, eta: np.ndarray, kind: str = "exponential") -> np.ndarray:
    """Inverse trivialized tangent; for the exponential the Bernoulli series
    ``eta + [xi, eta]/2 + [xi, [xi, eta]]/12 - ...``."""
    _check_kind(kind)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if kind == "cayley":
        p, q = _cayley_factors(xi)
        return q @ eta @ p
    _series_guard(xi)
    scale = float(np.max(np.abs(eta))) or 1.0
    term = eta.copy()
    total = term.copy()
    factorial = 1.0
    for n in range(1, _SERIES_CAP + 1):
        term = commutator(-xi, term)
        factorial *= n
        coeff = _BERNOULLI[n] / factorial
        if coeff != 0.0:
            total += coeff * term
        if float(np.max(np.abs(term))) / factorial <= 1e-14 * scale:
            break
    return total


def dtau_inv_star(
    omega: np.ndarray, xi: np.ndarray, lmat: np.ndarray, kind: str = "exponential"
) -> np.ndarray:
    """Adjoint of ``dtau_inv`` in the area-weighted pairing
    ``<L, B> = Tr(L^T Omega B)``: equals ``Omega^-1 dtau_inv(xi^T, Omega L)``
    (the pairing turns each ``ad_{-xi}`` into ``Omega^-1 ad_{-xi^T} Omega``).
    """
    wl = omega[:, None] * np.asarray(lmat, dtype=float)
    return dtau_inv(np.asarray(xi, dtype=float).T, wl, kind) / omega[:, None]
