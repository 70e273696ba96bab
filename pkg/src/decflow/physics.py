"""State, perfect-gas thermodynamics, Lagrangian, and force terms.

The per-cell state is ``(A, D, S)``: a discrete velocity matrix, mass
density, and entropy density.  The internal energy density of the perfect
gas with adiabatic index ``gamma``, heat capacity ``c_v`` and reference
constant ``K`` is

    eps(D, S) = K * D**gamma * exp(S / (c_v * D))

whose partial derivatives give temperature ``Theta = eps / (c_v D)`` and,
through the Euler relation ``p = D eps_D + S eps_S - eps``, the pressure
``p = (gamma - 1) eps``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields as fd
from .mesh import MeshGeometry

__all__ = [
    "GasParams",
    "PhysParams",
    "FluidState",
    "internal_energy",
    "temperature",
    "pressure",
    "entropy_from_temperature",
    "kinetic_density",
    "lagrangian",
    "variational_derivatives",
    "entropy_flux",
    "nabla_aa",
    "friction_power",
    "viscous_force",
]


@dataclass(frozen=True)
class GasParams:
    gamma: float = 1.4
    c_v: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if self.gamma <= 1.0 or self.c_v <= 0.0 or self.K <= 0.0:
            raise ValueError("need gamma > 1, c_v > 0, K > 0")


@dataclass(frozen=True)
class PhysParams:
    """Transport coefficients and boundary data.

    ``conduction_sign`` multiplies the entropy-flux matrix; ``-1`` (the
    default) is the dissipative orientation -- heat flows from hot to cold
    and the conduction part of the entropy production,
    ``-sign * lam * sum (Theta_i - Theta_j)^2 / (Theta_i Theta_j) * ...``,
    is nonnegative.  ``+1`` reproduces the anti-diffusive orientation some
    derivations print and is kept only so the verification suite can
    demonstrate the difference.
    """

    mu: float = 0.0
    zeta: float = 0.0
    lam: float = 0.0
    theta_env: float = 1.0
    insulated: bool = False
    conduction_sign: float = -1.0

    @property
    def mu_tilde(self) -> float:
        return self.zeta + 4.0 * self.mu / 3.0


@dataclass
class FluidState:
    a: np.ndarray
    d: np.ndarray
    s: np.ndarray

    def copy(self) -> "FluidState":
        return FluidState(self.a.copy(), self.d.copy(), self.s.copy())


# ---------------------------------------------------------------------------
# Perfect gas
# ---------------------------------------------------------------------------


def internal_energy(d, s, gas: GasParams):
    """Internal energy density and its partials: ``(eps, eps_D, eps_S)``."""
    d = np.asarray(d, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("density must be positive")
    eps = gas.K * d**gas.gamma * np.exp(s / (gas.c_v * d))
    eps_d = eps * (gas.gamma / d - s / (gas.c_v * d * d))
    eps_s = eps / (gas.c_v * d)
    return eps, eps_d, eps_s


def temperature(d, s, gas: GasParams) -> np.ndarray:
    return internal_energy(d, s, gas)[2]


def pressure(d, s, gas: GasParams) -> np.ndarray:
    return (gas.gamma - 1.0) * internal_energy(d, s, gas)[0]


def entropy_from_temperature(d, theta, gas: GasParams) -> np.ndarray:
    """Invert ``Theta(D, S)`` for ``S`` at fixed density:
    ``S = c_v D log(Theta c_v / (K D^(gamma-1)))``."""
    d = np.asarray(d, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return gas.c_v * d * np.log(theta * gas.c_v / (gas.K * d ** (gas.gamma - 1.0)))


# ---------------------------------------------------------------------------
# Lagrangian
# ---------------------------------------------------------------------------


def kinetic_density(geom: MeshGeometry, a) -> np.ndarray:
    """Pointwise squared speed ``K_i = sum_j (A^flat)_ij A_ij`` (adjacent)."""
    z = fd.flat(geom, a, two_away=False)
    return np.einsum("ij,ij->i", z, np.asarray(a) * geom.adj)


def lagrangian(geom: MeshGeometry, a, d, s, gas: GasParams) -> float:
    """Kinetic minus internal energy: ``sum_i Omega_ii (D_i K_i / 2 - eps_i)``."""
    eps = internal_energy(d, s, gas)[0]
    k = kinetic_density(geom, a)
    return float(np.sum(geom.omega * (0.5 * np.asarray(d) * k - eps)))


def variational_derivatives(geom: MeshGeometry, a, d, s, gas: GasParams):
    """Partial derivatives of the Lagrangian:

    * w.r.t. velocity: the momentum ``L_ij = D_i (A^flat)_ij`` (two-away
      entries of the flat included -- the Lie derivative needs them),
    * w.r.t. density: ``K_i / 2 - eps_D``,
    * w.r.t. entropy: ``-eps_S = -Theta_i``.
    """
    _, eps_d, eps_s = internal_energy(d, s, gas)
    z = fd.flat(geom, a)
    dl_da = np.asarray(d)[:, None] * z
    dl_dd = 0.5 * kinetic_density(geom, a) - eps_d
    dl_ds = -eps_s
    return dl_da, dl_dd, dl_ds


# ---------------------------------------------------------------------------
# Heat conduction
# ---------------------------------------------------------------------------


def entropy_flux(geom: MeshGeometry, theta, phys: PhysParams) -> np.ndarray:
    """Discrete entropy-flux matrix on the environment-extended index set.

    For adjacent cells: ``J_ij = sign * lam * (Th_i - Th_j)/(Th_i + Th_j)
    * |h_ij| / (Omega_ii |*h_ij|)``; boundary cells get an environment
    column with the aggregate geometric factor of their boundary edges
    (suppressed when insulated).  Rows sum to zero, and weighted
    antisymmetry holds with the environment cell weighted by the total area.
    """
    n = geom.n
    theta = np.asarray(theta, dtype=float)
    j = np.zeros((n + 1, n + 1))
    if phys.lam != 0.0:
        i, k = geom.adj_i, geom.adj_j
        ti, tk = theta[i], theta[k]
        j[i, k] = (
            phys.conduction_sign
            * phys.lam
            * (ti - tk)
            / (ti + tk)
            * geom.h_len[i, k]
            / (geom.omega[i] * geom.star_h_len[i, k])
        )
        if not phys.insulated:
            te = phys.theta_env
            col = (
                phys.conduction_sign
                * phys.lam
                * (theta - te)
                / (theta + te)
                * geom.boundary_factor
                / geom.omega
            )
            j[:n, n] = col
            j[n, :n] = -geom.omega * col / geom.omega_env
    np.fill_diagonal(j, 0.0)
    np.fill_diagonal(j, -j.sum(axis=1))
    return j


# ---------------------------------------------------------------------------
# Viscous forces
# ---------------------------------------------------------------------------


def nabla_aa(geom: MeshGeometry, a) -> np.ndarray:
    """Self-advection ``(nabla_A A)`` defined through its one-form:
    ``(nabla_A A)^flat = L_A(A^flat) - d0(K)/2``, raised back with sharp.
    Lands in S and V by construction."""
    z = fd.flat(geom, a, two_away=False)
    lz = fd.lie_deriv_oneform(a, z)
    k = kinetic_density(geom, a)
    return fd.sharp(geom, lz - 0.5 * fd.d0(geom, k))


def friction_power(geom: MeshGeometry, a, phys: PhysParams) -> np.ndarray:
    """Cell-wise power released by friction (enters the entropy equation
    divided by temperature):

        mu_tilde (div A)^2 + mu (dA^flat ^ * dA^flat)
        + 2 mu div(nabla_A A) - 2 mu (div(A) bullet A)
    """
    diva = fd.div(a)
    out = phys.mu_tilde * diva * diva
    if phys.mu != 0.0:
        z = fd.flat(geom, a)
        out = out + phys.mu * fd.wedge_star(geom, z, z)
        out = out + 2.0 * phys.mu * fd.div(nabla_aa(geom, a))
        out = out - 2.0 * phys.mu * fd.act_den(geom, diva, a)
    return out


def viscous_force(geom: MeshGeometry, a, phys: PhysParams) -> np.ndarray:
    """One-form of the viscous force on adjacent pairs,

        -mu_tilde d0(div A) - 2 mu Lambda(A^flat),

    the unique combination of the divergence and curl-curl blocks that is
    exactly dual to the friction power: pairing the result against any
    B in S cap V gives -mu_tilde <div A, div B>_0 - mu Sum_i Omega_ii
    (dA^flat ^ * dB^flat)_i, so the kinetic energy drained here reappears,
    cell by cell, as the heating entering the entropy equation.  Without
    that duality the time integrator would create or destroy total energy
    at order one.
    """
    out = -phys.mu_tilde * fd.d0(geom, fd.div(a))
    if phys.mu != 0.0:
        z = fd.flat(geom, a, two_away=False)
        out = out - 2.0 * phys.mu * fd.lambda_op(geom, z)
    return out
