"""Time integration: the discrete variational step and an RK4 reference.

Both integrators advance the same unknowns -- one momentum flux per pair of
adjacent *interior* cells (cells not touching the boundary; no-slip), plus
density and entropy per cell -- and both are consistent with the same
semi-discrete equations, so one variational step differs from one RK4 step
by O(h^2).

The variational step solves, in order:

1. the discrete momentum balance for the new velocity ``A^k`` (Newton on
   fluxes, finite-difference Jacobian, with LU reuse across iterations and
   steps),
2. exact density transport ``D^{k+1} = D^k bullet tau(-h A^k)``,
3. a fixed point for the new entropy ``S^{k+1}`` balancing transport,
   friction heating, conduction and sources against the old temperature,
   followed by the boundary temperature condition (unless insulated).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import fields as fd
from . import groups as gr
from . import physics as ph
from .mesh import MeshGeometry

__all__ = [
    "FluxLayout",
    "StepReport",
    "VariationalStepper",
    "rk4_step",
    "semi_discrete_rhs",
    "momentum_vector",
    "IntegratorError",
]


class IntegratorError(RuntimeError):
    """A nonlinear solve failed to converge."""


# ---------------------------------------------------------------------------
# Flux unknowns
# ---------------------------------------------------------------------------


@dataclass
class FluxLayout:
    """One scalar unknown per unordered adjacent pair of interior cells.

    A flux vector ``f`` assembles into the velocity matrix with
    ``A_ij = f / (2 Omega_ii)``, ``A_ji = -f / (2 Omega_jj)`` and diagonal
    completing the rows to zero, which lands exactly in S, V and the no-slip
    subspace.
    """

    geom: MeshGeometry
    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def build(cls, geom: MeshGeometry) -> "FluxLayout":
        interior = geom.mesh.interior_cells
        i, j = np.nonzero(np.triu(geom.adj))
        keep = interior[i] & interior[j]
        return cls(geom=geom, rows=i[keep], cols=j[keep])

    @property
    def size(self) -> int:
        return len(self.rows)

    def to_matrix(self, flux: np.ndarray) -> np.ndarray:
        g = self.geom
        a = np.zeros((g.n, g.n))
        a[self.rows, self.cols] = flux / (2.0 * g.omega[self.rows])
        a[self.cols, self.rows] = -flux / (2.0 * g.omega[self.cols])
        np.fill_diagonal(a, -a.sum(axis=1))
        return a

    def from_matrix(self, a: np.ndarray) -> np.ndarray:
        g = self.geom
        return g.omega[self.rows] * a[self.rows, self.cols] - g.omega[
            self.cols
        ] * a[self.cols, self.rows]

    def pick(self, mat: np.ndarray) -> np.ndarray:
        return mat[self.rows, self.cols]


# ---------------------------------------------------------------------------
# Shared force assembly
# ---------------------------------------------------------------------------


def _gradient_forces(geom, a, d, s, gas):
    """``Dbar (dl/dD_j - dl/dD_i) + Sbar (dl/dS_j - dl/dS_i)`` on adjacent
    pairs (the discrete pressure/temperature gradient block)."""
    _, dl_dd, dl_ds = ph.variational_derivatives(geom, a, d, s, gas)
    gd = fd.d0(geom, dl_dd)
    gs = fd.d0(geom, dl_ds)
    return fd.pair_mean(d) * gd + fd.pair_mean(s) * gs


def _theta_dot_flux(j_ext, theta_ext, n):
    """The vector ``(Theta . J)_i = -(J theta)_i`` (so that
    ``Theta_i (div J)_i + (Theta.J)_i = -sum_j J_ij (Theta_i + Theta_j)``)."""
    return -(j_ext @ theta_ext)[:n]


def semi_discrete_rhs(geom, state, gas, phys, layout, heat=None):
    """Right-hand side of the semi-discrete system as ``(mdot, Ddot, Sdot)``
    with the momentum one-form ``m_ij = Dbar_ij A^flat_ij`` carried on the
    flux layout."""
    a, d, s = state.a, state.d, state.s
    z = fd.flat(geom, a)
    lmat = d[:, None] * z
    lie = fd.lie_deriv_oneform_density(geom, a, lmat)
    visc = ph.viscous_force(geom, a, phys)
    mdot = layout.pick(-lie - _gradient_forces(geom, a, d, s, gas) + visc)

    ddot = -fd.act_den(geom, d, a)

    theta = ph.temperature(d, s, gas)
    jmat = ph.entropy_flux(geom, theta, phys)
    theta_ext = np.append(theta, phys.theta_env)
    div_j = 2.0 * np.diagonal(jmat)[: geom.n]
    theta_j = _theta_dot_flux(jmat, theta_ext, geom.n)
    fric = ph.friction_power(geom, a, phys)
    source = fric.copy()
    if heat is not None:
        source = source + d * heat
    sdot = -fd.act_den(geom, s, a) - div_j + (source - theta_j) / theta
    return mdot, ddot, sdot


def momentum_vector(geom, layout, a, d):
    """Edge momenta ``m_ij = Dbar_ij A^flat_ij`` on the flux layout."""
    z = fd.flat(geom, a, two_away=False)
    return layout.pick(fd.pair_mean(d) * z)


def _state_from_momentum(geom, layout, mvec, d, s):
    dbar = 0.5 * (d[layout.rows] + d[layout.cols])
    z = np.zeros((geom.n, geom.n))
    z[layout.rows, layout.cols] = mvec / dbar
    z[layout.cols, layout.rows] = -mvec / dbar
    return ph.FluidState(fd.sharp(geom, z), d, s)


def rk4_step(geom, state, h, gas, phys, layout=None, heat_source=None, t=0.0):
    """Classical RK4 on ``(m, D, S)`` with the velocity reassembled from the
    momentum one-form at every stage (``A^flat_ij = m_ij / Dbar_ij``)."""
    if layout is None:
        layout = FluxLayout.build(geom)
    m0 = momentum_vector(geom, layout, state.a, state.d)
    d0_, s0 = state.d, state.s

    def rhs(mvec, d, s, tt):
        st = _state_from_momentum(geom, layout, mvec, d, s)
        heat = heat_source(tt) if heat_source is not None else None
        return semi_discrete_rhs(geom, st, gas, phys, layout, heat)

    k1 = rhs(m0, d0_, s0, t)
    k2 = rhs(m0 + 0.5 * h * k1[0], d0_ + 0.5 * h * k1[1], s0 + 0.5 * h * k1[2], t + 0.5 * h)
    k3 = rhs(m0 + 0.5 * h * k2[0], d0_ + 0.5 * h * k2[1], s0 + 0.5 * h * k2[2], t + 0.5 * h)
    k4 = rhs(m0 + h * k3[0], d0_ + h * k3[1], s0 + h * k3[2], t + h)

    mvec = m0 + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    d = d0_ + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    s = s0 + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return _state_from_momentum(geom, layout, mvec, d, s)


# ---------------------------------------------------------------------------
# Variational stepper
# ---------------------------------------------------------------------------


@dataclass
class StepReport:
    newton_iters: int = 0
    entropy_iters: int = 0


class VariationalStepper:
    """Advances the fully discrete system one step at a time.

    Keeps the previous step's velocity and density (the momentum balance
    couples steps ``k-1`` and ``k``) and reuses the Newton LU factorization
    until convergence degrades.  A cold start uses the initial state for the
    missing previous step.
    """

    def __init__(
        self,
        geom: MeshGeometry,
        gas: ph.GasParams,
        phys: ph.PhysParams,
        h: float,
        kind: str = "exponential",
        newton_tol: float = 1e-10,
        newton_max: int = 50,
        entropy_tol: float = 1e-13,
        entropy_max: int = 100,
        heat_source=None,
    ):
        self.geom = geom
        self.gas = gas
        self.phys = phys
        self.h = float(h)
        self.kind = kind
        self.newton_tol = newton_tol
        self.newton_max = newton_max
        self.entropy_tol = entropy_tol
        self.entropy_max = entropy_max
        self.heat_source = heat_source
        self.layout = FluxLayout.build(geom)
        self._lu = None
        self._d_prev = None  # density one step behind the incoming state

    # -- momentum ----------------------------------------------------------

    def _transport_term(self, a, d, sign):
        """``(1/h) P((dtau_inv_{sign*h*A})^* (D A^flat))`` on the layout."""
        z = fd.flat(self.geom, a)
        lmat = d[:, None] * z
        star = gr.dtau_inv_star(self.geom.omega, sign * self.h * a, lmat, self.kind)
        return self.layout.pick(fd.proj_P(star)) / self.h

    def _momentum_residual(self, flux, d, s, prev_term):
        a = self.layout.to_matrix(flux)
        cur = self._transport_term(a, d, 1.0)
        grad = self.layout.pick(_gradient_forces(self.geom, a, d, s, self.gas))
        visc = self.layout.pick(ph.viscous_force(self.geom, a, self.phys))
        return cur - prev_term + grad - visc

    def _jacobian(self, flux, d, s, prev_term):
        m = self.layout.size
        jac = np.empty((m, m))
        base = np.maximum(np.abs(flux), 1.0)
        for p in range(m):
            dp = 1e-7 * base[p]
            fp = flux.copy()
            fp[p] += dp
            rp = self._momentum_residual(fp, d, s, prev_term)
            fp[p] -= 2 * dp
            rm = self._momentum_residual(fp, d, s, prev_term)
            jac[:, p] = (rp - rm) / (2 * dp)
        return jac

    def _solve_momentum(self, flux0, d, s, prev_term):
        flux = flux0.copy()
        if self.layout.size == 0:
            return flux, 0
        prev_norm = np.inf
        rebuilt = 0
        for it in range(1, self.newton_max + 1):
            r = self._momentum_residual(flux, d, s, prev_term)
            norm = float(np.max(np.abs(r)))
            if norm <= self.newton_tol:
                return flux, it - 1
            if self._lu is None or (norm > 0.5 * prev_norm and rebuilt < 3):
                self._lu = lu_factor(self._jacobian(flux, d, s, prev_term))
                rebuilt += 1
            flux = flux - lu_solve(self._lu, r)
            prev_norm = norm
        raise IntegratorError(
            f"momentum solve stalled at residual {prev_norm:.3e} "
            f"(tolerance {self.newton_tol:.1e})"
        )

    # -- entropy -----------------------------------------------------------

    def _solve_entropy(self, a_new, d_old, s_old, d_new, theta_old, fric, heat):
        """Fixed point for ``S^{k+1}`` (before boundary enforcement)."""
        geom, phys, gas, h = self.geom, self.phys, self.gas, self.h
        q = gr.tau(h * a_new, self.kind)
        q_back = gr.tau(-h * a_new, self.kind)
        j_old = ph.entropy_flux(geom, theta_old, phys)
        theta_old_ext = np.append(theta_old, phys.theta_env)
        rhs_const = h * fric - h * _theta_dot_flux(j_old, theta_old_ext, geom.n)
        if heat is not None:
            rhs_const = rhs_const + h * d_old * heat
        rhs_const = s_old + rhs_const / theta_old

        s = s_old.copy()
        prev_delta = np.inf
        for it in range(1, self.entropy_max + 1):
            theta_new = ph.temperature(d_new, s, gas)
            j_new = ph.entropy_flux(geom, theta_new, phys)
            div_j = 2.0 * np.diagonal(j_new)[: geom.n]
            target = rhs_const - h * fd.group_act_den(geom, div_j, q)
            s_next = fd.group_act_den(geom, target, q_back)
            delta = float(np.max(np.abs(s_next - s)))
            scale = max(1.0, float(np.max(np.abs(s_next))))
            if delta <= self.entropy_tol * scale:
                return s_next, it
            if delta >= prev_delta:  # stagnating: damp
                s_next = 0.5 * (s_next + s)
            prev_delta = delta
            s = s_next
        raise IntegratorError(
            f"entropy fixed point stalled (last update {prev_delta:.3e})"
        )

    # -- full step ----------------------------------------------------------

    def step(self, state: ph.FluidState, t: float = 0.0):
        """One step: the incoming state carries the previous velocity and the
        current density/entropy; returns ``(new_state, StepReport)``.

        The momentum balance couples the incoming velocity (paired with the
        density one step back -- cold start: the incoming density) to the new
        one.
        """
        geom, gas, phys, h = self.geom, self.gas, self.phys, self.h
        if self._d_prev is None:
            self._d_prev = state.d.copy()

        prev_term = self._transport_term(state.a, self._d_prev, -1.0)
        flux0 = self.layout.from_matrix(state.a)
        flux, newton_iters = self._solve_momentum(flux0, state.d, state.s, prev_term)
        a_new = self.layout.to_matrix(flux)

        d_new = fd.group_act_den(geom, state.d, gr.tau(-h * a_new, self.kind))

        theta_old = ph.temperature(state.d, state.s, gas)
        fric = ph.friction_power(geom, a_new, phys)
        heat = self.heat_source(t) if self.heat_source is not None else None
        s_new, entropy_iters = self._solve_entropy(
            a_new, state.d, state.s, d_new, theta_old, fric, heat
        )
        if not phys.insulated:
            bc = geom.mesh.boundary_cells
            s_new[bc] = ph.entropy_from_temperature(d_new[bc], phys.theta_env, gas)

        self._d_prev = state.d.copy()
        return ph.FluidState(a_new, d_new, s_new), StepReport(newton_iters, entropy_iters)

    def run(self, state: ph.FluidState, steps: int, observer=None, t0: float = 0.0):
        """Advance ``steps`` steps, invoking ``observer(k, t, state, report)``
        after each; solver failures are re-raised annotated with the step."""
        t = t0
        if observer is not None:
            observer(0, t, state, StepReport())
        for k in range(1, steps + 1):
            try:
                state, report = self.step(state, t)
            except IntegratorError as exc:
                raise IntegratorError(f"step {k}: {exc}") from exc
            t = t0 + k * self.h
            if observer is not None:
                observer(k, t, state, report)
        return state
