"""Dynamic unbalanced transport distance on the circle.

The squared distance is the infimum of the 1-homogeneous action

    J(rho, m, mu) = int int ( a^2 m^2 + b^2 mu^2 ) / rho  dx dt

over solutions of d_t rho + d_x m = mu joining two measures in unit time.
The discretization is a staggered space-time grid (densities at time
slices, momenta at space faces, sources at cell centers) solved with a
first-order primal-dual iteration that alternates the exact pointwise
proximal map of the action integrand with the Euclidean projection onto
the continuity constraint (FFT in space, cosine transform in time).

Three scalar conventions coexist in this corner of the code base and are
never converted implicitly (see CONVENTIONS): the lift potential Phi of
horizontal pairs (Phi'/2, Phi), the geodesic pressure p, and the variable
q of the displayed Hamiltonian system integrated by hamiltonian_flow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

from .cone import ConeParams
from .grid import PeriodicGrid, TWO_PI
from .group import DensityField, VelocityPair, infinitesimal_action
from .submersion import horizontal_lift

CONVENTIONS = {
    "lift-potential": "horizontal pairs are (Phi'/2, Phi) with the potential "
                      "solving -(rho Phi')'/2 + 2 Phi rho = X",
    "pressure": "geodesic forcing is (-p'/2, -lam p); p is recovered from "
                "the radial momentum balance",
    "displayed-hamiltonian": "d_t q + |q'|^2 + q^2 = 0, "
                             "d_t rho + (rho q')' - 2 q rho = 0; a distinct "
                             "normalization kept as a diagnostic only",
}


class WFRConvergenceError(RuntimeError):
    """Primal-dual iteration exhausted max_iters; carries the partial result."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class StaggeredGrid:
    """nt time cells on [0, 1] and nx periodic space cells on [0, 2*pi).

    Densities live on the nt+1 time slices, momenta on the nx space faces
    at half-integer positions, sources at the nt * nx cell centers.
    """

    nt: int
    nx: int

    def __post_init__(self):
        if self.nt < 4 or self.nx < 4:
            raise ValueError("staggered grid needs nt >= 4 and nx >= 4")

    @property
    def dt(self) -> float:
        return 1.0 / self.nt

    @property
    def h(self) -> float:
        return TWO_PI / self.nx

    @property
    def cell_measure(self) -> float:
        return self.dt * self.h

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.h

    @property
    def t_slices(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt

    @property
    def t_cells(self) -> np.ndarray:
        return (np.arange(self.nt) + 0.5) * self.dt


@dataclass(frozen=True)
class WFRVariables:
    grid: StaggeredGrid
    rho: np.ndarray  # (nt+1, nx) at time slices
    m: np.ndarray    # (nt, nx) at space faces i+1/2
    mu: np.ndarray   # (nt, nx) at cell centers

    def __post_init__(self):
        nt, nx = self.grid.nt, self.grid.nx
        rho = np.asarray(self.rho, dtype=float)
        m = np.asarray(self.m, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if rho.shape != (nt + 1, nx) or m.shape != (nt, nx) or mu.shape != (nt, nx):
            raise ValueError("staggered arrays have inconsistent shapes")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "mu", mu)


def interpolate_centers(vars: WFRVariables):
    """Average the staggered variables to the cell centers."""
    rho_c = 0.5 * (vars.rho[:-1] + vars.rho[1:])
    m_c = 0.5 * (vars.m + np.roll(vars.m, 1, axis=1))
    return rho_c, m_c, vars.mu.copy()


def _adjoint_centers(grid: StaggeredGrid, w_rho, w_m, w_mu):
    """Adjoint of interpolate_centers; boundary density slices receive zero."""
    rho = np.zeros((grid.nt + 1, grid.nx))
    rho[1:-1] = 0.5 * (w_rho[:-1] + w_rho[1:])
    m = 0.5 * (w_m + np.roll(w_m, -1, axis=1))
    return rho, m, w_mu.copy()


def continuity_residual(vars: WFRVariables) -> np.ndarray:
    """d_t rho + d_x m - mu at the cell centers."""
    g = vars.grid
    return ((vars.rho[1:] - vars.rho[:-1]) / g.dt
            + (vars.m - np.roll(vars.m, 1, axis=1)) / g.h
            - vars.mu)


def wfr_action(vars: WFRVariables, params: ConeParams = ConeParams()) -> float:
    """Cell-measure-weighted action sum((a^2 m^2 + b^2 mu^2)/rho).

    The integrand is the 1-homogeneous perspective extension: zero mass
    with zero flux contributes nothing, zero mass with flux is infinite.
    """
    rho_c, m_c, mu_c = interpolate_centers(vars)
    quad = params.a ** 2 * m_c ** 2 + params.b ** 2 * mu_c ** 2
    if np.any(rho_c < 0):
        return float("inf")
    pos = rho_c > 0
    if np.any(quad[~pos] > 0):
        return float("inf")
    total = np.sum(quad[pos] / rho_c[pos])
    return float(vars.grid.cell_measure * total)


# -- exact proximal map of the perspective integrand -------------------------


def prox_action(rho, m, mu, gamma: float,
                params: ConeParams = ConeParams()):
    """Pointwise prox of gamma * (a^2 m^2 + b^2 mu^2)/rho on rho >= 0.

    Eliminating m and mu in closed form leaves one increasing scalar
    equation in rho (cubic when a = b, quintic otherwise) solved by a
    safeguarded Newton iteration to 1e-12; the prox hits the apex
    (0, 0, 0) exactly when the root leaves the positive axis.
    """
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if gamma <= 0:
        raise ValueError("prox weight gamma must be positive")
    c1 = 2.0 * gamma * params.a ** 2
    c2 = 2.0 * gamma * params.b ** 2
    qm = params.a ** 2 * m ** 2
    qmu = params.b ** 2 * mu ** 2
    slack0 = gamma * (qm / c1 ** 2 + qmu / c2 ** 2)
    at_apex = rho + slack0 <= 0.0

    lo = np.maximum(rho, 0.0)
    hi = rho + slack0
    hi = np.maximum(hi, lo)
    r = 0.5 * (lo + hi)
    # df >= 1 everywhere, so |f(r)| bounds the distance to the root and
    # apex cells (resolved analytically below) are exempt from the test.
    for _ in range(200):
        d1 = r + c1
        d2 = r + c2
        f = r - rho - gamma * (qm / d1 ** 2 + qmu / d2 ** 2)
        if np.max(np.where(at_apex, 0.0, np.abs(f))) \
                < 1e-13 * (1.0 + np.max(np.abs(r))):
            break
        lo = np.where(f <= 0, r, lo)
        hi = np.where(f > 0, r, hi)
        df = 1.0 + 2.0 * gamma * (qm / d1 ** 3 + qmu / d2 ** 3)
        r_new = r - f / df
        outside = (r_new < lo) | (r_new > hi)
        r = np.where(outside, 0.5 * (lo + hi), r_new)
    r = np.where(at_apex, 0.0, np.maximum(r, 0.0))
    m_out = np.where(at_apex, 0.0, r * m / (r + c1))
    mu_out = np.where(at_apex, 0.0, r * mu / (r + c2))
    return r, m_out, mu_out


# -- projection onto the continuity constraint --------------------------------


def continuity_project(vars: WFRVariables, rho0: np.ndarray, rho1: np.ndarray,
                       balanced: bool = False) -> WFRVariables:
    """Euclidean projection onto d_t rho + d_x m - mu = 0 with pinned ends.

    The normal equations decouple as a Neumann Laplacian in time (cosine
    transform) plus a periodic Laplacian in space (FFT) plus the identity
    from the source term; balanced mode drops mu, requires matching
    masses, and treats the constant mode as the pseudo-inverse does.
    """
    g = vars.grid
    rho = vars.rho.copy()
    rho[0] = rho0
    rho[-1] = rho1
    m = vars.m.copy()
    mu = np.zeros_like(vars.mu) if balanced else vars.mu.copy()
    work = WFRVariables(g, rho, m, mu)
    r = continuity_residual(work)
    if balanced:
        mass_gap = g.h * float(np.sum(rho1) - np.sum(rho0))
        scale = g.h * float(np.sum(rho0) + np.sum(rho1)) + 1.0
        if abs(mass_gap) > 1e-9 * scale:
            raise ValueError(
                "balanced projection is infeasible: mass mismatch "
                f"{mass_gap:.3e}")

    lam_t = (2.0 - 2.0 * np.cos(np.pi * np.arange(g.nt) / g.nt)) / g.dt ** 2
    lam_x = (2.0 - 2.0 * np.cos(TWO_PI * np.arange(g.nx) / g.nx)) / g.h ** 2
    denom = lam_t[:, None] + lam_x[None, :] + (0.0 if balanced else 1.0)

    r_hat = np.fft.fft(dct(r, type=2, axis=0), axis=1)
    if balanced:
        denom = denom.copy()
        denom[0, 0] = 1.0
        r_hat[0, 0] = 0.0
    q = idct(np.fft.ifft(r_hat / denom, axis=1).real, type=2, axis=0)

    rho[1:-1] -= (q[:-1] - q[1:]) / g.dt
    m -= (q - np.roll(q, -1, axis=1)) / g.h
    if not balanced:
        mu = mu + q
    return WFRVariables(g, rho, m, mu)


# -- distance solver ----------------------------------------------------------


@dataclass(frozen=True)
class WFRResult:
    distance: float
    action: float
    iterations: int
    converged: bool
    constraint_residual: float
    rel_change: float
    vars: WFRVariables
    rho_c: np.ndarray
    m_c: np.ndarray
    mu_c: np.ndarray


def _validate_endpoint(rho, nx_name="rho"):
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 1:
        raise ValueError(f"{nx_name} must be a 1d nodal array")
    if not np.all(np.isfinite(rho)) or np.min(rho) < 0:
        raise ValueError(f"{nx_name} must be finite and nonnegative")
    return rho


def solve_wfr(rho0: np.ndarray, rho1: np.ndarray, nt: int,
              params: ConeParams = ConeParams(), balanced: bool = False,
              tol: float = 1e-7, max_iters: int = 50000,
              sigma: float = 0.95, tau: float = 0.95,
              check_every: int = 25, min_iters: int = 200,
              init: WFRVariables | None = None) -> WFRResult:
    """Distance between two densities by primal-dual proximal splitting.

    The primal iterate is kept feasible by projecting onto the continuity
    constraint every iteration; the dual update applies the exact prox of
    the action through the Moreau identity.  Steps must satisfy
    sigma * tau * |K|^2 < 1 where K is the staggered-to-centered
    interpolation (|K| <= 1).  Stops when the windowed relative change of
    the action drops below tol; raises WFRConvergenceError at max_iters.

    The problem is convex, so the optional warm start `init` (projected
    onto the constraint set before use) changes only the iteration count,
    never the limit.
    """
    rho0 = _validate_endpoint(rho0, "rho0")
    rho1 = _validate_endpoint(rho1, "rho1")
    if rho0.shape != rho1.shape:
        raise ValueError("endpoint densities must share a grid")
    if sigma * tau >= 1.0:
        raise ValueError("need sigma * tau < 1 for the interpolation norm")
    nx = len(rho0)
    g = StaggeredGrid(nt, nx)
    if balanced:
        mass_gap = g.h * float(np.sum(rho1) - np.sum(rho0))
        scale = g.h * float(np.sum(rho0) + np.sum(rho1)) + 1.0
        if abs(mass_gap) > 1e-9 * scale:
            raise ValueError("balanced transport requires equal masses")

    if init is not None:
        if init.grid != g:
            raise ValueError("warm start lives on a different grid")
        u = continuity_project(init, rho0, rho1, balanced=balanced)
    else:
        # feasible start: linear density interpolation, growth absorbed by mu
        frac = g.t_slices[:, None]
        rho = (1.0 - frac) * rho0[None, :] + frac * rho1[None, :]
        m = np.zeros((g.nt, g.nx))
        mu = np.zeros((g.nt, g.nx)) if balanced else \
            np.broadcast_to((rho1 - rho0)[None, :], (g.nt, g.nx)).copy()
        u = WFRVariables(g, rho, m, mu)
        if balanced:
            u = continuity_project(u, rho0, rho1, balanced=True)

    w_rho = np.zeros((g.nt, g.nx))
    w_m = np.zeros((g.nt, g.nx))
    w_mu = np.zeros((g.nt, g.nx))
    gamma = 1.0 / sigma
    measure = g.cell_measure

    def centered_action(p_rho, p_m, p_mu):
        quad = params.a ** 2 * p_m ** 2 + params.b ** 2 * p_mu ** 2
        pos = p_rho > 0
        return measure * float(np.sum(quad[pos] / p_rho[pos]))

    action_prev = np.inf
    action = np.inf
    rel_change = np.inf
    iterations = 0
    converged = False
    p_rho, p_m, p_mu = interpolate_centers(u)
    for k in range(1, max_iters + 1):
        iterations = k
        a_rho, a_m, a_mu = _adjoint_centers(g, w_rho, w_m, w_mu)
        u_new = WFRVariables(g, u.rho - tau * a_rho, u.m - tau * a_m,
                             u.mu - tau * a_mu)
        u_new = continuity_project(u_new, rho0, rho1, balanced=balanced)
        bar = WFRVariables(g, 2.0 * u_new.rho - u.rho, 2.0 * u_new.m - u.m,
                           2.0 * u_new.mu - u.mu)
        v_rho, v_m, v_mu = interpolate_centers(bar)
        y_rho = w_rho + sigma * v_rho
        y_m = w_m + sigma * v_m
        y_mu = w_mu + sigma * v_mu
        p_rho, p_m, p_mu = prox_action(y_rho / sigma, y_m / sigma,
                                       y_mu / sigma, gamma, params)
        w_rho = y_rho - sigma * p_rho
        w_m = y_m - sigma * p_m
        w_mu = y_mu - sigma * p_mu
        u = u_new
        if k % check_every == 0 or k == max_iters:
            action = centered_action(p_rho, p_m, p_mu)
            rel_change = abs(action - action_prev) / max(abs(action), 1e-30)
            action_prev = action
            if k >= min_iters and rel_change < tol:
                converged = True
                break

    constraint = float(np.max(np.abs(continuity_residual(u))))
    result = WFRResult(float(np.sqrt(max(action, 0.0))), action, iterations,
                       converged, constraint, rel_change, u, p_rho, p_m, p_mu)
    if not converged:
        raise WFRConvergenceError(
            f"no convergence in {max_iters} iterations "
            f"(relative change {rel_change:.3e})", result)
    return result


def hellinger_distance(grid: PeriodicGrid, rho0: np.ndarray, rho1: np.ndarray,
                       params: ConeParams = ConeParams()) -> float:
    """Pure growth distance 2 b | sqrt(rho1) - sqrt(rho0) |_{L2}."""
    rho0 = _validate_endpoint(rho0, "rho0")
    rho1 = _validate_endpoint(rho1, "rho1")
    gap = np.sqrt(rho1) - np.sqrt(rho0)
    return float(2.0 * params.b * np.sqrt(grid.integrate(gap ** 2)))


# -- geodesic flows of the fibration ------------------------------------------


@dataclass(frozen=True)
class HorizontalFlowResult:
    times: np.ndarray
    rho: np.ndarray    # (len(times), n)
    v: np.ndarray
    alpha: np.ndarray
    action: float
    horizontality_defect: float
    mass: np.ndarray


def horizontal_flow(grid: PeriodicGrid, rho0: np.ndarray, phi0: np.ndarray,
                    t_final: float, dt: float,
                    defect_every: int = 10) -> HorizontalFlowResult:
    """Geodesic flow launched horizontally from the potential phi0.

    Integrates the coefficient-(1, 1/2) Eulerian system

        v' + v v_x + 2 alpha v = 0,
        alpha' + alpha_x v + alpha^2 - v^2 = 0,
        rho' + (v rho)_x - 2 alpha rho = 0,

    from (v, alpha)(0) = (phi0_x / 2, phi0).  Horizontality (the pair
    equals the lift of its own action) is preserved; the reported defect
    is |v - lift_v| checked every defect_every steps.
    """
    rho0 = _validate_endpoint(rho0, "rho0")
    phi0 = np.asarray(phi0, dtype=float)
    if dt <= 0 or t_final <= 0:
        raise ValueError("t_final and dt must be positive")
    n_steps = int(round(t_final / dt))
    v = 0.5 * grid.deriv(phi0)
    alpha = phi0.copy()
    rho = rho0.copy()

    def rhs(v, alpha, rho):
        vx = grid.deriv(v)
        ax = grid.deriv(alpha)
        dv = -grid.dealias(v * vx) - 2.0 * grid.dealias(alpha * v)
        da = (-grid.dealias(ax * v) - grid.dealias(alpha * alpha)
              + grid.dealias(v * v))
        dr = -grid.deriv(grid.dealias(v * rho)) + 2.0 * grid.dealias(alpha * rho)
        return dv, da, dr

    times = np.arange(n_steps + 1) * dt
    out_rho = np.empty((n_steps + 1, grid.n))
    out_v = np.empty((n_steps + 1, grid.n))
    out_a = np.empty((n_steps + 1, grid.n))
    out_rho[0], out_v[0], out_a[0] = rho, v, alpha
    energies = [float(grid.integrate((v ** 2 + alpha ** 2) * rho))]
    defect = 0.0

    def lift_defect(v, alpha, rho):
        field = DensityField(grid, np.maximum(rho, 0.0))
        pair = VelocityPair(grid, v, alpha)
        lift = horizontal_lift(field, infinitesimal_action(pair, field))
        return float(np.max(np.abs(v - lift.pair.v)))

    defect = lift_defect(v, alpha, rho)
    for i in range(n_steps):
        k1 = rhs(v, alpha, rho)
        k2 = rhs(v + 0.5 * dt * k1[0], alpha + 0.5 * dt * k1[1],
                 rho + 0.5 * dt * k1[2])
        k3 = rhs(v + 0.5 * dt * k2[0], alpha + 0.5 * dt * k2[1],
                 rho + 0.5 * dt * k2[2])
        k4 = rhs(v + dt * k3[0], alpha + dt * k3[1], rho + dt * k3[2])
        v = v + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        alpha = alpha + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        rho = rho + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not np.all(np.isfinite(v)) or np.min(rho) < -1e-8:
            raise RuntimeError(f"horizontal flow lost positivity at "
                               f"t={(i + 1) * dt:.6g}")
        out_rho[i + 1], out_v[i + 1], out_a[i + 1] = rho, v, alpha
        energies.append(float(grid.integrate((v ** 2 + alpha ** 2) * rho)))
        if (i + 1) % defect_every == 0 or i + 1 == n_steps:
            defect = max(defect, lift_defect(v, alpha, rho))
    energies = np.array(energies)
    action = float(np.trapezoid(energies, times))
    mass = grid.h * np.sum(out_rho, axis=1)
    return HorizontalFlowResult(times, out_rho, out_v, out_a, action,
                                defect, mass)


@dataclass(frozen=True)
class HamiltonianFlowResult:
    convention: str
    times: np.ndarray
    rho: np.ndarray
    q: np.ndarray


def hamiltonian_flow(grid: PeriodicGrid, rho0: np.ndarray, q0: np.ndarray,
                     t_final: float, dt: float) -> HamiltonianFlowResult:
    """Diagnostic integration of the displayed Hamiltonian system.

    d_t q + |q_x|^2 + q^2 = 0 and d_t rho + (rho q_x)_x - 2 q rho = 0.
    This normalization is NOT the lift convention used by horizontal_flow;
    results carry the convention tag and are never mixed with lift
    potentials or pressures.
    """
    rho0 = _validate_endpoint(rho0, "rho0")
    q = np.asarray(q0, dtype=float).copy()
    rho = rho0.copy()
    if dt <= 0 or t_final <= 0:
        raise ValueError("t_final and dt must be positive")
    n_steps = int(round(t_final / dt))

    def rhs(q, rho):
        qx = grid.deriv(q)
        dq = -grid.dealias(qx * qx) - grid.dealias(q * q)
        dr = -grid.deriv(grid.dealias(rho * qx)) + 2.0 * grid.dealias(q * rho)
        return dq, dr

    times = np.arange(n_steps + 1) * dt
    out_q = np.empty((n_steps + 1, grid.n))
    out_rho = np.empty((n_steps + 1, grid.n))
    out_q[0], out_rho[0] = q, rho
    for i in range(n_steps):
        k1 = rhs(q, rho)
        k2 = rhs(q + 0.5 * dt * k1[0], rho + 0.5 * dt * k1[1])
        k3 = rhs(q + 0.5 * dt * k2[0], rho + 0.5 * dt * k2[1])
        k4 = rhs(q + dt * k3[0], rho + dt * k3[1])
        q = q + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        rho = rho + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        out_q[i + 1], out_rho[i + 1] = q, rho
    return HamiltonianFlowResult("displayed-hamiltonian", times, out_rho, out_q)
