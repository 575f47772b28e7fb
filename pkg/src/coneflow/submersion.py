"""Horizontal/vertical calculus of the density-fibration and minimality.

The map sending a group element to the push-forward of the reference
density is a Riemannian submersion for the coefficient pair (1, 1/2); all
operations here are pinned to that pair.  Velocity pairs split at a
positive density rho into a vertical part (div(rho v) = 2 alpha rho) and a
horizontal part (grad Phi / 2, Phi), where the lift potential solves

    -(1/2) div(rho grad Phi) + 2 Phi rho = X.

The second fundamental form of the isotropy orbit produces a pressure via
the constant-coefficient operator 2 - Laplacian/2, and the minimality
harness certifies time windows (t1 - t0) < pi / sqrt(C) with C a sup bound
on the pressure Hessian blocks ((p''/2, p'), (p', p)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ch import CHTrajectory, flow_map
from .euler import pressure_from_state
from .grid import PeriodicGrid, diff_matrix
from .group import DensityField, VelocityPair, infinitesimal_action, lie_bracket

_HORIZONTALITY_RTOL = 1e-6


@dataclass(frozen=True)
class LiftResult:
    """Horizontal lift of a density perturbation at a positive density."""

    potential: np.ndarray
    pair: VelocityPair
    residual: float


def pair_inner(xi1: VelocityPair, xi2: VelocityPair,
               rho: DensityField) -> float:
    """Metric at rho for coefficient pair (1, 1/2): int (v1 v2 + a1 a2) rho."""
    grid = xi1.grid
    return float(grid.integrate(
        (xi1.v * xi2.v + xi1.alpha * xi2.alpha) * rho.values))


def horizontal_lift(rho: DensityField, x_rho: np.ndarray) -> LiftResult:
    """Solve -(rho Phi')'/2 + 2 Phi rho = X and return (Phi'/2, Phi).

    The operator is assembled from the dense Fourier differentiation
    matrix; it is symmetric positive definite for strictly positive rho.
    """
    grid = rho.grid
    x_rho = np.asarray(x_rho, dtype=float)
    if x_rho.shape != (grid.n,):
        raise ValueError("perturbation must be a nodal array on the grid")
    if np.min(rho.values) <= 0:
        raise ValueError("horizontal lift requires a strictly positive density")
    d = diff_matrix(grid.n)
    op = -0.5 * d @ (rho.values[:, None] * d) + 2.0 * np.diag(rho.values)
    phi = np.linalg.solve(op, x_rho)
    residual = float(np.max(np.abs(
        -0.5 * grid.deriv(rho.values * grid.deriv(phi))
        + 2.0 * phi * rho.values - x_rho)))
    pair = VelocityPair(grid, 0.5 * grid.deriv(phi), phi)
    return LiftResult(phi, pair, residual)


@dataclass(frozen=True)
class SplitResult:
    horizontal: VelocityPair
    vertical: VelocityPair
    lift: LiftResult
    orthogonality_defect: float
    vertical_defect: float


def vertical_horizontal_split(xi: VelocityPair, rho: DensityField) -> SplitResult:
    """Split xi at rho: the horizontal part lifts the action of xi on rho."""
    grid = xi.grid
    x_rho = infinitesimal_action(xi, rho)
    lift = horizontal_lift(rho, x_rho)
    vertical = VelocityPair(grid, xi.v - lift.pair.v, xi.alpha - lift.pair.alpha)
    ortho = abs(pair_inner(lift.pair, vertical, rho))
    vert_defect = float(np.max(np.abs(infinitesimal_action(vertical, rho))))
    return SplitResult(lift.pair, vertical, lift, ortho, vert_defect)


@dataclass(frozen=True)
class IIResult:
    """Second fundamental form value (-p'/2, -p) of the isotropy orbit."""

    pair: VelocityPair
    pressure: np.ndarray
    raw_asymmetry: float
    tangency_defect: float


def _ii_rhs(grid: PeriodicGrid, xi1: VelocityPair, xi2: VelocityPair) -> np.ndarray:
    u, alpha = xi1.v, xi1.alpha
    v, beta = xi2.v, xi2.alpha
    return (grid.deriv(u * grid.deriv(v) + beta * u + alpha * v)
            - 2.0 * grid.deriv(beta) * u + 2.0 * u * v - 2.0 * alpha * beta)


def second_fundamental_form(xi1: VelocityPair, xi2: VelocityPair) -> IIResult:
    """Second fundamental form at the identity over the uniform density.

    The defining right-hand side is symmetrized over the two arguments;
    the raw asymmetry (zero for isotropy-tangent inputs) is recorded.
    The pressure solves (2 - d_xx/2) p = rhs with the Fourier symbol
    2 + k^2/2.
    """
    grid = xi1.grid
    rhs12 = _ii_rhs(grid, xi1, xi2)
    rhs21 = _ii_rhs(grid, xi2, xi1)
    raw_asymmetry = float(np.max(np.abs(rhs12 - rhs21)))
    rhs = 0.5 * (rhs12 + rhs21)
    vh = np.fft.rfft(rhs)
    k = np.arange(grid.n // 2 + 1, dtype=float)
    p = np.fft.irfft(vh / (2.0 + 0.5 * k * k), n=grid.n)
    tangency = max(
        float(np.max(np.abs(xi1.alpha - 0.5 * grid.deriv(xi1.v)))),
        float(np.max(np.abs(xi2.alpha - 0.5 * grid.deriv(xi2.v)))))
    pair = VelocityPair(grid, -0.5 * grid.deriv(p), -p)
    return IIResult(pair, p, raw_asymmetry, tangency)


def gauss_codazzi_sectional(xi1: VelocityPair, xi2: VelocityPair) -> float:
    """Sectional curvature of the isotropy orbit from the Gauss equation.

    The ambient space is flat, so the curvature reduces to
    (<II(x1,x1), II(x2,x2)> - |II(x1,x2)|^2) / Gram(x1, x2) with the
    identity-based metric over the uniform density.
    """
    grid = xi1.grid
    rho1 = DensityField(grid, np.ones(grid.n))
    g11 = pair_inner(xi1, xi1, rho1)
    g22 = pair_inner(xi2, xi2, rho1)
    g12 = pair_inner(xi1, xi2, rho1)
    gram = g11 * g22 - g12 * g12
    if gram <= 1e-14 * max(g11 * g22, 1e-300):
        raise ValueError("sectional curvature of a degenerate plane")
    ii11 = second_fundamental_form(xi1, xi1).pair
    ii22 = second_fundamental_form(xi2, xi2).pair
    ii12 = second_fundamental_form(xi1, xi2).pair
    num = (pair_inner(ii11, ii22, rho1) - pair_inner(ii12, ii12, rho1))
    return float(num / gram)


def oneill_curvature(xi1: VelocityPair, xi2: VelocityPair,
                     rho: DensityField) -> float:
    """Sectional curvature of the density space via the O'Neill correction.

    Inputs must be horizontal at rho; the pair is orthonormalized
    internally (a degenerate plane returns 0).  The cone over the circle
    is flat away from the apex, so only 3/4 |vertical([xi1, xi2])|^2
    survives.
    """
    for xi in (xi1, xi2):
        split = vertical_horizontal_split(xi, rho)
        vnorm = np.sqrt(pair_inner(split.vertical, split.vertical, rho))
        norm = np.sqrt(pair_inner(xi, xi, rho))
        if vnorm > _HORIZONTALITY_RTOL * max(norm, 1e-300):
            raise ValueError("oneill_curvature requires horizontal inputs")
    n1 = np.sqrt(pair_inner(xi1, xi1, rho))
    if n1 <= 0:
        return 0.0
    e1 = VelocityPair(xi1.grid, xi1.v / n1, xi1.alpha / n1)
    c = pair_inner(xi2, e1, rho)
    w = VelocityPair(xi2.grid, xi2.v - c * e1.v, xi2.alpha - c * e1.alpha)
    n2 = np.sqrt(pair_inner(w, w, rho))
    if n2 <= 1e-12 * np.sqrt(pair_inner(xi2, xi2, rho)):
        return 0.0
    e2 = VelocityPair(w.grid, w.v / n2, w.alpha / n2)
    bracket = lie_bracket(e1, e2)
    vert = vertical_horizontal_split(bracket, rho).vertical
    return 0.75 * pair_inner(vert, vert, rho)


# -- minimality of constrained geodesics ------------------------------------


@dataclass(frozen=True)
class PerturbationFamily:
    """Seeded competitors: truncated Fourier modes in x with sine envelopes
    in t that vanish at both endpoints.  Members are normalized so that
    max(|eta|, |d_x eta|) = 1."""

    members: np.ndarray  # (n_members, n_times, n)
    seed: int


def make_perturbation_family(grid: PeriodicGrid, times: np.ndarray,
                             n_members: int, seed: int,
                             n_x_modes: int = 3,
                             n_t_modes: int = 3) -> PerturbationFamily:
    rng = np.random.default_rng(seed)
    t0, t1 = times[0], times[-1]
    s = (times - t0) / (t1 - t0)
    x = grid.x
    members = np.empty((n_members, len(times), grid.n))
    for i in range(n_members):
        eta = np.zeros((len(times), grid.n))
        for k in range(1, n_t_modes + 1):
            envelope = np.sin(np.pi * k * s)
            fx = rng.standard_normal() * np.ones(grid.n)
            for mode in range(1, n_x_modes + 1):
                fx = fx + (rng.standard_normal() * np.cos(mode * x)
                           + rng.standard_normal() * np.sin(mode * x)) / mode
            eta += envelope[:, None] * fx[None, :]
        scale = max(np.max(np.abs(eta)),
                    np.max(np.abs(grid.deriv(eta))))
        members[i] = eta / scale
    return PerturbationFamily(members, seed)


def path_action(grid: PeriodicGrid, times: np.ndarray, phi: np.ndarray,
                lam: np.ndarray) -> float:
    """Discrete kinetic action of a path of pairs (phi, lam).

    Uses the flat planar chart z = lam exp(i phi), whose squared increment
    equals the cone line element at coefficients (1, 1/2); the action is
    sum |z_{j+1} - z_j|^2 / dt integrated in x.
    """
    z = lam * np.exp(1j * phi)
    dz = np.diff(z, axis=0)
    dts = np.diff(times)
    return float(grid.h * np.sum(np.abs(dz) ** 2 / dts[:, None]))


def hessian_certificate(traj: CHTrajectory) -> tuple[float, float]:
    """Sup bound C on the pressure Hessian blocks and the window pi/sqrt(C).

    The blocks are ((p''/2, p'), (p', p)) pointwise in x; C is the largest
    absolute eigenvalue over the interior trajectory times.
    """
    grid = traj.grid
    c_max = 0.0
    for j in range(1, len(traj.times) - 1):
        u = traj.u[j]
        u_dot = (traj.u[j + 1] - traj.u[j - 1]) / (2.0 * traj.dt)
        p = pressure_from_state(grid, u, u_dot)
        px = grid.deriv(p)
        pxx = grid.deriv(p, 2)
        tr = 0.5 * pxx + p
        det = 0.5 * pxx * p - px * px
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        eig_hi = 0.5 * (tr + disc)
        eig_lo = 0.5 * (tr - disc)
        c_max = max(c_max, float(np.max(np.maximum(np.abs(eig_hi),
                                                   np.abs(eig_lo)))))
    window = np.inf if c_max == 0.0 else np.pi / np.sqrt(c_max)
    return c_max, window


@dataclass(frozen=True)
class MinimalityReport:
    geodesic_action: float
    competitor_actions: np.ndarray  # (n_members, n_amplitudes)
    min_competitor_action: float
    hessian_bound: float
    window: float
    window_ok: bool
    amplitudes: tuple


def minimality_test(traj: CHTrajectory, family: PerturbationFamily,
                    amplitudes: tuple = (1e-2, 1e-1)) -> MinimalityReport:
    """Compare the geodesic action against isotropy-constrained competitors.

    Competitors perturb the flow phi and recompute lam = sqrt(d_x phi), so
    they stay on the constraint with the same endpoints.  window_ok states
    whether the trajectory length is inside the certified window.
    """
    grid = traj.grid
    path = flow_map(traj)
    a_geo = path_action(grid, path.times, path.phi, path.lam)
    c_bound, window = hessian_certificate(traj)
    duration = float(path.times[-1] - path.times[0])
    window_ok = duration < window
    actions = np.empty((len(family.members), len(amplitudes)))
    for i, eta in enumerate(family.members):
        for j, amp in enumerate(amplitudes):
            phi_c = path.phi + amp * eta
            phi_x = 1.0 + grid.deriv(phi_c - grid.x[None, :])
            if np.min(phi_x) <= 0:
                raise ValueError(
                    "competitor perturbation breaks monotonicity; "
                    "reduce the amplitude")
            lam_c = np.sqrt(phi_x)
            actions[i, j] = path_action(grid, path.times, phi_c, lam_c)
    return MinimalityReport(a_geo, actions, float(np.min(actions)),
                            c_bound, window, window_ok, tuple(amplitudes))
