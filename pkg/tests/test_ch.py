"""Momentum-form evolution of the two-parameter family and its flow map."""
import numpy as np
import pytest

from coneflow import (
    CHBlowupError,
    ConeParams,
    PeriodicGrid,
    ch_invariants,
    ch_rhs,
    ch_solve,
    flow_map,
)


def manual_rhs(grid, u, params):
    # independent assembly: dense derivative matrix and explicit 2/3 mask
    from coneflow import diff_matrix
    d = diff_matrix(grid.n)
    a2, b2 = params.a ** 2, params.b ** 2

    def mask(f):
        c = np.fft.rfft(f)
        k = np.arange(grid.n // 2 + 1)
        c[k > grid.n / 3.0] = 0.0
        return np.fft.irfft(c, n=grid.n)

    m = a2 * u - b2 * (d @ (d @ u))
    dm = -mask(u * (d @ m)) - 2.0 * mask((d @ u) * m)
    c = np.fft.rfft(dm)
    k = np.arange(grid.n // 2 + 1)
    return np.fft.irfft(c / (a2 + b2 * k * k), n=grid.n)


def test_rhs_matches_independent_assembly():
    grid = PeriodicGrid(64)
    rng = np.random.default_rng(30)
    params = ConeParams(1.3, 0.6)
    for _ in range(3):
        u = np.zeros(grid.n)
        for k in range(1, 6):
            u += (rng.normal() * np.cos(k * grid.x)
                  + rng.normal() * np.sin(k * grid.x)) / k
        gap = np.max(np.abs(ch_rhs(grid, u, params) - manual_rhs(grid, u, params)))
        assert gap < 1e-12


def test_constant_data_is_stationary():
    grid = PeriodicGrid(64)
    traj = ch_solve(grid, 0.8 * np.ones(grid.n), 1.0, 1e-2)
    assert np.max(np.abs(traj.u - 0.8)) < 1e-12


def test_energy_and_momentum_conserved():
    grid = PeriodicGrid(128)
    u0 = 0.2 * np.sin(grid.x)
    traj = ch_solve(grid, u0, 0.5, 1e-3)
    ref = ch_invariants(grid, u0)
    for j in (len(traj.times) // 2, len(traj.times) - 1):
        inv = ch_invariants(grid, traj.u[j])
        assert abs(inv["energy"] - ref["energy"]) < 1e-10 * ref["energy"]
        assert abs(inv["momentum_mean"] - ref["momentum_mean"]) < 1e-10


def test_invariant_values_on_sine():
    grid = PeriodicGrid(64)
    inv = ch_invariants(grid, np.sin(grid.x))
    # int sin^2 + (1/4) cos^2 = 5 pi / 4; momentum integrates to zero
    assert inv["energy"] == pytest.approx(1.25 * np.pi, abs=1e-12)
    assert inv["momentum_mean"] == pytest.approx(0.0, abs=1e-12)


def test_time_reversibility():
    grid = PeriodicGrid(128)
    u0 = 0.2 * np.sin(grid.x) + 0.05 * np.cos(2 * grid.x)
    fwd = ch_solve(grid, u0, 0.5, 1e-3)
    back = ch_solve(grid, fwd.u[-1], -0.5, -1e-3)
    assert np.max(np.abs(back.u[-1] - u0)) < 1e-9


def test_spectral_self_convergence():
    dt = 1e-3
    ref_grid = PeriodicGrid(1024)
    ref = ch_solve(ref_grid, 0.2 * np.sin(ref_grid.x)
                   + 0.1 * np.cos(2 * ref_grid.x), 1.0, dt)
    errors = []
    for n in (64, 128, 256):
        grid = PeriodicGrid(n)
        traj = ch_solve(grid, 0.2 * np.sin(grid.x) + 0.1 * np.cos(2 * grid.x),
                        1.0, dt)
        stride = 1024 // n
        errors.append(float(np.max(np.abs(traj.u[-1] - ref.u[-1][::stride]))))
    # super-algebraic decay: each refinement gains orders of magnitude
    assert errors[1] < 1e-3 * errors[0]
    assert errors[2] < 1e-3 * errors[1] or errors[2] < 1e-13
    assert errors[-1] < 1e-12


def test_wave_breaking_raises_with_diagnostics():
    grid = PeriodicGrid(64)
    with pytest.raises(CHBlowupError) as info:
        ch_solve(grid, 3.0 * np.sin(grid.x), 4.0, 1e-3)
    diag = info.value.diagnostics
    assert 0.0 < diag["time"] < 1.0
    assert diag["tail_fraction"] > 0.02


def test_flow_map_tracks_isotropy():
    grid = PeriodicGrid(128)
    traj = ch_solve(grid, 0.2 * np.sin(grid.x), 1.0, 1e-3)
    path = flow_map(traj)
    assert path.isotropy_residual < 1e-6
    assert path.min_phi_x > 0.5
    # gauge factor squares to the derivative of the flow
    phi_x = 1.0 + grid.deriv(path.phi - grid.x[None, :])
    assert np.max(np.abs(path.lam_ode ** 2 - phi_x)) < 1e-6
    # flow starts at the identity
    assert np.max(np.abs(path.phi[0] - grid.x)) == 0.0


def test_flow_map_detects_lost_invertibility():
    grid = PeriodicGrid(128)
    traj = ch_solve(grid, 2.5 * np.sin(grid.x), 1.2, 2e-3)
    with pytest.raises(CHBlowupError) as info:
        flow_map(traj)
    assert info.value.diagnostics["min_phi_x"] < 1e-6


def test_flow_map_advects_with_the_velocity():
    # d/dt phi = u(t, phi): check with a central difference mid-trajectory
    grid = PeriodicGrid(128)
    traj = ch_solve(grid, 0.3 * np.sin(grid.x), 0.4, 1e-3)
    path = flow_map(traj)
    j = len(path.times) // 2
    dphi = (path.phi[j + 1] - path.phi[j - 1]) / (2 * traj.dt)
    u_at = grid.trig_eval(traj.u[j], path.phi[j])
    assert np.max(np.abs(dphi - u_at)) < 1e-6


def test_solver_input_validation():
    grid = PeriodicGrid(64)
    with pytest.raises(ValueError):
        ch_solve(grid, np.zeros(grid.n - 2), 1.0, 1e-2)
    with pytest.raises(ValueError):
        ch_solve(grid, np.zeros(grid.n), 1.0, -1e-2)
    with pytest.raises(ValueError):
        ch_solve(grid, np.zeros(grid.n), 0.0, 1e-2)
