"""Uniform periodic grids on [0, 2*pi) and the calculus used everywhere else.

All fields are sampled on n equispaced nodes.  Derivatives are Fourier
collocation derivatives, integrals are uniform Riemann sums (exact for
trigonometric polynomials below the Nyquist band), and off-grid evaluation
of smooth fields is done by summing the trigonometric interpolant.  Circle
maps are handled through their monotone lifts; lifts are interpolated with
periodic cubic splines and inverted with safeguarded bisection/Newton.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Reduce angles to [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def circle_distance(x1, x2):
    """Geodesic distance on the unit circle: min(|dx|, 2*pi - |dx|)."""
    d = np.abs(wrap(x1) - wrap(x2))
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class PeriodicGrid:
    """n equispaced nodes x_i = 2*pi*i/n.  n must be even and >= 8."""

    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    # -- spectral calculus -------------------------------------------------

    def _wavenumbers(self) -> np.ndarray:
        return np.arange(self.n // 2 + 1, dtype=float)

    def deriv(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Fourier collocation derivative along the last axis."""
        vh = np.fft.rfft(values, axis=-1)
        k = self._wavenumbers()
        vh = vh * (1j * k) ** order
        if order % 2 == 1:
            # the Nyquist mode has no well-defined odd derivative on the grid
            vh[..., -1] = 0.0
        return np.fft.irfft(vh, n=self.n, axis=-1)

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        """Uniform Riemann sum; spectrally accurate for smooth periodic data."""
        return self.h * np.sum(values, axis=-1)

    def mean(self, values: np.ndarray):
        return np.mean(values, axis=-1)

    def solve_helmholtz(self, rhs: np.ndarray, a: float, b: float) -> np.ndarray:
        """Invert (a^2 - b^2 d_xx) with the Fourier symbol a^2 + b^2 k^2."""
        vh = np.fft.rfft(rhs, axis=-1)
        k = self._wavenumbers()
        return np.fft.irfft(vh / (a * a + b * b * k * k), n=self.n, axis=-1)

    def dealias(self, values: np.ndarray) -> np.ndarray:
        """Zero all modes with |k| > n/3 (2/3 rule for quadratic products)."""
        vh = np.fft.rfft(values, axis=-1)
        k = self._wavenumbers()
        vh[..., k > self.n / 3.0] = 0.0
        return np.fft.irfft(vh, n=self.n, axis=-1)

    # -- off-grid evaluation ----------------------------------------------

    def trig_eval(self, values: np.ndarray, points: np.ndarray,
                  order: int = 0) -> np.ndarray:
        """Evaluate the trigonometric interpolant (or its derivative) off-grid.

        The Nyquist mode is interpreted as cos(n/2 x), the standard real
        interpolation convention.
        """
        points = np.asarray(points, dtype=float)
        c = np.fft.rfft(values)
        k = self._wavenumbers()
        if order > 0:
            c = c * (1j * k) ** order
            c[-1] = 0.0
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        coeff = w * c / self.n
        phase = np.exp(1j * np.outer(points, k))
        return (phase @ coeff).real.reshape(points.shape)

    # -- monotone circle-map lifts ------------------------------------------

    def lift_spline(self, phi: np.ndarray) -> CubicSpline:
        """Periodic cubic spline of the displacement phi - id."""
        disp = phi - self.x
        xs = np.append(self.x, TWO_PI)
        ys = np.append(disp, disp[0])
        return CubicSpline(xs, ys, bc_type="periodic")

    def eval_lift(self, phi: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate the lift at arbitrary reals using phi(x+2pi)=phi(x)+2pi."""
        sp = self.lift_spline(phi)
        points = np.asarray(points, dtype=float)
        return points + sp(wrap(points))

    def invert_lift(self, phi: np.ndarray, targets: np.ndarray | None = None,
                    tol: float = 1e-13) -> np.ndarray:
        """Solve phi(y) = target for each target (defaults to the grid nodes).

        Bisection brackets the root of the monotone lift, Newton polishes it.
        """
        sp = self.lift_spline(phi)
        dsp = sp.derivative()
        if targets is None:
            targets = self.x
        targets = np.asarray(targets, dtype=float)
        disp = phi - self.x
        lo = targets - np.max(disp)
        hi = targets - np.min(disp)

        def f(y):
            return y + sp(wrap(y)) - targets

        # the displacement spline can overshoot its nodal range slightly;
        # widen until the bracket provably straddles the root
        pad = 1e-6 * (np.max(disp) - np.min(disp) + 1.0)
        for _ in range(80):
            bad_lo = f(lo) > 0
            bad_hi = f(hi) < 0
            if not bad_lo.any() and not bad_hi.any():
                break
            lo = np.where(bad_lo, lo - pad, lo)
            hi = np.where(bad_hi, hi + pad, hi)
            pad *= 2.0
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            take_lo = f(mid) <= 0.0
            lo = np.where(take_lo, mid, lo)
            hi = np.where(take_lo, hi, mid)
        y = 0.5 * (lo + hi)
        for _ in range(4):
            y = y - f(y) / (1.0 + dsp(wrap(y)))
            y = np.clip(y, lo, hi)
        if np.max(np.abs(f(y))) > 100 * tol:
            raise RuntimeError("lift inversion failed to converge")
        return y


@lru_cache(maxsize=8)
def diff_matrix(n: int) -> np.ndarray:
    """Dense matrix of the Fourier collocation derivative on n nodes."""
    grid = PeriodicGrid(n)
    return grid.deriv(np.eye(n)).T


def bump_density(grid: PeriodicGrid, center: float, width: float,
                 mass: float) -> np.ndarray:
    """Smooth periodic bump of prescribed mass, concentration kappa = width^-2.

    exp(kappa(cos(x-c)-1)) is the von Mises shape; the discrete sum is
    renormalized so the Riemann-sum mass is exact on the given grid.
    """
    if width <= 0:
        raise ValueError("bump width must be positive")
    if mass < 0:
        raise ValueError("bump mass must be nonnegative")
    kappa = 1.0 / (width * width)
    vals = np.exp(kappa * (np.cos(grid.x - center) - 1.0))
    total = grid.integrate(vals)
    return vals * (mass / total)
