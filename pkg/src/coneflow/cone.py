"""The metric cone over the circle in mass coordinates.

Points are (x, m) with x an angle and m >= 0 the mass coordinate; m = 0 is
the apex.  The metric is a^2 m g + b^2 dm^2 / m, which in the radial
variable r = 2 b sqrt(m) is the standard cone metric (a/2b)^2 r^2 g + dr^2.
For a = 2b the cone is isometric to the punctured plane and the planar
chart below is global.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TWO_PI, circle_distance, wrap

APEX_FLOOR = 1e-12


class ApexError(RuntimeError):
    """A geodesic entered the apex floor m <= 1e-12."""


@dataclass(frozen=True)
class ConeParams:
    """Weights of the cone metric a^2 m g + b^2 dm^2/m."""

    a: float = 1.0
    b: float = 0.5

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("cone parameters a, b must be positive")

    @property
    def half_ratio(self) -> float:
        # angular dilation of the planar chart; chart is global iff this is 1
        return self.a / (2.0 * self.b)


@dataclass(frozen=True)
class ConePoint:
    x: float
    m: float

    def __post_init__(self):
        if not np.isfinite(self.x) or not np.isfinite(self.m):
            raise ValueError("cone point coordinates must be finite")
        if self.m < 0:
            raise ValueError("mass coordinate must be nonnegative")

    @property
    def is_apex(self) -> bool:
        return self.m <= APEX_FLOOR


@dataclass(frozen=True)
class ConeTangent:
    dx: float
    dm: float


@dataclass(frozen=True)
class ConeGeodesic:
    """Sampled solution of the geodesic equations in mass coordinates."""

    times: np.ndarray
    x: np.ndarray
    m: np.ndarray
    dx: np.ndarray
    dm: np.ndarray
    speed: float
    speed_drift: float

    @property
    def endpoint(self) -> ConePoint:
        return ConePoint(wrap(self.x[-1]), self.m[-1])


def cone_metric(p: ConePoint, v: ConeTangent, w: ConeTangent,
                params: ConeParams = ConeParams()) -> float:
    """Inner product a^2 m dx dx' + b^2 dm dm' / m at p (m > 0)."""
    if p.m <= APEX_FLOOR:
        raise ApexError("cone metric is singular at the apex")
    return (params.a ** 2 * p.m * v.dx * w.dx
            + params.b ** 2 * v.dm * w.dm / p.m)


def cone_distance(p1: ConePoint, p2: ConePoint,
                  params: ConeParams = ConeParams()) -> float:
    """Closed-form distance on the cone over the circle.

    d^2 = 4 b^2 (m1 + m2 - 2 sqrt(m1 m2) cos(min((a/2b) d_circ, pi))).
    """
    ang = min(params.half_ratio * circle_distance(p1.x, p2.x), np.pi)
    d2 = 4.0 * params.b ** 2 * (
        p1.m + p2.m - 2.0 * np.sqrt(p1.m * p2.m) * np.cos(ang))
    return float(np.sqrt(max(d2, 0.0)))


def planar_chart(p: ConePoint, params: ConeParams = ConeParams()) -> np.ndarray:
    """Map (x, m) to the plane: radius 2 b sqrt(m), angle (a/2b) x.

    The chart is a global isometry onto the punctured plane iff a = 2b;
    see chart_validity_sector for the angular sector covered otherwise.
    """
    if p.is_apex:
        raise ApexError("planar chart is undefined at the apex")
    r = 2.0 * params.b * np.sqrt(p.m)
    theta = params.half_ratio * p.x
    return np.array([r * np.cos(theta), r * np.sin(theta)])


def planar_chart_inverse(point: np.ndarray,
                         params: ConeParams = ConeParams()) -> ConePoint:
    """Invert the planar chart on its validity sector."""
    point = np.asarray(point, dtype=float)
    r2 = float(point[0] ** 2 + point[1] ** 2)
    if r2 <= APEX_FLOOR ** 2:
        raise ApexError("planar chart inverse is undefined at the origin")
    m = r2 / (4.0 * params.b ** 2)
    theta = np.arctan2(point[1], point[0]) % TWO_PI
    return ConePoint(wrap(theta / params.half_ratio), m)


def chart_validity_sector(params: ConeParams = ConeParams()) -> float:
    """Angular width (a/2b) * 2*pi swept in the plane by one turn of the base.

    Equal to 2*pi exactly when the chart is a global isometry; smaller ratios
    miss a sector of the plane, larger ones self-overlap.
    """
    return params.half_ratio * TWO_PI


def cone_sectional_curvature(k_base: float, radial_plane: bool = False) -> float:
    """Sectional curvature of the cone: k_base - 1 on horizontal planes.

    Planes containing the radial direction are flat (the curvature tensor
    annihilates the radial field).
    """
    if radial_plane:
        return 0.0
    return k_base - 1.0


def _geodesic_rhs(state: np.ndarray, params: ConeParams) -> np.ndarray:
    x, m, dx, dm = state
    if m <= APEX_FLOOR:
        raise ApexError("geodesic reached the apex floor")
    c = params.a ** 2 / (2.0 * params.b ** 2)
    return np.array([
        dx,
        dm,
        -dm * dx / m,
        dm * dm / (2.0 * m) + c * dx * dx * m,
    ])


def cone_geodesic(p0: ConePoint, v0: ConeTangent, t_final: float, dt: float,
                  params: ConeParams = ConeParams()) -> ConeGeodesic:
    """Integrate the geodesic equations with fixed-step RK4.

    x'' + (m'/m) x' = 0,   m'' - m'^2/(2m) - (a^2/2b^2) x'^2 m = 0.
    Aborts with ApexError if the mass coordinate hits the 1e-12 floor.
    """
    if dt <= 0 or t_final <= 0:
        raise ValueError("t_final and dt must be positive")
    if p0.is_apex:
        raise ApexError("geodesic initial point is at the apex")
    n_steps = int(round(t_final / dt))
    state = np.array([p0.x, p0.m, v0.dx, v0.dm], dtype=float)
    speed0 = np.sqrt(cone_metric(p0, v0, v0, params))
    out = np.empty((n_steps + 1, 4))
    out[0] = state
    for i in range(n_steps):
        k1 = _geodesic_rhs(state, params)
        k2 = _geodesic_rhs(state + 0.5 * dt * k1, params)
        k3 = _geodesic_rhs(state + 0.5 * dt * k2, params)
        k4 = _geodesic_rhs(state + dt * k3, params)
        state = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if state[1] <= APEX_FLOOR:
            raise ApexError(f"geodesic reached the apex floor at t={ (i + 1) * dt :.6g}")
        out[i + 1] = state
    times = np.arange(n_steps + 1) * dt
    pend = ConePoint(wrap(out[-1, 0]), out[-1, 1])
    vend = ConeTangent(out[-1, 2], out[-1, 3])
    speed_end = np.sqrt(cone_metric(pend, vend, vend, params))
    drift = abs(speed_end - speed0) / max(speed0, 1e-300)
    return ConeGeodesic(times, out[:, 0], out[:, 1], out[:, 2], out[:, 3],
                        float(speed0), float(drift))
