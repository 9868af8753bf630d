"""Driver's risk field: a widening Gaussian ridge along the predicted path.

The field height along the path is a parabola a(s) = p_height*(s - d_la)^2
dropping to zero at the look-ahead distance d_la = t_la * speed, and the
cross-section is a Gaussian whose width grows linearly with arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridField, GridSpec
from .scenario import VehicleState

STRAIGHT_STEER_EPS = 1e-4  # rad; below this the path is treated as straight


@dataclass(frozen=True)
class DrfParams:
    t_la: float = 3.5        # s, look-ahead time
    p_height: float = 0.0064  # 1/m^2, parabolic height steepness
    m_width: float = 0.001   # width growth per meter of arc
    c_width: float = 0.5     # m, width at the vehicle
    k_steer: float = 0.2     # width asymmetry per radian of steering
    wheelbase: float = 2.8   # m
    origin_at_front_bumper: bool = True

    def __post_init__(self):
        for name in ("t_la", "p_height", "m_width", "c_width", "wheelbase"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.k_steer < 0:
            raise ValueError("k_steer must be >= 0")


def _path_coordinates(
    X: np.ndarray, Y: np.ndarray, ox: float, oy: float, heading: float,
    steering_angle: float, wheelbase: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Arc length s along the predicted path and signed lateral offset n."""
    ch, sh = math.cos(heading), math.sin(heading)
    dx, dy = X - ox, Y - oy
    if abs(steering_angle) < STRAIGHT_STEER_EPS:
        s = dx * ch + dy * sh
        n = -dx * sh + dy * ch
        return s, n
    radius = wheelbase / math.tan(steering_angle)  # signed, >0 turns left
    # circle center sits |radius| to the side of the path start
    cx = ox - radius * sh
    cy = oy + radius * ch
    wx, wy = X - cx, Y - cy
    r = np.hypot(wx, wy)
    # angle swept from the start point, measured in the direction of travel
    phi0 = math.atan2(oy - cy, ox - cx)
    phi = np.arctan2(wy, wx) - phi0
    sign = 1.0 if radius > 0 else -1.0
    phi = np.mod(sign * phi, 2.0 * math.pi)
    s = abs(radius) * phi
    n = sign * (abs(radius) - r)
    return s, n


# Gauss-Legendre node offsets (fraction of the cell size) per axis count.
_GL_NODES = {
    1: np.array([0.0]),
    2: np.array([-0.5, 0.5]) / math.sqrt(3.0),
    3: np.array([-0.5, 0.0, 0.5]) * math.sqrt(3.0 / 5.0),
}
_GL_WEIGHTS = {
    1: np.array([1.0]),
    2: np.array([0.5, 0.5]),
    3: np.array([5.0, 8.0, 5.0]) / 18.0,
}


def build_drf(
    ego: VehicleState,
    steering_angle: float,
    params: DrfParams,
    spec: GridSpec,
    quadrature: int = 2,
) -> GridField:
    """Evaluate the risk field around `ego` on the given grid.

    `quadrature` is the number of Gauss-Legendre sample points per axis and
    per cell: 1 evaluates the closed form exactly at the cell center, while
    the default 2x2 rule stores the cell-averaged field height. The average
    is what makes the risk integral converge under grid refinement — the
    lateral Gaussian is steep enough (sigma ~ 0.5 m) that center sampling
    mis-weights flank cells by several percent at the default resolution.

    Returns an all-zero field for a standing vehicle (zero look-ahead).
    Raises ValueError when the grid does not cover the ego position.
    """
    if quadrature not in _GL_NODES:
        raise ValueError("quadrature must be 1, 2 or 3 points per axis")
    if abs(steering_angle) < STRAIGHT_STEER_EPS:
        steering_angle = 0.0  # straight limit: no width asymmetry either
    if not spec.contains(ego.x, ego.y):
        raise ValueError("grid does not cover the ego position")
    speed = ego.speed
    d_la = params.t_la * speed
    X, Y = spec.cell_centers()
    values = np.zeros(X.shape)
    if d_la <= 0:
        return GridField(spec, values)

    ox, oy = ego.x, ego.y
    if params.origin_at_front_bumper:
        ox += math.cos(ego.heading) * ego.length / 2.0
        oy += math.sin(ego.heading) * ego.length / 2.0

    width_slope = params.m_width + params.k_steer * abs(steering_angle)
    nodes = _GL_NODES[quadrature] * spec.res
    weights = _GL_WEIGHTS[quadrature]
    for a, wa in zip(nodes, weights):
        for b, wb in zip(nodes, weights):
            s, n = _path_coordinates(
                X + a, Y + b, ox, oy, ego.heading, steering_angle,
                params.wheelbase,
            )
            support = (s >= 0.0) & (s <= d_la)
            ss, nn = s[support], n[support]
            height = params.p_height * (ss - d_la) ** 2
            sigma = width_slope * ss + params.c_width
            values[support] += (
                wa * wb * height * np.exp(-(nn**2) / (2.0 * sigma**2))
            )
    return GridField(spec, values)
