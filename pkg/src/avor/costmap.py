"""Static environment cost map, VCC geometry and the dynamic cost layer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import GridField, GridSpec, require_same_spec
from .scenario import RoadGeometry, StaticObject, VehicleState

V_LAT_MIN = 0.05  # m/s; below this no VCC is constructed (TTA would blow up)


@dataclass(frozen=True)
class CostParams:
    cost_car: float = 10000.0       # also the baseline cost k of the VCC
    cost_offroad: float = 2000.0
    cost_lane_marking: float = 500.0
    cost_building: float = 10000.0
    cost_tree: float = 10000.0
    marking_width: float = 0.25     # m, physical width of a painted stripe

    def __post_init__(self):
        for name in ("cost_car", "cost_offroad", "cost_lane_marking",
                     "cost_building", "cost_tree"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.cost_car > self.cost_lane_marking:
            raise ValueError("cost_car must exceed cost_lane_marking")
        if self.marking_width <= 0:
            raise ValueError("marking_width must be positive")

    def class_cost(self, object_class: str) -> float:
        return {
            "car": self.cost_car,
            "truck": self.cost_car,
            "building": self.cost_building,
            "tree": self.cost_tree,
            "barrier": self.cost_building,
        }[object_class]


@dataclass(frozen=True)
class VccPoint:
    x: float
    y: float
    d_vcc: float
    tta: float
    valid: bool

    def __post_init__(self):
        if self.valid:
            if self.d_vcc < 0 or self.tta <= 0:
                raise ValueError("valid VCC requires d_vcc >= 0 and tta > 0")


INVALID_VCC = VccPoint(x=math.nan, y=math.nan, d_vcc=0.0, tta=1.0, valid=False)


@dataclass(frozen=True)
class CostMapStack:
    static_layer: GridField
    dynamic_layer: GridField
    composed: GridField


# ---------------------------------------------------------------------------
# static layer
#
# All features are rasterized by exact area coverage (the fraction of each
# cell covered by the feature), so the cost integral of every feature is
# independent of the grid resolution and the composed risk scalar converges
# under grid refinement.


def _clip_polygon_to_box(
    poly: np.ndarray, x0: float, x1: float, y0: float, y1: float
) -> float:
    """Area of `poly` (convex, any winding) clipped to an axis-aligned box."""

    def clip(points, keep, intersect):
        out = []
        n = len(points)
        for k in range(n):
            p, q = points[k], points[(k + 1) % n]
            pin, qin = keep(p), keep(q)
            if pin:
                out.append(p)
                if not qin:
                    out.append(intersect(p, q))
            elif qin:
                out.append(intersect(p, q))
        return out

    def x_cut(bound):
        def f(p, q):
            s = (bound - p[0]) / (q[0] - p[0])
            return (bound, p[1] + s * (q[1] - p[1]))
        return f

    def y_cut(bound):
        def f(p, q):
            s = (bound - p[1]) / (q[1] - p[1])
            return (p[0] + s * (q[0] - p[0]), bound)
        return f

    pts = [tuple(p) for p in poly]
    pts = clip(pts, lambda p: p[0] >= x0, x_cut(x0))
    if pts:
        pts = clip(pts, lambda p: p[0] <= x1, x_cut(x1))
    if pts:
        pts = clip(pts, lambda p: p[1] >= y0, y_cut(y0))
    if pts:
        pts = clip(pts, lambda p: p[1] <= y1, y_cut(y1))
    if len(pts) < 3:
        return 0.0
    arr = np.array(pts)
    x, y = arr[:, 0], arr[:, 1]
    return abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))) / 2.0


def polygon_coverage(spec: GridSpec, poly: np.ndarray) -> np.ndarray:
    """Per-cell covered-area fraction of a convex polygon, exact.

    Cells fully inside the polygon get 1, fully outside get 0, and boundary
    cells the exact clipped-area fraction, so coverage.sum() * res**2 equals
    the polygon area whenever it lies inside the grid.
    """
    poly = np.asarray(poly, dtype=float)
    # enforce counter-clockwise winding for the half-plane tests below
    area2 = float(
        np.dot(poly[:, 0], np.roll(poly[:, 1], -1))
        - np.dot(poly[:, 1], np.roll(poly[:, 0], -1))
    )
    if area2 < 0:
        poly = poly[::-1]

    res = spec.res
    half = res / 2.0
    out = np.zeros((spec.nx, spec.ny))
    i0 = max(0, int(math.floor((poly[:, 0].min() - spec.origin_x - half) / res)))
    i1 = min(spec.nx - 1, int(math.ceil((poly[:, 0].max() - spec.origin_x + half) / res)))
    j0 = max(0, int(math.floor((poly[:, 1].min() - spec.origin_y - half) / res)))
    j1 = min(spec.ny - 1, int(math.ceil((poly[:, 1].max() - spec.origin_y + half) / res)))
    if i0 > i1 or j0 > j1:
        return out

    xs = spec.origin_x + res * np.arange(i0, i1 + 1)
    ys = spec.origin_y + res * np.arange(j0, j1 + 1)
    Xc, Yc = np.meshgrid(xs, ys, indexing="ij")
    corner_dx = np.array([-half, half, half, -half])
    corner_dy = np.array([-half, -half, half, half])

    all_inside = np.ones(Xc.shape, dtype=bool)
    any_possible = np.ones(Xc.shape, dtype=bool)
    for k in range(len(poly)):
        px, py = poly[k]
        qx, qy = poly[(k + 1) % len(poly)]
        ex, ey = qx - px, qy - py
        inside_count = np.zeros(Xc.shape, dtype=np.int8)
        for dx, dy in zip(corner_dx, corner_dy):
            cross = ex * (Yc + dy - py) - ey * (Xc + dx - px)
            inside_count += (cross >= 0.0).astype(np.int8)
        all_inside &= inside_count == 4
        # all four corners strictly beyond one edge: the cell cannot intersect
        any_possible &= inside_count > 0

    block = np.zeros(Xc.shape)
    block[all_inside] = 1.0
    ambiguous = any_possible & ~all_inside
    for i, j in np.argwhere(ambiguous):
        cx, cy = xs[i], ys[j]
        area = _clip_polygon_to_box(poly, cx - half, cx + half,
                                    cy - half, cy + half)
        block[i, j] = area / res**2
    out[i0 : i1 + 1, j0 : j1 + 1] = block
    return out


def _band_coverage(spec: GridSpec, lo: float, hi: float) -> np.ndarray:
    """Per-cell covered fraction of the horizontal band lo <= y <= hi."""
    res = spec.res
    ys = spec.origin_y + res * np.arange(spec.ny)
    frac = (np.minimum(ys + res / 2.0, hi) - np.maximum(ys - res / 2.0, lo)) / res
    frac = np.clip(frac, 0.0, 1.0)
    return np.broadcast_to(frac, (spec.nx, spec.ny)).copy()


def build_static_costmap(
    road: RoadGeometry,
    cutin: Optional[VehicleState],
    other_actors: Sequence[VehicleState],
    population: str,
    spec: GridSpec,
    params: CostParams = CostParams(),
) -> GridField:
    """Rasterize road context and (population-filtered) obstacles into costs.

    Population O keeps only the cut-in actor, A adds the other road actors,
    A+R additionally rasterizes the road furniture. Overlaps resolve by max.
    Partially covered cells carry the coverage-weighted cost, so every
    feature's cost integral is resolution-independent.
    """
    values = params.cost_offroad * (
        _band_coverage(spec, -math.inf, road.y_min)
        + _band_coverage(spec, road.y_max, math.inf)
    )

    w = params.marking_width / 2.0
    for yb in road.lane_boundaries():
        marking = _band_coverage(spec, yb - w, yb + w)
        np.maximum(values, params.cost_lane_marking * marking, out=values)

    vehicles: list[VehicleState] = []
    if cutin is not None:
        vehicles.append(cutin)
    if population in ("A", "A+R"):
        vehicles.extend(other_actors)
    for veh in vehicles:
        cover = polygon_coverage(spec, veh.footprint())
        np.maximum(values, params.cost_car * cover, out=values)

    if population == "A+R":
        for obj in road.static_objects:
            cover = polygon_coverage(spec, obj.polygon)
            np.maximum(values, params.class_cost(obj.object_class) * cover,
                       out=values)

    return GridField(spec, values)


# ---------------------------------------------------------------------------
# VCC geometry


def compute_vcc(
    ego: VehicleState, cutin: VehicleState, v_lat_min: float = V_LAT_MIN
) -> VccPoint:
    """Intersect the ego's longitudinal ray with the cut-in's lateral ray.

    The cut-in's lateral velocity is its velocity component perpendicular to
    the ego's longitudinal direction. Geometry that yields no forward
    intersection (diverging lateral motion, intersection behind the ego) or a
    lateral speed below `v_lat_min` returns an invalid point, never raises.
    """
    ex, ey = math.cos(ego.heading), math.sin(ego.heading)
    vx, vy = cutin.v_lon, cutin.v_lat
    along = vx * ex + vy * ey
    px, py = vx - along * ex, vy - along * ey
    p = math.hypot(px, py)
    if p < v_lat_min:
        return INVALID_VCC
    ux, uy = px / p, py / p

    dx, dy = cutin.x - ego.x, cutin.y - ego.y
    denom = ex * uy - ey * ux
    if abs(denom) < 1e-12:
        return INVALID_VCC
    # ego + t*e = cutin + u*u_hat, solved by cross products
    t = (dx * uy - dy * ux) / denom
    u = (dx * ey - dy * ex) / denom
    if t < 0 or u <= 0:
        return INVALID_VCC
    return VccPoint(
        x=cutin.x + u * ux,
        y=cutin.y + u * uy,
        d_vcc=u,
        tta=u / p,
        valid=True,
    )


# ---------------------------------------------------------------------------
# dynamic layer and composition


def build_dynamic_costmap(
    vcc: VccPoint, spec: GridSpec, params: CostParams = CostParams()
) -> GridField:
    """Single-cell impulse of k/TTA at the VCC; zero field when invalid."""
    values = np.zeros((spec.nx, spec.ny))
    if vcc.valid:
        idx = spec.index_of(vcc.x, vcc.y)
        if idx is not None:
            values[idx] = params.cost_car / vcc.tta
    return GridField(spec, values)


def compose_costmap(static_layer: GridField, dynamic_layer: GridField) -> CostMapStack:
    """Cell-wise sum of the two layers; inputs are left untouched."""
    require_same_spec(static_layer, dynamic_layer)
    composed = GridField(
        static_layer.spec, static_layer.values + dynamic_layer.values
    )
    return CostMapStack(static_layer, dynamic_layer, composed)
