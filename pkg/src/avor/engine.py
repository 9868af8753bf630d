"""Per-frame risk evaluation producing DRF and AVOR risk traces."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .costmap import (
    CostParams,
    INVALID_VCC,
    V_LAT_MIN,
    build_dynamic_costmap,
    build_static_costmap,
    compose_costmap,
    compute_vcc,
)
from .grid import GridField, GridSpec, require_same_spec
from .risk_field import DrfParams, build_drf
from .scenario import (
    PhaseSegmentation,
    ScenarioTrace,
    VehicleState,
    _fully_in_ego_lane,
)

MODELS = ("DRF", "AVOR")


@dataclass(frozen=True)
class GridConfig:
    res: float = 0.25      # m per cell
    ahead: float = 100.0   # m of grid ahead of the ego
    behind: float = 10.0   # m behind
    lateral: float = 12.0  # m to each side

    def spec_around(self, ego: VehicleState) -> GridSpec:
        nx = int(round((self.ahead + self.behind) / self.res)) + 1
        ny = int(round(2.0 * self.lateral / self.res)) + 1
        return GridSpec(
            origin_x=ego.x - self.behind,
            origin_y=ego.y - self.lateral,
            res=self.res,
            nx=nx,
            ny=ny,
        )


@dataclass(frozen=True)
class EngineConfig:
    grid: GridConfig = GridConfig()
    steering_from_curvature: bool = True
    v_lat_min: float = V_LAT_MIN


@dataclass(frozen=True)
class RiskTrace:
    model: str
    t: np.ndarray
    value: np.ndarray
    scenario_id: str
    population: str

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.value, dtype=float)
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if t.shape != v.shape:
            raise ValueError("t and value must have equal length")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("risk values must be finite and non-negative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)


def evaluate_risk(field: GridField, cost: GridField) -> float:
    """Field-weighted cost integral: sum of z*C*res^2 over all cells.

    Summation runs in fixed row-major order through an exact compensated
    accumulator, so the result is independent of any evaluation parallelism.
    """
    require_same_spec(field, cost)
    prod = (field.values * cost.values).ravel(order="C")
    nonzero = prod[prod != 0.0]
    return math.fsum(nonzero) * field.spec.res**2


def steering_angles(trace: ScenarioTrace, wheelbase: float) -> np.ndarray:
    """Per-frame steering estimate from three-point trajectory curvature.

    Collinear (straight) motion gives zero; endpoints are zero.
    """
    pts = np.array([[s.x, s.y] for s in trace.ego])
    n = len(pts)
    out = np.zeros(n)
    for i in range(1, n - 1):
        a, b, c = pts[i - 1], pts[i], pts[i + 1]
        ab, bc, ac = b - a, c - b, c - a
        cross = ab[0] * bc[1] - ab[1] * bc[0]
        denom = np.linalg.norm(ab) * np.linalg.norm(bc) * np.linalg.norm(ac)
        if denom < 1e-12:
            continue
        curvature = 2.0 * cross / denom
        out[i] = math.atan(wheelbase * curvature)
    return out


def run_scenario(
    trace: ScenarioTrace,
    models: Iterable[str] = MODELS,
    drf_params: DrfParams = DrfParams(),
    cost_params: CostParams = CostParams(),
    config: EngineConfig = EngineConfig(),
    population: Optional[str] = None,
) -> list[RiskTrace]:
    """Replay the trace and evaluate one scalar risk per model per frame.

    The DRF model convolves the risk field with the static cost map only; the
    AVOR model adds the dynamic VCC layer. The VCC stays active only while
    the cut-in vehicle's footprint is not yet fully inside the ego lane.
    `population` overrides the trace's scene-population tag for this run.
    """
    wanted = [m for m in MODELS if m in set(models)]
    if not wanted:
        raise ValueError("no known model requested")
    pop = population if population is not None else trace.population
    if pop not in ("O", "A", "A+R"):
        raise ValueError(f"unknown population {pop!r}")

    cut_states = trace.cutin_states()
    other_ids = trace.other_actor_ids()
    steer = (
        steering_angles(trace, drf_params.wheelbase)
        if config.steering_from_curvature
        else np.zeros(trace.n_frames)
    )

    values = {m: np.zeros(trace.n_frames) for m in wanted}
    for i in range(trace.n_frames):
        ego = trace.ego[i]
        spec = config.grid.spec_around(ego)
        z = build_drf(ego, float(steer[i]), drf_params, spec)
        cutin = cut_states[i]
        others = [trace.actors[a][i] for a in other_ids]
        c_static = build_static_costmap(
            trace.road, cutin, others, pop, spec, cost_params
        )
        if "DRF" in values:
            values["DRF"][i] = evaluate_risk(z, c_static)
        if "AVOR" in values:
            if _fully_in_ego_lane(cutin, trace.road):
                vcc = INVALID_VCC
            else:
                vcc = compute_vcc(ego, cutin, config.v_lat_min)
            c_dyn = build_dynamic_costmap(vcc, spec, cost_params)
            stack = compose_costmap(c_static, c_dyn)
            values["AVOR"][i] = evaluate_risk(z, stack.composed)

    times = trace.times
    return [
        RiskTrace(model=m, t=times.copy(), value=values[m],
                  scenario_id=trace.id, population=pop)
        for m in wanted
    ]


def export_risk_csv(
    traces: Sequence[RiskTrace],
    path,
    seg: Optional[PhaseSegmentation] = None,
    normalized: Optional[dict[str, np.ndarray]] = None,
) -> None:
    """Write risk traces as CSV rows (t, model, raw, normalized, phase)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "model", "raw", "normalized", "phase"])
        for tr in traces:
            norm = normalized.get(tr.model) if normalized else None
            for k in range(len(tr.t)):
                t = float(tr.t[k])
                writer.writerow([
                    f"{t:.3f}",
                    tr.model,
                    repr(float(tr.value[k])),
                    "" if norm is None else repr(float(norm[k])),
                    seg.phase_of(t) if seg is not None else "",
                ])
