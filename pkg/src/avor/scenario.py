"""Scenario data model, file ingestion, kinematics and cut-in segmentation.

Coordinates are road-aligned: x runs longitudinally along the road, y
laterally, with y = 0 at the center of the ego lane. All units SI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ScenarioFormatError,
    ScenarioParseError,
    ScenarioReferenceError,
    SegmentationError,
)

SCHEMA_ID = "avor-scenario/1"
POPULATIONS = ("O", "A", "A+R")
RISK_LABELS = ("HRS", "LRS", "unlabeled")
OBJECT_CLASSES = ("car", "truck", "building", "tree", "barrier")

DEFAULT_LENGTH = 4.5
DEFAULT_WIDTH = 2.0


@dataclass(frozen=True)
class VehicleState:
    t: float
    x: float
    y: float
    heading: float
    v_lon: float
    v_lat: float
    a_lon: float = 0.0
    a_lat: float = 0.0
    length: float = DEFAULT_LENGTH
    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("vehicle dimensions must be positive")
        if not all(
            math.isfinite(v)
            for v in (self.t, self.x, self.y, self.heading, self.v_lon, self.v_lat)
        ):
            raise ValueError("vehicle state must be finite")
        if not abs(self.heading) < math.pi:
            raise ValueError("|heading| must be < pi")

    @property
    def speed(self) -> float:
        return math.hypot(self.v_lon, self.v_lat)

    def footprint(self) -> np.ndarray:
        """Corner points of the (rotated) rectangular footprint, shape (4, 2)."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = self.length / 2.0, self.width / 2.0
        local = np.array([[hl, hw], [hl, -hw], [-hl, -hw], [-hl, hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.x, self.y])


@dataclass(frozen=True)
class StaticObject:
    polygon: np.ndarray  # (n, 2) vertex array
    object_class: str

    def __post_init__(self):
        poly = np.asarray(self.polygon, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise ValueError("polygon must be an (n>=3, 2) array")
        if self.object_class not in OBJECT_CLASSES:
            raise ValueError(f"unknown object class {self.object_class!r}")
        object.__setattr__(self, "polygon", poly)


@dataclass(frozen=True)
class RoadGeometry:
    lane_count: int
    lane_width: float
    ego_lane_index: int
    road_length: float
    static_objects: tuple[StaticObject, ...] = ()

    def __post_init__(self):
        if self.lane_count < 1:
            raise ValueError("lane_count must be >= 1")
        if not 0 <= self.ego_lane_index < self.lane_count:
            raise ValueError("ego_lane_index out of range")
        if self.lane_width <= 0:
            raise ValueError("lane_width must be positive")

    @property
    def y_min(self) -> float:
        """Lower road edge (ego lane center sits at y = 0)."""
        return -(self.ego_lane_index + 0.5) * self.lane_width

    @property
    def y_max(self) -> float:
        return (self.lane_count - self.ego_lane_index - 0.5) * self.lane_width

    def lane_boundaries(self) -> list[float]:
        """y of the interior lane boundaries (markings between lanes)."""
        return [
            self.y_min + k * self.lane_width for k in range(1, self.lane_count)
        ]

    @property
    def ego_lane_bounds(self) -> tuple[float, float]:
        half = self.lane_width / 2.0
        return -half, half


@dataclass(frozen=True)
class ScenarioTrace:
    id: str
    dt: float
    road: RoadGeometry
    ego: tuple[VehicleState, ...]
    actors: dict[str, tuple[VehicleState, ...]]
    cutin_actor: str
    population: str
    risk_label: str = "unlabeled"

    def __post_init__(self):
        if self.dt <= 0:
            raise ScenarioFormatError("dt must be positive")
        if self.population not in POPULATIONS:
            raise ScenarioParseError(f"unknown population {self.population!r}")
        if self.risk_label not in RISK_LABELS:
            raise ScenarioParseError(f"unknown risk_label {self.risk_label!r}")
        n = len(self.ego)
        if n < 2:
            raise ScenarioFormatError("trace too short")
        for aid, states in self.actors.items():
            if len(states) != n:
                raise ScenarioFormatError(
                    f"actor {aid!r} has {len(states)} frames, expected {n}"
                )
        if self.cutin_actor not in self.actors:
            raise ScenarioReferenceError(
                f"cutin_actor {self.cutin_actor!r} not present in actors"
            )
        for states in (self.ego, *self.actors.values()):
            ts = np.array([s.t for s in states])
            if np.any(np.abs(np.diff(ts) - self.dt) > 1e-9):
                raise ScenarioFormatError("timestamps must increase with stride dt")

    @property
    def n_frames(self) -> int:
        return len(self.ego)

    @property
    def duration(self) -> float:
        return self.n_frames * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.ego])

    def cutin_states(self) -> tuple[VehicleState, ...]:
        return self.actors[self.cutin_actor]

    def other_actor_ids(self) -> list[str]:
        return [a for a in self.actors if a != self.cutin_actor]


@dataclass(frozen=True)
class PhaseSegmentation:
    t_phase0_start: float
    t_I_start: float
    t_II_start: float
    t_III_start: float
    t_III_end: float

    def __post_init__(self):
        ok = (
            self.t_phase0_start <= self.t_I_start < self.t_II_start
            < self.t_III_start <= self.t_III_end
        )
        if not ok:
            raise ValueError("phase boundaries out of order")

    def window(self, phase: str) -> tuple[float, float]:
        """Half-open [start, end) window of a phase ('0', 'I', 'II', 'III')."""
        table = {
            "0": (self.t_phase0_start, self.t_I_start),
            "I": (self.t_I_start, self.t_II_start),
            "II": (self.t_II_start, self.t_III_start),
            "III": (self.t_III_start, self.t_III_end),
        }
        return table[phase]

    def phase_of(self, t: float) -> str:
        if t < self.t_phase0_start:
            return "pre"
        for name in ("0", "I", "II", "III"):
            lo, hi = self.window(name)
            if lo <= t < hi:
                return name
        return "post"


@dataclass(frozen=True)
class CutInCharacteristics:
    duration: float
    v_lat_avg: float
    v_lat_max: float
    a_lat_avg: float
    initial_cutin_distance: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not self.v_lat_max >= self.v_lat_avg >= 0:
            raise ValueError("expected v_lat_max >= v_lat_avg >= 0")


@dataclass(frozen=True)
class SegmentationParams:
    v_lat_init: float = 0.2        # m/s, sustained lateral speed starting Phase I
    sustain: float = 0.3           # s the threshold must hold
    ttc_safe: float = 4.0          # s, TTC considered safe again in Phase III
    phase0_lead: float = 2.0       # s of baseline before Phase I


# ---------------------------------------------------------------------------
# kinematic derivation


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with edge replication, along axis 0."""
    if window <= 1:
        return np.asarray(values, dtype=float)
    v = np.asarray(values, dtype=float)
    pad_lo = window // 2
    pad_hi = window - 1 - pad_lo
    padded = np.concatenate([np.repeat(v[:1], pad_lo, axis=0), v,
                             np.repeat(v[-1:], pad_hi, axis=0)], axis=0)
    kernel = np.ones(window) / window
    if v.ndim == 1:
        return np.convolve(padded, kernel, mode="valid")
    return np.stack(
        [np.convolve(padded[:, k], kernel, mode="valid") for k in range(v.shape[1])],
        axis=1,
    )


def derive_kinematics(
    positions: np.ndarray, dt: float, smooth_window: int = 5
) -> tuple[np.ndarray, np.ndarray]:
    """Velocities and accelerations from a position time series.

    Central differences in the interior, one-sided at the ends. Velocities are
    smoothed with a centered moving average (width `smooth_window` samples)
    before being differentiated again for acceleration.

    Returns (v, a), each with the same shape as `positions`.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.shape[0] < 3:
        raise ValueError("need at least 3 samples to derive kinematics")
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = np.gradient(pos, dt, axis=0)
    v = moving_average(v, smooth_window)
    a = np.gradient(v, dt, axis=0)
    return v, a


def accelerations_from_velocities(
    velocities: np.ndarray, dt: float, smooth_window: int = 5
) -> np.ndarray:
    v = moving_average(np.asarray(velocities, dtype=float), smooth_window)
    return np.gradient(v, dt, axis=0)


# ---------------------------------------------------------------------------
# file ingestion


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioParseError(f"missing field {key!r} in {where}")
    return mapping[key]


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioParseError(
            f"unknown field(s) {sorted(unknown)} in {where}"
        )


def _parse_frames(frames, where: str) -> list[dict]:
    if not isinstance(frames, list) or not frames:
        raise ScenarioParseError(f"{where} must be a non-empty list of frames")
    out = []
    for k, fr in enumerate(frames):
        loc = f"{where}[{k}]"
        if not isinstance(fr, dict):
            raise ScenarioParseError(f"{loc} must be an object")
        _reject_unknown(fr, {"t", "x", "y", "heading", "v_lon", "v_lat"}, loc)
        for key in ("t", "x", "y", "heading"):
            _require(fr, key, loc)
        out.append(fr)
    return out


def _build_states(
    frames: list[dict], dt: float, length: float, width: float, smooth_window: int
) -> list[VehicleState]:
    have_v = all("v_lon" in fr and "v_lat" in fr for fr in frames)
    pos = np.array([[fr["x"], fr["y"]] for fr in frames], dtype=float)
    if have_v:
        vel = np.array([[fr["v_lon"], fr["v_lat"]] for fr in frames], dtype=float)
        acc = accelerations_from_velocities(vel, dt, smooth_window)
    else:
        vel, acc = derive_kinematics(pos, dt, smooth_window)
    return [
        VehicleState(
            t=float(fr["t"]), x=float(fr["x"]), y=float(fr["y"]),
            heading=float(fr["heading"]),
            v_lon=float(vel[k, 0]), v_lat=float(vel[k, 1]),
            a_lon=float(acc[k, 0]), a_lat=float(acc[k, 1]),
            length=length, width=width,
        )
        for k, fr in enumerate(frames)
    ]


def load_scenario(path, smooth_window: int = 5) -> ScenarioTrace:
    """Load and validate a scenario JSON file (schema `avor-scenario/1`).

    Missing per-frame velocities are derived from positions by finite
    differences; accelerations are always derived.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"not valid JSON: {exc}") from exc

    _reject_unknown(
        doc,
        {"schema", "id", "dt", "road", "population", "risk_label", "ego",
         "actors", "cutin_actor", "dimensions"},
        "top level",
    )
    schema = _require(doc, "schema", "top level")
    if schema != SCHEMA_ID:
        raise ScenarioParseError(f"unsupported schema {schema!r}")
    road_doc = _require(doc, "road", "top level")
    _reject_unknown(
        road_doc,
        {"lane_count", "lane_width", "ego_lane_index", "road_length",
         "static_objects"},
        "road",
    )
    objects = []
    for k, obj in enumerate(road_doc.get("static_objects", [])):
        _reject_unknown(obj, {"polygon", "class"}, f"road.static_objects[{k}]")
        objects.append(
            StaticObject(
                polygon=np.asarray(_require(obj, "polygon", "static object")),
                object_class=_require(obj, "class", "static object"),
            )
        )
    try:
        road = RoadGeometry(
            lane_count=int(_require(road_doc, "lane_count", "road")),
            lane_width=float(_require(road_doc, "lane_width", "road")),
            ego_lane_index=int(_require(road_doc, "ego_lane_index", "road")),
            road_length=float(road_doc.get("road_length", 1000.0)),
            static_objects=tuple(objects),
        )
    except ValueError as exc:
        raise ScenarioParseError(f"invalid road geometry: {exc}") from exc

    dt = float(_require(doc, "dt", "top level"))
    if dt <= 0:
        raise ScenarioParseError("dt must be positive")
    dims = doc.get("dimensions", {})

    def dims_of(vehicle_id: str) -> tuple[float, float]:
        entry = dims.get(vehicle_id, {})
        _reject_unknown(entry, {"length", "width"}, f"dimensions[{vehicle_id!r}]")
        return (
            float(entry.get("length", DEFAULT_LENGTH)),
            float(entry.get("width", DEFAULT_WIDTH)),
        )

    ego_frames = _parse_frames(_require(doc, "ego", "top level"), "ego")
    if len(ego_frames) < 2:
        raise ScenarioFormatError("trace too short")
    actors_doc = _require(doc, "actors", "top level")
    if not isinstance(actors_doc, dict):
        raise ScenarioParseError("actors must be a mapping id -> frames")

    ego = _build_states(ego_frames, dt, *dims_of("ego"), smooth_window)
    actors = {
        aid: tuple(
            _build_states(
                _parse_frames(frames, f"actors[{aid!r}]"), dt, *dims_of(aid),
                smooth_window,
            )
        )
        for aid, frames in actors_doc.items()
    }

    return ScenarioTrace(
        id=str(_require(doc, "id", "top level")),
        dt=dt,
        road=road,
        ego=tuple(ego),
        actors=actors,
        cutin_actor=str(_require(doc, "cutin_actor", "top level")),
        population=str(_require(doc, "population", "top level")),
        risk_label=str(doc.get("risk_label", "unlabeled")),
    )


# ---------------------------------------------------------------------------
# surrogate helpers shared with the metrics module


def bumper_gap(ego: VehicleState, other: VehicleState) -> float:
    """Longitudinal bumper-to-bumper gap (negative when overlapping)."""
    return (other.x - other.length / 2.0) - (ego.x + ego.length / 2.0)


def ttc_to(ego: VehicleState, other: VehicleState) -> Optional[float]:
    """Time-to-collision on the longitudinal axis; None when not closing."""
    gap = bumper_gap(ego, other)
    closing = ego.v_lon - other.v_lon
    if closing <= 0 or gap < 0:
        return None
    return gap / closing


# ---------------------------------------------------------------------------
# phase segmentation


def _lateral_extents(state: VehicleState) -> tuple[float, float]:
    ys = state.footprint()[:, 1]
    return float(ys.min()), float(ys.max())


def _fully_in_ego_lane(state: VehicleState, road: RoadGeometry) -> bool:
    lo, hi = road.ego_lane_bounds
    y_lo, y_hi = _lateral_extents(state)
    return y_lo >= lo and y_hi <= hi


def segment_phases(
    trace: ScenarioTrace, params: SegmentationParams = SegmentationParams()
) -> PhaseSegmentation:
    """Segment the cut-in maneuver of `trace` into phases.

    Phase I starts when the cut-in actor's lateral velocity toward the ego
    lane exceeds `v_lat_init` sustained for `sustain` seconds; Phase II when
    its near-side edge crosses the lane boundary; Phase III when its whole
    footprint is inside the ego lane, and ends when TTC is safe again (an
    undefined TTC, i.e. a non-closing gap, does not trigger the safe-TTC exit,
    so such traces keep Phase III until the trace end).
    """
    cut = trace.cutin_states()
    road = trace.road
    times = trace.times
    y0 = cut[0].y
    side = 1.0 if y0 >= 0 else -1.0

    lo, hi = road.ego_lane_bounds
    adj_lo = hi if side > 0 else lo - road.lane_width
    adj_hi = hi + road.lane_width if side > 0 else lo
    if not adj_lo <= y0 <= adj_hi:
        raise SegmentationError(
            "cut-in actor does not start in a lane adjacent to the ego lane"
        )

    v_toward = np.array([-side * s.v_lat for s in cut])
    n_sustain = max(1, int(math.ceil(params.sustain / trace.dt)))
    above = v_toward > params.v_lat_init
    i_I = None
    for i in range(len(above) - n_sustain + 1):
        if above[i : i + n_sustain].all():
            i_I = i
            break
    if i_I is None:
        raise SegmentationError("no cut-in detected")

    boundary = hi if side > 0 else lo
    i_II = None
    for i in range(i_I + 1, len(cut)):
        y_lo, y_hi = _lateral_extents(cut[i])
        near = y_lo if side > 0 else y_hi
        if (side > 0 and near < boundary) or (side < 0 and near > boundary):
            i_II = i
            break
    if i_II is None:
        raise SegmentationError("cut-in never crosses the lane boundary")

    i_III = None
    for i in range(i_II + 1, len(cut)):
        if _fully_in_ego_lane(cut[i], road):
            i_III = i
            break
    if i_III is None:
        raise SegmentationError("cut-in never completes")

    t_III_end = times[-1]
    for i in range(i_III, len(cut)):
        ttc = ttc_to(trace.ego[i], cut[i])
        if ttc is not None and ttc >= params.ttc_safe:
            t_III_end = times[i]
            break

    t_I = float(times[i_I])
    return PhaseSegmentation(
        t_phase0_start=float(max(t_I - params.phase0_lead, times[0])),
        t_I_start=t_I,
        t_II_start=float(times[i_II]),
        t_III_start=float(times[i_III]),
        t_III_end=float(t_III_end),
    )


def characterize_cutin(
    trace: ScenarioTrace, seg: PhaseSegmentation
) -> CutInCharacteristics:
    """Kinematic statistics of the cut-in over [t_I_start, t_III_start]."""
    times = trace.times
    if not (times[0] <= seg.t_I_start and seg.t_III_end <= times[-1] + 1e-9):
        raise ValueError("segmentation lies outside the trace")
    cut = trace.cutin_states()
    side = 1.0 if cut[0].y >= 0 else -1.0
    sel = (times >= seg.t_I_start - 1e-9) & (times <= seg.t_III_start + 1e-9)
    idx = np.flatnonzero(sel)
    v_abs = np.array([abs(cut[i].v_lat) for i in idx])
    a_toward = np.array([-side * cut[i].a_lat for i in idx])
    i0 = int(idx[0])
    return CutInCharacteristics(
        duration=seg.t_III_start - seg.t_I_start,
        v_lat_avg=float(v_abs.mean()),
        v_lat_max=float(v_abs.max()),
        a_lat_avg=float(a_toward.mean()),
        initial_cutin_distance=float(bumper_gap(trace.ego[i0], cut[i0])),
    )


def with_population(trace: ScenarioTrace, population: str) -> ScenarioTrace:
    """Copy of `trace` tagged with a different scene-population level."""
    if population == trace.population:
        return trace
    return replace(trace, population=population)
