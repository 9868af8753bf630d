"""Surrogate safety metrics, normalization, rating aggregation and scoring."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateTraceError, ScenarioParseError
from .scenario import (
    PhaseSegmentation,
    ScenarioTrace,
    VehicleState,
    bumper_gap,
)

RATING_SCHEMA_ID = "avor-rating/1"
SRR_MAX = 10.0
PHASES = ("I", "II", "III")


@dataclass(frozen=True)
class RatingTrace:
    rater_id: str
    scenario_id: str
    population: str
    t: np.ndarray
    srr: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        srr = np.asarray(self.srr, dtype=float)
        if t.shape != srr.shape or t.ndim != 1 or t.size == 0:
            raise ValueError("t and srr must be equal-length non-empty vectors")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if np.any(srr < 0) or np.any(srr > SRR_MAX):
            raise ValueError("srr values must lie in [0, 10]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "srr", srr)


@dataclass(frozen=True)
class SurrogateTrace:
    t: np.ndarray
    ttc_inv: np.ndarray
    thw_inv: np.ndarray
    ttc_valid: np.ndarray
    thw_valid: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    # keyed by (model, scenario_id, population, phase) -> RMSE in rating points
    cells: dict[tuple[str, str, str, str], float]
    onset: dict[str, bool] = field(default_factory=dict)

    @property
    def onset_fraction(self) -> float:
        if not self.onset:
            return math.nan
        return sum(self.onset.values()) / len(self.onset)


# ---------------------------------------------------------------------------
# surrogate metrics


def _laterally_overlaps_ego_lane(state: VehicleState, road) -> bool:
    lo, hi = road.ego_lane_bounds
    ys = state.footprint()[:, 1]
    return ys.min() < hi and ys.max() > lo


def _lead_vehicle(trace: ScenarioTrace, i: int) -> Optional[VehicleState]:
    ego = trace.ego[i]
    cut = trace.cutin_states()[i]
    road = trace.road
    if _laterally_overlaps_ego_lane(cut, road):
        return cut
    lo, hi = road.ego_lane_bounds
    best = None
    for aid in trace.other_actor_ids():
        st = trace.actors[aid][i]
        if lo <= st.y <= hi and bumper_gap(ego, st) > 0:
            if best is None or st.x < best.x:
                best = st
    return best


def surrogate_metrics(trace: ScenarioTrace) -> SurrogateTrace:
    """Per-frame TTC^-1 and THW^-1 toward the relevant lead vehicle.

    The gap is measured bumper to bumper to the cut-in actor once it overlaps
    the ego lane laterally, otherwise to the closest lead in the ego lane.
    Undefined samples are stored as 0 with their validity mask cleared.
    """
    n = trace.n_frames
    ttc_inv = np.zeros(n)
    thw_inv = np.zeros(n)
    ttc_valid = np.zeros(n, dtype=bool)
    thw_valid = np.zeros(n, dtype=bool)
    for i in range(n):
        lead = _lead_vehicle(trace, i)
        if lead is None:
            continue
        ego = trace.ego[i]
        gap = bumper_gap(ego, lead)
        if gap <= 0:
            continue
        if ego.v_lon > 0:
            thw_inv[i] = ego.v_lon / gap
            thw_valid[i] = True
        closing = ego.v_lon - lead.v_lon
        if closing > 0:
            ttc_inv[i] = closing / gap
            ttc_valid[i] = True
    return SurrogateTrace(trace.times, ttc_inv, thw_inv, ttc_valid, thw_valid)


# ---------------------------------------------------------------------------
# normalization and aggregation


def normalize_risk(
    raw: np.ndarray, phase0_mean_srr: float, scale: Optional[float] = None
) -> np.ndarray:
    """Min-max normalize a raw risk series onto [c, c + scale].

    `phase0_mean_srr` is the offset c (the pre-maneuver rating baseline);
    `scale` defaults to 10 - c so the ceiling stays at the rating maximum.
    """
    values = np.asarray(raw, dtype=float)
    if scale is None:
        scale = SRR_MAX - phase0_mean_srr
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateTraceError("degenerate trace: constant risk values")
    return scale * (values - lo) / (hi - lo) + phase0_mean_srr


def resample_hold(t_src: np.ndarray, v_src: np.ndarray, grid_t: np.ndarray) -> np.ndarray:
    """Previous-value-hold resampling (slider semantics)."""
    idx = np.searchsorted(np.asarray(t_src), np.asarray(grid_t), side="right") - 1
    idx = np.clip(idx, 0, len(v_src) - 1)
    return np.asarray(v_src)[idx]


def aggregate_ratings(
    ratings: Sequence[RatingTrace], grid_t: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Point-wise mean and sample standard deviation across raters."""
    if not ratings:
        raise ValueError("need at least one rating trace")
    grid_t = np.asarray(grid_t, dtype=float)
    stack = np.stack([resample_hold(r.t, r.srr, grid_t) for r in ratings])
    mean = stack.mean(axis=0)
    if len(ratings) == 1:
        std = np.zeros_like(mean)
    else:
        std = stack.std(axis=0, ddof=1)
    return mean, std


# ---------------------------------------------------------------------------
# scoring


def rmse_per_phase(
    model_norm: np.ndarray,
    mean_srr: np.ndarray,
    t: np.ndarray,
    seg: PhaseSegmentation,
) -> dict[str, float]:
    """RMSE between two same-grid series over each cut-in phase window."""
    model_norm = np.asarray(model_norm, dtype=float)
    mean_srr = np.asarray(mean_srr, dtype=float)
    t = np.asarray(t, dtype=float)
    if model_norm.shape != mean_srr.shape or model_norm.shape != t.shape:
        raise ValueError("series must share one time grid")
    out = {}
    for phase in PHASES:
        lo, hi = seg.window(phase)
        sel = (t >= lo) & (t < hi)
        if not np.any(sel):
            raise ValueError(f"phase {phase} window contains no samples")
        resid = model_norm[sel] - mean_srr[sel]
        out[phase] = float(np.sqrt(np.mean(resid**2)))
    return out


def detect_onset(
    rating: RatingTrace, seg: PhaseSegmentation, threshold: float = 0.5
) -> bool:
    """True iff the Phase-I rating peak exceeds the Phase-0 mean by `threshold`."""
    t, srr = rating.t, rating.srr
    if seg.t_I_start < t[0] or seg.t_II_start > t[-1] + 1e-9:
        raise ValueError("Phase I window lies outside the rating time span")
    sel0 = (t >= seg.t_phase0_start) & (t < seg.t_I_start)
    sel1 = (t >= seg.t_I_start) & (t < seg.t_II_start)
    if not np.any(sel0) or not np.any(sel1):
        raise ValueError("phase window contains no rating samples")
    return float(srr[sel1].max() - srr[sel0].mean()) > threshold


# ---------------------------------------------------------------------------
# rating file I/O


def load_rating(path) -> RatingTrace:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != RATING_SCHEMA_ID:
        raise ScenarioParseError(f"unsupported rating schema {doc.get('schema')!r}")
    samples = doc.get("samples", [])
    return RatingTrace(
        rater_id=str(doc["rater_id"]),
        scenario_id=str(doc["scenario_id"]),
        population=str(doc["population"]),
        t=np.array([s["t"] for s in samples], dtype=float),
        srr=np.array([s["srr"] for s in samples], dtype=float),
    )


def dump_rating(rating: RatingTrace, path) -> None:
    doc = {
        "schema": RATING_SCHEMA_ID,
        "rater_id": rating.rater_id,
        "scenario_id": rating.scenario_id,
        "population": rating.population,
        "samples": [
            {"t": float(t), "srr": float(s)}
            for t, s in zip(rating.t, rating.srr)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def report_to_csv(
    report: EvalReport, path, scenarios: Sequence[str], populations=("O", "A", "A+R")
) -> None:
    """Table-layout CSV: one row per model, population x scenario x phase columns."""
    columns = [
        (pop, scen, phase)
        for pop in populations
        for scen in scenarios
        for phase in PHASES
    ]
    models = sorted({key[0] for key in report.cells} or {"DRF", "AVOR"})
    with open(path, "w", newline="") as fh:
        fh.write("model," + ",".join(f"{p}/{s}/{ph}" for p, s, ph in columns) + "\n")
        for model in models:
            row = [model]
            for pop, scen, phase in columns:
                val = report.cells.get((model, scen, pop, phase))
                row.append("" if val is None else f"{val:.4f}")
            fh.write(",".join(row) + "\n")
