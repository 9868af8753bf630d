"""Generate the shipped digitized cut-in scenarios (hrs.json, lrs.json).

Both scenarios are urban-speed cut-ins on a straight three-lane road. The
cut-in vehicle overtakes in the left-adjacent lane and merges ahead of the
ego with a growing gap, while the ego eases off during the execution phase.
Lateral velocity profiles are piecewise linear and calibrated so that the
segmented maneuver reproduces the target duration, average/max lateral speed
and initial gap.

Run from the repository root:  python scripts/make_scenarios.py [outdir]
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from avor.engine import run_scenario
from avor.metrics import normalize_risk
from avor.scenario import load_scenario, segment_phases, characterize_cutin

DT = 0.1
N = 200


def piecewise(t: np.ndarray, knots: list[tuple[float, float]]) -> np.ndarray:
    ts = [k[0] for k in knots]
    vs = [k[1] for k in knots]
    return np.interp(t, ts, vs)


def speed_profile(t, v0, t_brake, decel, v_end):
    """Constant v0 until t_brake, then constant deceleration down to v_end."""
    v = np.full_like(t, float(v0))
    braking = t >= t_brake
    v[braking] = np.maximum(v0 - decel * (t[braking] - t_brake), v_end)
    return v


def integrate(v, dt, x0=0.0):
    x = np.concatenate([[0.0], np.cumsum((v[1:] + v[:-1]) / 2.0 * dt)])
    return x + x0


def frames(t, x, y, heading, v_lon, v_lat):
    return [
        {
            "t": round(float(tk), 6),
            "x": round(float(xk), 6),
            "y": round(float(yk), 6),
            "heading": round(float(hk), 6),
            "v_lon": round(float(vk), 6),
            "v_lat": round(float(wk), 6),
        }
        for tk, xk, yk, hk, vk, wk in zip(t, x, y, heading, v_lon, v_lat)
    ]


ROAD = {
    "lane_count": 3,
    "lane_width": 3.5,
    "ego_lane_index": 0,
    "road_length": 1000.0,
    # road furniture sits well beyond the risk grid's lateral extent
    "static_objects": [
        {"class": "building",
         "polygon": [[0.0, 20.0], [60.0, 20.0], [60.0, 32.0], [0.0, 32.0]]},
        {"class": "building",
         "polygon": [[90.0, 20.0], [160.0, 20.0], [160.0, 30.0], [90.0, 30.0]]},
        {"class": "tree",
         "polygon": [[30.0, -22.0], [33.0, -22.0], [31.5, -18.0]]},
        {"class": "tree",
         "polygon": [[70.0, -23.0], [73.0, -23.0], [71.5, -19.0]]},
    ],
}


def build_scenario(sid, risk_label, ego_kw, cut_kw, cut_dims, others, gap0):
    t = np.arange(N) * DT

    ego_v = speed_profile(t, **ego_kw)
    ego_x = integrate(ego_v, DT)
    ego_y = np.zeros_like(t)
    ego_h = np.zeros_like(t)

    cut_vlat_toward = piecewise(t, cut_kw["vlat_knots"])
    cut_vlat = -cut_vlat_toward  # approaching from the left (y > 0)
    cut_y = integrate(cut_vlat, DT, x0=cut_kw["y0"])
    cut_vlon = np.full_like(t, float(cut_kw["v_lon"]))
    cut_h = np.arctan2(cut_vlat, cut_vlon)

    doc = {
        "schema": "avor-scenario/1",
        "id": sid,
        "dt": DT,
        "population": "A+R",
        "risk_label": risk_label,
        "road": ROAD,
        "dimensions": {
            "ego": {"length": 4.5, "width": 2.0},
            "cutin": cut_dims,
            **{name: dims for name, dims, _, _, _ in others},
        },
        "cutin_actor": "cutin",
        "ego": frames(t, ego_x, ego_y, ego_h, ego_v, np.zeros_like(t)),
        "actors": {},
    }

    # place the cut-in so the bumper gap at Phase-I start equals gap0;
    # Phase-I onset only depends on the lateral profile, so locate it first
    cut_x = integrate(cut_vlon, DT)
    doc["actors"]["cutin"] = frames(t, cut_x, cut_y, cut_h, cut_vlon, cut_vlat)
    for name, dims, y, x_off, v in others:
        vx = np.full_like(t, float(v))
        doc["actors"][name] = frames(
            t, integrate(vx, DT, x0=x_off), np.full_like(t, y),
            np.zeros_like(t), vx, np.zeros_like(t),
        )
    trace = trace_from_doc(doc)
    seg = segment_phases(trace)
    i_I = int(round(seg.t_I_start / DT))
    half_lengths = (4.5 + cut_dims["length"]) / 2.0
    shift = (ego_x[i_I] + half_lengths + gap0) - cut_x[i_I]
    cut_x = cut_x + shift
    doc["actors"]["cutin"] = frames(t, cut_x, cut_y, cut_h, cut_vlon, cut_vlat)
    return doc


def trace_from_doc(doc):
    import io, tempfile, os
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(doc, fh)
        path = fh.name
    try:
        return load_scenario(path)
    finally:
        os.unlink(path)


def hrs():
    # lateral profile: sharp attack to the reference peak, long release
    t0 = 4.0
    vlat_knots = [
        (0.0, 0.0), (t0, 0.0),
        (t0 + 1.3, 1.275),            # attack
        (t0 + 1.5, 1.275),            # short plateau at the peak
        (t0 + 4.5, 0.2),              # release down to a slow drift
        (16.0, 0.0), (19.9, 0.0),     # settle onto the lane center
    ]
    return build_scenario(
        "hrs", "HRS",
        ego_kw=dict(v0=10.5, t_brake=6.2, decel=1.2, v_end=7.5),
        cut_kw=dict(v_lon=16.5, vlat_knots=vlat_knots, y0=4.03),
        cut_dims={"length": 4.5, "width": 2.0},
        others=[
            ("sedan", {"length": 4.5, "width": 1.9}, 3.5, 45.0, 10.5),
            ("suv", {"length": 4.8, "width": 2.0}, 7.0, 25.0, 11.0),
        ],
        gap0=8.0,
    )


def lrs():
    # lazy drift below the detection threshold, one decisive push, slow crawl
    vlat_knots = [
        (0.0, 0.0), (3.0, 0.0),
        (3.6, 0.15),                   # drift toward the boundary
        (9.5, 0.15),
        (10.9, 0.7419),                # the decisive push (reference peak)
        (12.4, 0.125),                 # back off
        (14.6, 0.12),                  # crawl across the last stretch
        (15.6, 0.4), (16.4, 0.4),      # settle toward the lane center
        (18.75, 0.0), (19.9, 0.0),
    ]
    return build_scenario(
        "lrs", "LRS",
        ego_kw=dict(v0=9.0, t_brake=12.0, decel=0.5, v_end=8.0),
        cut_kw=dict(v_lon=12.0, vlat_knots=vlat_knots, y0=3.5),
        cut_dims={"length": 4.2, "width": 1.4},
        others=[
            ("sedan", {"length": 4.5, "width": 1.9}, 3.5, 50.0, 9.0),
            ("van", {"length": 5.2, "width": 2.1}, 7.0, 30.0, 9.5),
        ],
        gap0=12.8,
    )


def report(doc, targets):
    trace = trace_from_doc(doc)
    seg = segment_phases(trace)
    ch = characterize_cutin(trace, seg)
    print(f"--- {doc['id']} ---")
    print(f"  phases: 0={seg.t_phase0_start:.1f} I={seg.t_I_start:.1f} "
          f"II={seg.t_II_start:.1f} III={seg.t_III_start:.1f} "
          f"end={seg.t_III_end:.1f}")
    for name, got, want in [
        ("duration", ch.duration, targets[0]),
        ("v_lat_avg", ch.v_lat_avg, targets[1]),
        ("v_lat_max", ch.v_lat_max, targets[2]),
        ("init_dist", ch.initial_cutin_distance, targets[3]),
    ]:
        err = (got - want) / want * 100.0
        print(f"  {name:10s} {got:8.4f}  target {want:8.4f}  ({err:+.1f}%)")
    print(f"  a_lat_avg  {ch.a_lat_avg:8.4f}")
    return trace, seg


def onset_check(trace, seg):
    traces = {tr.model: tr for tr in run_scenario(trace, population="O")}
    for model in ("AVOR", "DRF"):
        tr = traces[model]
        norm = normalize_risk(tr.value, phase0_mean_srr=0.0)
        sel0 = (tr.t >= seg.t_phase0_start) & (tr.t < seg.t_I_start)
        sel1 = (tr.t >= seg.t_I_start) & (tr.t < seg.t_II_start)
        rise = norm[sel1].max() - norm[sel0].mean()
        print(f"  {model}: raw range {tr.value.min():.1f}..{tr.value.max():.1f} "
              f"phase-I rise {rise:.3f}")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("scenarios")
    outdir.mkdir(parents=True, exist_ok=True)
    for doc, targets in [
        (hrs(), (4.3, 0.757, 1.275, 8.0)),
        (lrs(), (4.9, 0.3049, 0.7419, 12.8)),
    ]:
        trace, seg = report(doc, targets)
        if "--onset" in sys.argv:
            onset_check(trace, seg)
        path = outdir / f"{doc['id']}.json"
        with open(path, "w") as fh:
            json.dump(doc, fh)
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()
