"""Shared fixtures: shipped scenarios and a cheap synthetic cut-in builder."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from avor.scenario import ScenarioTrace, VehicleState, load_scenario

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS_DIR = ROOT / "scenarios"


def state(**kw) -> VehicleState:
    base = dict(t=0.0, x=0.0, y=0.0, heading=0.0, v_lon=10.0, v_lat=0.0)
    base.update(kw)
    return VehicleState(**base)


def synthetic_doc(
    sid: str = "synthetic",
    n: int = 80,
    dt: float = 0.1,
    mode: str = "cutin",
    include_velocities: bool = True,
    others: bool = False,
) -> dict:
    """Small two-lane scene: ego cruising at 10 m/s, one actor in lane 1.

    mode "cutin": the actor merges into the ego lane well ahead of the ego.
    mode "away": it drifts toward the far road edge (no valid cut-in point).
    mode "parallel": it just drives straight (no cut-in at all).
    """
    t = np.arange(n) * dt
    ego_x = 10.0 * t
    cut_vlon = np.full(n, 12.0)
    if mode == "cutin":
        v_toward = np.interp(t, [0.0, 1.0, 2.0, 4.2, 4.4, n * dt],
                             [0.0, 0.0, 1.2, 1.2, 0.0, 0.0])
    elif mode == "away":
        v_toward = np.full(n, -0.6)
    else:
        v_toward = np.zeros(n)
    cut_y = 3.5 - np.concatenate(
        [[0.0], np.cumsum((v_toward[1:] + v_toward[:-1]) / 2.0 * dt)]
    )
    cut_x = 25.0 + 12.0 * t
    cut_h = np.arctan2(-v_toward, cut_vlon)

    def frames(x, y, h, vlon, vlat):
        return [
            {"t": round(float(tk), 6), "x": float(xk), "y": float(yk),
             "heading": float(hk),
             **({"v_lon": float(vk), "v_lat": float(wk)}
                if include_velocities else {})}
            for tk, xk, yk, hk, vk, wk in zip(t, x, y, h, vlon, vlat)
        ]

    doc = {
        "schema": "avor-scenario/1",
        "id": sid,
        "dt": dt,
        "population": "A",
        "risk_label": "unlabeled",
        "road": {"lane_count": 2, "lane_width": 3.5, "ego_lane_index": 0,
                 "road_length": 500.0, "static_objects": []},
        "cutin_actor": "cutin",
        "ego": frames(ego_x, np.zeros(n), np.zeros(n), np.full(n, 10.0),
                      np.zeros(n)),
        "actors": {
            "cutin": frames(cut_x, cut_y, cut_h, cut_vlon, -v_toward),
        },
    }
    if others:
        # a lead vehicle in the ego lane, well inside the risk-field support
        lead_x = 20.0 + 10.5 * t
        doc["actors"]["lead"] = frames(lead_x, np.zeros(n), np.zeros(n),
                                       np.full(n, 10.5), np.zeros(n))
    return doc


def write_doc(tmp_path: Path, doc: dict, name: str = "scenario.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def make_trace(tmp_path: Path, doc: dict) -> ScenarioTrace:
    return load_scenario(write_doc(tmp_path, doc))


@pytest.fixture(scope="session")
def hrs_path() -> Path:
    return SCENARIOS_DIR / "hrs.json"


@pytest.fixture(scope="session")
def lrs_path() -> Path:
    return SCENARIOS_DIR / "lrs.json"


@pytest.fixture(scope="session")
def hrs_trace(hrs_path) -> ScenarioTrace:
    return load_scenario(hrs_path)


@pytest.fixture(scope="session")
def lrs_trace(lrs_path) -> ScenarioTrace:
    return load_scenario(lrs_path)


@pytest.fixture()
def cutin_trace(tmp_path) -> ScenarioTrace:
    return make_trace(tmp_path, synthetic_doc())
