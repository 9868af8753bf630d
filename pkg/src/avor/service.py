"""HTTP API serving scenarios, risk traces and rating collection.

The rating UI is a separate client and talks to this process only through
the JSON endpoints below; if a built frontend bundle is present it is also
served statically from the web root.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import AppConfig
from .engine import run_scenario
from .errors import AvorError, DegenerateTraceError
from .metrics import (
    RATING_SCHEMA_ID,
    RatingTrace,
    dump_rating,
    normalize_risk,
    resample_hold,
)
from .scenario import POPULATIONS, ScenarioTrace, load_scenario

RATING_RATE_HZ = 10.0  # stored ratings are downsampled to this rate

MODEL_NAMES = {"drf": "DRF", "avor": "AVOR"}


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _vehicle_json(vid: str, state) -> dict:
    return {
        "id": vid,
        "x": state.x,
        "y": state.y,
        "heading": state.heading,
        "length": state.length,
        "width": state.width,
    }


def _road_json(trace: ScenarioTrace) -> dict:
    road = trace.road
    return {
        "lane_count": road.lane_count,
        "lane_width": road.lane_width,
        "ego_lane_index": road.ego_lane_index,
        "road_length": road.road_length,
        "y_min": road.y_min,
        "y_max": road.y_max,
    }


class ScenarioStore:
    """Loads scenario files once and caches per-condition risk traces."""

    def __init__(self, scenarios_dir: Path, cfg: AppConfig):
        self.cfg = cfg
        self.traces: dict[str, ScenarioTrace] = {}
        for path in sorted(scenarios_dir.glob("*.json")):
            trace = load_scenario(path)
            self.traces[trace.id] = trace
        self._risk_cache: dict[tuple[str, str, str], dict] = {}
        self._lock = threading.Lock()

    def get(self, scenario_id: str) -> ScenarioTrace:
        if scenario_id not in self.traces:
            raise _error(404, "scenario_not_found",
                         f"unknown scenario {scenario_id!r}")
        return self.traces[scenario_id]

    def risk(self, scenario_id: str, model: str, population: str) -> dict:
        key = (scenario_id, model, population)
        with self._lock:
            if key in self._risk_cache:
                return self._risk_cache[key]
        trace = self.get(scenario_id)
        cfg = self.cfg
        [rt] = run_scenario(trace, [model], cfg.drf, cfg.costs, cfg.engine,
                            population=population)
        try:
            norm = normalize_risk(
                rt.value, cfg.normalization.offset, cfg.normalization.scale
            ).tolist()
        except DegenerateTraceError:
            norm = None
        payload = {
            "scenario_id": scenario_id,
            "model": model,
            "population": population,
            "t": rt.t.tolist(),
            "raw": rt.value.tolist(),
            "normalized": norm,
        }
        with self._lock:
            self._risk_cache[key] = payload
        return payload


def create_app(
    scenarios_dir: Path,
    data_dir: Path,
    cfg: Optional[AppConfig] = None,
    frontend_dir: Optional[Path] = None,
) -> FastAPI:
    cfg = cfg if cfg is not None else AppConfig()
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    store = ScenarioStore(Path(scenarios_dir), cfg)
    sessions: dict[str, dict] = {}
    lock = threading.Lock()

    app = FastAPI(title="avor rating service")

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.get("/api/scenarios")
    def list_scenarios():
        return [
            {
                "id": trace.id,
                "risk_label": trace.risk_label,
                "dt": trace.dt,
                "n_frames": trace.n_frames,
                "duration": trace.duration,
                "populations": list(POPULATIONS),
            }
            for trace in store.traces.values()
        ]

    @app.get("/api/scenarios/{scenario_id}/frames")
    def scenario_frames(scenario_id: str, population: str = Query("O")):
        if population not in POPULATIONS:
            raise _error(400, "bad_population",
                         f"population must be one of {list(POPULATIONS)}")
        trace = store.get(scenario_id)
        cut = trace.cutin_states()
        other_ids = trace.other_actor_ids() if population in ("A", "A+R") else []
        frames = []
        for i in range(trace.n_frames):
            vehicles = [_vehicle_json("ego", trace.ego[i]),
                        _vehicle_json(trace.cutin_actor, cut[i])]
            vehicles.extend(
                _vehicle_json(aid, trace.actors[aid][i]) for aid in other_ids
            )
            frames.append({"t": trace.ego[i].t, "vehicles": vehicles})
        furniture = []
        if population == "A+R":
            furniture = [
                {"class": obj.object_class, "polygon": obj.polygon.tolist()}
                for obj in trace.road.static_objects
            ]
        return {
            "id": trace.id,
            "dt": trace.dt,
            "population": population,
            "road": _road_json(trace),
            "frames": frames,
            "furniture": furniture,
        }

    @app.get("/api/scenarios/{scenario_id}/risk")
    def scenario_risk(
        scenario_id: str,
        model: str = Query("avor"),
        population: str = Query("O"),
    ):
        if model.lower() not in MODEL_NAMES:
            raise _error(400, "bad_model",
                         f"model must be one of {sorted(MODEL_NAMES)}")
        if population not in POPULATIONS:
            raise _error(400, "bad_population",
                         f"population must be one of {list(POPULATIONS)}")
        return store.risk(scenario_id, MODEL_NAMES[model.lower()], population)

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict):
        for key in ("rater_id", "scenario_id", "population"):
            if not isinstance(body.get(key), str) or not body[key]:
                raise _error(400, "bad_request", f"{key} is required")
        trace = store.get(body["scenario_id"])
        if body["population"] not in POPULATIONS:
            raise _error(400, "bad_population",
                         f"population must be one of {list(POPULATIONS)}")
        session_id = uuid.uuid4().hex
        with lock:
            sessions[session_id] = {
                "rater_id": body["rater_id"],
                "scenario_id": trace.id,
                "population": body["population"],
                "completed": False,
            }
        return {"session_id": session_id}

    @app.post("/api/sessions/{session_id}/ratings", status_code=201)
    def submit_rating(session_id: str, body: dict):
        with lock:
            session = sessions.get(session_id)
        if session is None:
            raise _error(404, "session_not_found",
                         f"unknown session {session_id!r}")
        samples = body.get("samples")
        if not isinstance(samples, list) or not samples:
            raise _error(400, "bad_samples", "samples must be a non-empty list")
        try:
            t = np.array([float(s["t"]) for s in samples])
            srr = np.array([float(s["srr"]) for s in samples])
        except (KeyError, TypeError, ValueError):
            raise _error(400, "bad_samples",
                         "each sample needs numeric t and srr")
        if np.any(np.diff(t) <= 0):
            raise _error(400, "bad_samples",
                         "timestamps must be strictly increasing")
        if np.any(srr < 0) or np.any(srr > 10):
            raise _error(400, "bad_samples", "srr values must lie in [0, 10]")

        # previous-value-hold downsampling onto the storage rate
        step = 1.0 / RATING_RATE_HZ
        grid = np.round(np.arange(0.0, t[-1] + step / 2, step), 6)
        grid = grid[grid >= t[0] - 1e-9] if grid.size else t
        held = resample_hold(t, srr, grid)
        rating = RatingTrace(
            rater_id=session["rater_id"],
            scenario_id=session["scenario_id"],
            population=session["population"],
            t=grid,
            srr=held,
        )
        path = data_dir / f"{session_id}.json"
        with lock:
            if session["completed"] or path.exists():
                raise _error(409, "already_submitted",
                             "this session already has a stored rating")
            session["completed"] = True
        dump_rating(rating, path)
        return {"session_id": session_id, "stored_samples": int(grid.size)}

    @app.get("/api/ratings")
    def list_ratings(scenario: Optional[str] = Query(None)):
        out = []
        for path in sorted(data_dir.glob("*.json")):
            try:
                with open(path) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError):
                continue
            if doc.get("schema") != RATING_SCHEMA_ID:
                continue
            if scenario is not None and doc.get("scenario_id") != scenario:
                continue
            doc["session_id"] = path.stem
            out.append(doc)
        return out

    if frontend_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        frontend_dir = candidate if candidate.is_dir() else None
    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="frontend")

    return app
