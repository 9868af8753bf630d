"""TOML configuration with environment-variable overrides.

Recognized sections and keys (all optional, defaults in the dataclasses):

    [drf]          t_la, p_height, m_width, c_width, k_steer, wheelbase,
                   origin_at_front_bumper
    [costs]        cost_car, cost_offroad, cost_lane_marking, cost_building,
                   cost_tree, marking_width
    [segmentation] v_lat_init, sustain, ttc_safe, phase0_lead
    [grid]         res, ahead, behind, lateral
    [engine]       steering_from_curvature, v_lat_min
    [normalization] offset, scale   (scale omitted -> 10 - offset)
    [evaluation]   onset_threshold

Environment variables named AVOR_<SECTION>_<KEY> (upper case) override file
values, e.g. AVOR_GRID_RES=0.5.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Any, Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .costmap import CostParams
from .engine import EngineConfig, GridConfig
from .risk_field import DrfParams
from .scenario import SegmentationParams

ENV_PREFIX = "AVOR"


@dataclass(frozen=True)
class NormalizationConfig:
    offset: float = 0.0
    scale: Optional[float] = None  # None -> 10 - offset


@dataclass(frozen=True)
class EvaluationConfig:
    onset_threshold: float = 0.5


@dataclass(frozen=True)
class AppConfig:
    drf: DrfParams = DrfParams()
    costs: CostParams = CostParams()
    segmentation: SegmentationParams = SegmentationParams()
    engine: EngineConfig = EngineConfig()
    normalization: NormalizationConfig = NormalizationConfig()
    evaluation: EvaluationConfig = EvaluationConfig()


def _coerce(raw: str, like: Any) -> Any:
    if isinstance(like, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int) and not isinstance(like, bool):
        return int(raw)
    return float(raw)


def _build(cls, section: str, data: dict) -> Any:
    kwargs = {}
    for f in fields(cls):
        value = data.get(f.name, getattr(cls(), f.name))
        env = os.environ.get(f"{ENV_PREFIX}_{section.upper()}_{f.name.upper()}")
        if env is not None:
            value = _coerce(env, value if value is not None else 0.0)
        kwargs[f.name] = value
    return cls(**kwargs)


def load_config(path=None) -> AppConfig:
    doc: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    grid = _build(GridConfig, "grid", doc.get("grid", {}))
    engine_doc = doc.get("engine", {})
    engine = EngineConfig(
        grid=grid,
        steering_from_curvature=_build_scalar(
            "engine", "steering_from_curvature",
            engine_doc.get("steering_from_curvature", True),
        ),
        v_lat_min=_build_scalar(
            "engine", "v_lat_min", engine_doc.get("v_lat_min", 0.05)
        ),
    )
    return AppConfig(
        drf=_build(DrfParams, "drf", doc.get("drf", {})),
        costs=_build(CostParams, "costs", doc.get("costs", {})),
        segmentation=_build(SegmentationParams, "segmentation",
                            doc.get("segmentation", {})),
        engine=engine,
        normalization=_build(NormalizationConfig, "normalization",
                             doc.get("normalization", {})),
        evaluation=_build(EvaluationConfig, "evaluation",
                          doc.get("evaluation", {})),
    )


def _build_scalar(section: str, key: str, value: Any) -> Any:
    env = os.environ.get(f"{ENV_PREFIX}_{section.upper()}_{key.upper()}")
    if env is not None:
        return _coerce(env, value)
    return value
