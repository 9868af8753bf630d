"""Perceived-risk simulation for cut-in scenarios.

Builds the driver's risk field around an ego vehicle, composes static and
dynamic (virtual cut-in collision) cost layers, evaluates per-frame risk for
the baseline DRF model and the AVOR extension, and scores model outputs
against recorded subjective risk ratings.
"""

from .costmap import (
    CostMapStack,
    CostParams,
    VccPoint,
    build_dynamic_costmap,
    build_static_costmap,
    compose_costmap,
    compute_vcc,
)
from .engine import (
    EngineConfig,
    GridConfig,
    RiskTrace,
    evaluate_risk,
    run_scenario,
)
from .grid import GridField, GridSpec
from .metrics import (
    EvalReport,
    RatingTrace,
    SurrogateTrace,
    aggregate_ratings,
    detect_onset,
    normalize_risk,
    rmse_per_phase,
    surrogate_metrics,
)
from .risk_field import DrfParams, build_drf
from .scenario import (
    CutInCharacteristics,
    PhaseSegmentation,
    RoadGeometry,
    ScenarioTrace,
    SegmentationParams,
    VehicleState,
    characterize_cutin,
    derive_kinematics,
    load_scenario,
    segment_phases,
)

__version__ = "0.1.0"
