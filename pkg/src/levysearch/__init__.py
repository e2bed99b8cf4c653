"""Intermittent random-walk search on a 2-D torus: simulation and verification."""

__version__ = "0.1.0"

from .estimator import (
    DetectionResult,
    EnsembleResult,
    Estimate,
    SensitivityReport,
    detection_time,
    scale_sensitivity,
    worst_over_ensemble,
)
from .geometry import PlanePoint, TorusPoint, torus_distance, wrap
from .steplaw import WalkSpec, analytics, cdf, normalization, sample_length
from .target import Target, make_ensemble
from .walk import TrialRecord, WalkState, default_caps, run_plane, run_until, step

__all__ = [
    "__version__",
    "DetectionResult",
    "EnsembleResult",
    "Estimate",
    "SensitivityReport",
    "detection_time",
    "scale_sensitivity",
    "worst_over_ensemble",
    "PlanePoint",
    "TorusPoint",
    "torus_distance",
    "wrap",
    "WalkSpec",
    "analytics",
    "cdf",
    "normalization",
    "sample_length",
    "Target",
    "make_ensemble",
    "TrialRecord",
    "WalkState",
    "default_caps",
    "run_plane",
    "run_until",
    "step",
]
