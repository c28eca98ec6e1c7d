"""Camera-trap distance sampling toolkit.

From depth maps and detections to animal distances, and from distances to
density and abundance: depth calibration, two distance-extraction
strategies, accuracy evaluation, the point-transect estimation engine, and
a synthetic-survey generator.
"""
from . import calibration, ctds, distances, evaluation, ingest, simulate
from .errors import CtdskitError
from .types import (
    Camera,
    DepthMap,
    DepthUnit,
    Detection,
    DistanceDataset,
    InstanceMask,
    Observation,
    ObservationSource,
    ReferenceSample,
    SurveyConfig,
    default_cutpoints,
)

__version__ = "0.1.0"

__all__ = [
    "Camera",
    "CtdskitError",
    "DepthMap",
    "DepthUnit",
    "Detection",
    "DistanceDataset",
    "InstanceMask",
    "Observation",
    "ObservationSource",
    "ReferenceSample",
    "SurveyConfig",
    "calibration",
    "ctds",
    "default_cutpoints",
    "distances",
    "evaluation",
    "ingest",
    "simulate",
    "__version__",
]
