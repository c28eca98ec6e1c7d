"""Serialize detector, segmentation, and depth outputs for the survey pipeline."""
from .backends import (
    DEPTH_MODELS,
    DETECTORS,
    SEGMENTERS,
    FrameInput,
    resolve_stages,
)
from .errors import (
    BadSceneError,
    EmptySegmentationError,
    ExportDependencyError,
    ExportError,
    NoPersonDetectedError,
)
from .export import (
    ExportManifest,
    ExportSummary,
    ExportedFrame,
    ReferenceInput,
    export_frame,
    export_frames,
    export_reference,
    reference_rows,
    synthetic_reference_inputs,
)
from .scene import Blob, SceneSpec, random_scenes, reference_scene

__version__ = "0.1.0"

__all__ = [
    "Blob",
    "DEPTH_MODELS",
    "DETECTORS",
    "SEGMENTERS",
    "BadSceneError",
    "EmptySegmentationError",
    "ExportDependencyError",
    "ExportError",
    "ExportManifest",
    "ExportSummary",
    "ExportedFrame",
    "FrameInput",
    "NoPersonDetectedError",
    "ReferenceInput",
    "SceneSpec",
    "export_frame",
    "export_frames",
    "export_reference",
    "random_scenes",
    "reference_rows",
    "reference_scene",
    "resolve_stages",
    "synthetic_reference_inputs",
    "__version__",
]
