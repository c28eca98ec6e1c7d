"""Model stages behind names: detector, segmenter, depth estimator.

Each stage is resolved from a small registry so the pipeline wiring does
not care where predictions come from. The synthetic backends read the
ground truth carried by a frame's SceneSpec and need no weights; the
named real-model slots raise ExportDependencyError until the optional ML
stack is installed, keeping this package import-light.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import BadSceneError, ExportDependencyError, ExportError
from .scene import SceneSpec, render_depth_m, render_index

BBox = tuple[float, float, float, float]

# Arbitrary but fixed response of the relative-depth backend: a
# saturating monotone map from metres to unit-free raw values, so the
# downstream calibration actually has a curve to recover.
RELATIVE_SCALE = 80.0
RELATIVE_KNEE_M = 6.0


@dataclass(frozen=True)
class FrameInput:
    """One frame to export: a real image path or a synthetic scene."""

    frame_id: str
    camera_id: str
    timestamp_s: float
    image_path: Path | None = None
    scene: SceneSpec | None = None

    def __post_init__(self) -> None:
        if (self.image_path is None) == (self.scene is None):
            raise ValueError("exactly one of image_path or scene must be given")
        if not self.frame_id or not self.camera_id:
            raise ValueError("frame_id and camera_id must be non-empty")
        if self.scene is not None and (
            self.scene.frame_id != self.frame_id
            or self.scene.camera_id != self.camera_id
        ):
            raise ValueError("scene ids disagree with the frame ids")

    @classmethod
    def from_scene(cls, scene: SceneSpec) -> "FrameInput":
        return cls(
            frame_id=scene.frame_id,
            camera_id=scene.camera_id,
            timestamp_s=scene.timestamp_s,
            scene=scene,
        )


def _scene_of(frame: FrameInput, stage: str) -> SceneSpec:
    if frame.scene is None:
        raise ExportError(
            f"synthetic {stage} needs a synthetic scene, frame {frame.frame_id!r} "
            "has only an image path"
        )
    return frame.scene


def synthetic_detect(frame: FrameInput) -> list[tuple[BBox, float]]:
    """Animal boxes straight from the scene's non-person blobs."""
    scene = _scene_of(frame, "detector")
    return [(b.bbox(), b.confidence) for b in scene.blobs if not b.is_person]


def synthetic_detect_person(frame: FrameInput) -> list[tuple[BBox, float]]:
    scene = _scene_of(frame, "detector")
    return [(b.bbox(), b.confidence) for b in scene.blobs if b.is_person]


def synthetic_segment(
    frame: FrameInput, boxes: Sequence[BBox], prompt: str = "box"
) -> list[np.ndarray]:
    """Visible-pixel masks for the blobs matching the prompt boxes.

    The prompt mode is accepted for interface parity and ignored: the
    synthetic segmenter always knows the exact ellipse.
    """
    scene = _scene_of(frame, "segmenter")
    index = render_index(scene)
    out = []
    for box in boxes:
        matches = [
            i
            for i, b in enumerate(scene.blobs)
            if np.allclose(b.bbox(), box, rtol=0.0, atol=1e-9)
        ]
        if len(matches) != 1:
            raise BadSceneError(
                f"frame {frame.frame_id!r}: prompt box {box} matches "
                f"{len(matches)} blob(s)"
            )
        out.append(index == matches[0])
    return out


def synthetic_depth_metric(frame: FrameInput) -> np.ndarray:
    """Raw values already in metres (a metric-depth foundation model)."""
    return render_depth_m(_scene_of(frame, "depth estimator"))


def synthetic_depth_relative(frame: FrameInput) -> np.ndarray:
    """Unit-free raw values, monotone increasing in metres."""
    metres = render_depth_m(_scene_of(frame, "depth estimator"))
    return RELATIVE_SCALE * metres / (metres + RELATIVE_KNEE_M)


def _missing(stage: str, name: str, needs: str) -> Callable:
    def raise_it(*_args, **_kwargs):
        raise ExportDependencyError(
            f"{stage} {name!r} needs {needs}, which is not installed; "
            "use the synthetic backend or install the model stack locally"
        )

    return raise_it


DETECTORS: dict[str, Callable[[FrameInput], list[tuple[BBox, float]]]] = {
    "synthetic": synthetic_detect,
    "megadetector-v5": _missing("detector", "megadetector-v5", "torch and the MegaDetector weights"),
}

# The reference flow needs the person category, not animals.
PERSON_DETECTORS: dict[str, Callable[[FrameInput], list[tuple[BBox, float]]]] = {
    "synthetic": synthetic_detect_person,
    "megadetector-v5": _missing("detector", "megadetector-v5", "torch and the MegaDetector weights"),
}

SEGMENTERS: dict[str, Callable[..., list[np.ndarray]]] = {
    "synthetic": synthetic_segment,
    "sam": _missing("segmenter", "sam", "torch and the SAM checkpoint"),
}

DEPTH_MODELS: dict[str, Callable[[FrameInput], np.ndarray]] = {
    "synthetic-metric": synthetic_depth_metric,
    "synthetic-relative": synthetic_depth_relative,
    "dpt-hybrid": _missing("depth model", "dpt-hybrid", "torch and the DPT weights"),
    "depth-anything-metric": _missing(
        "depth model", "depth-anything-metric", "torch and the Depth Anything weights"
    ),
}


def _resolve(registry: dict[str, Callable], name: str, stage: str) -> Callable:
    try:
        return registry[name]
    except KeyError:
        known = ", ".join(sorted(registry))
        raise ExportError(f"unknown {stage} {name!r}; known: {known}") from None


@dataclass(frozen=True)
class Stages:
    detect: Callable[[FrameInput], list[tuple[BBox, float]]]
    segment: Callable[..., list[np.ndarray]]
    depth: Callable[[FrameInput], np.ndarray]


def resolve_stages(detector: str, segmenter: str, depth_model: str) -> Stages:
    return Stages(
        detect=_resolve(DETECTORS, detector, "detector"),
        segment=_resolve(SEGMENTERS, segmenter, "segmenter"),
        depth=_resolve(DEPTH_MODELS, depth_model, "depth model"),
    )


def resolve_person_detector(name: str) -> Callable[[FrameInput], list[tuple[BBox, float]]]:
    return _resolve(PERSON_DETECTORS, name, "person detector")
