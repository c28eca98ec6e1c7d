"""Deterministic synthetic scenes standing in for real footage.

A scene is a flat far background plus elliptical blobs (animals, or the
surveyor in reference footage) at known distances. The smoke-test export
mode renders these instead of running any model, so the downstream
pipeline can be exercised end to end with no weights and no GPU while
every stage still sees mutually consistent ground truth: the detector
returns each blob's box, the segmenter its visible pixels, and the depth
stage the distances the blobs were placed at.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSceneError

# Blob radii are kept a couple of pixels wide at the default frame size
# so every detection owns at least one visible pixel.
MIN_RADIUS = 0.02
EDGE_MARGIN = 0.02


@dataclass(frozen=True)
class Blob:
    """One elliptical target: normalized centre/half-axes plus distance."""

    cx: float
    cy: float
    rx: float
    ry: float
    distance_m: float
    confidence: float = 0.95
    is_person: bool = False

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "rx", "ry", "distance_m", "confidence"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise BadSceneError(f"blob {name} must be a finite number, got {v!r}")
        if self.rx < MIN_RADIUS or self.ry < MIN_RADIUS:
            raise BadSceneError(
                f"blob radii ({self.rx}, {self.ry}) below minimum {MIN_RADIUS}"
            )
        if (
            self.cx - self.rx < EDGE_MARGIN - 1e-12
            or self.cx + self.rx > 1.0 - EDGE_MARGIN + 1e-12
            or self.cy - self.ry < EDGE_MARGIN - 1e-12
            or self.cy + self.ry > 1.0 - EDGE_MARGIN + 1e-12
        ):
            raise BadSceneError("blob must lie fully inside the frame margins")
        if self.distance_m <= 0:
            raise BadSceneError(f"blob distance {self.distance_m} must be positive")
        if not (0.0 < self.confidence <= 1.0):
            raise BadSceneError(f"blob confidence {self.confidence} outside (0, 1]")

    def bbox(self) -> tuple[float, float, float, float]:
        """Normalized [x, y, w, h], origin top-left."""
        return (self.cx - self.rx, self.cy - self.ry, 2 * self.rx, 2 * self.ry)


@dataclass(frozen=True)
class SceneSpec:
    frame_id: str
    camera_id: str
    timestamp_s: float
    height: int = 96
    width: int = 128
    background_m: float = 25.0
    blobs: tuple[Blob, ...] = ()
    texture_amp_m: float = 0.05
    texture_seed: int = 0

    def __post_init__(self) -> None:
        if not self.frame_id or not self.camera_id:
            raise BadSceneError("frame_id and camera_id must be non-empty")
        if self.height < 8 or self.width < 8:
            raise BadSceneError(f"frame {self.width}x{self.height} too small")
        if self.background_m <= max((b.distance_m for b in self.blobs), default=0.0):
            raise BadSceneError("background must sit behind every blob")
        if self.texture_amp_m < 0 or self.texture_amp_m >= 0.5:
            raise BadSceneError(f"texture amplitude {self.texture_amp_m} outside [0, 0.5)")


def _pixel_grid(scene: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    ys = (np.arange(scene.height) + 0.5) / scene.height
    xs = (np.arange(scene.width) + 0.5) / scene.width
    return np.meshgrid(xs, ys)


def render_index(scene: SceneSpec) -> np.ndarray:
    """Per-pixel index of the visible blob, -1 for background.

    Where ellipses overlap the nearest blob wins, matching what any
    segmenter running on a rendered image would see.
    """
    xg, yg = _pixel_grid(scene)
    index = np.full((scene.height, scene.width), -1, dtype=np.int64)
    depth = np.full((scene.height, scene.width), scene.background_m)
    for i, b in enumerate(scene.blobs):
        inside = ((xg - b.cx) / b.rx) ** 2 + ((yg - b.cy) / b.ry) ** 2 <= 1.0
        closer = inside & (b.distance_m < depth)
        index[closer] = i
        depth[closer] = b.distance_m
    return index


def render_depth_m(scene: SceneSpec) -> np.ndarray:
    """Metric ground-truth depth with a little seeded surface texture."""
    index = render_index(scene)
    depth = np.full((scene.height, scene.width), scene.background_m)
    for i, b in enumerate(scene.blobs):
        depth[index == i] = b.distance_m
    if scene.texture_amp_m > 0:
        rng = np.random.default_rng([scene.texture_seed, scene.height, scene.width])
        depth = depth + rng.uniform(
            -scene.texture_amp_m, scene.texture_amp_m, size=depth.shape
        )
    return depth


def random_scenes(
    camera_id: str,
    n_frames: int,
    seed: int,
    height: int = 96,
    width: int = 128,
    interval_s: float = 2.0,
    max_animals: int = 3,
) -> tuple[SceneSpec, ...]:
    """Generate frames with 0 to max_animals non-overlapping blobs each.

    Frame k draws from its own stream (seed, k), so regenerating any
    prefix of the sequence reproduces it byte for byte.
    """
    if n_frames < 0:
        raise ValueError(f"n_frames must be >= 0, got {n_frames}")
    scenes = []
    for k in range(n_frames):
        rng = np.random.default_rng([seed, k])
        blobs: list[Blob] = []
        for _ in range(int(rng.integers(0, max_animals + 1))):
            for _attempt in range(50):
                rx = float(rng.uniform(0.03, 0.12))
                ry = float(rng.uniform(0.03, 0.12))
                cx = float(rng.uniform(EDGE_MARGIN + rx, 1.0 - EDGE_MARGIN - rx))
                cy = float(rng.uniform(EDGE_MARGIN + ry, 1.0 - EDGE_MARGIN - ry))
                if all(
                    (cx - b.cx) ** 2 + (cy - b.cy) ** 2
                    > (rx + b.rx) ** 2 + (ry + b.ry) ** 2
                    for b in blobs
                ):
                    blobs.append(
                        Blob(
                            cx=cx,
                            cy=cy,
                            rx=rx,
                            ry=ry,
                            distance_m=float(rng.uniform(1.0, 14.0)),
                            confidence=round(float(rng.uniform(0.55, 0.99)), 4),
                        )
                    )
                    break
        scenes.append(
            SceneSpec(
                frame_id=f"{camera_id}_f{k:04d}",
                camera_id=camera_id,
                timestamp_s=k * interval_s,
                height=height,
                width=width,
                blobs=tuple(blobs),
                texture_seed=seed * 100003 + k,
            )
        )
    return tuple(scenes)


def reference_scene(
    camera_id: str,
    frame_id: str,
    distance_m: float,
    seed: int,
    height: int = 96,
    width: int = 128,
) -> SceneSpec:
    """One staged frame: the surveyor standing at a known distance."""
    rng = np.random.default_rng([seed, int(round(distance_m * 1000))])
    person = Blob(
        cx=float(rng.uniform(0.35, 0.65)),
        cy=0.55,
        rx=0.08,
        ry=0.30,
        distance_m=distance_m,
        confidence=0.99,
        is_person=True,
    )
    return SceneSpec(
        frame_id=frame_id,
        camera_id=camera_id,
        timestamp_s=0.0,
        height=height,
        width=width,
        blobs=(person,),
        texture_seed=seed * 100003 + int(round(distance_m * 1000)),
    )
