"""Animal-to-camera distance extraction from metric depth maps.

Two strategies: the 20th percentile of depth inside a detector box (robust
to background pixels bleeding into the box), and the depth at the geometric
centre of an instance mask.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllPixelsZeroError,
    DimensionMismatchError,
    EmptyBoxError,
    EmptyMaskError,
    MissingMaskError,
)
from .types import (
    DepthMap,
    DepthUnit,
    Detection,
    InstanceMask,
    Observation,
    ObservationSource,
)

BBOX_PERCENTILE = 20.0


class Strategy(enum.Enum):
    BBOX_P20 = "bbox_p20"
    SEG_CENTRE = "seg_centre"


@dataclass(frozen=True)
class DistanceEstimate:
    frame_id: str
    camera_id: str
    strategy: Strategy
    distance_m: float
    n_pixels_used: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.distance_m) and self.distance_m > 0):
            raise ValueError(
                f"distance_m={self.distance_m} must be positive and finite"
            )
        if self.n_pixels_used < 1:
            raise ValueError("n_pixels_used must be at least 1")


def _require_metric(depth: DepthMap) -> None:
    if depth.unit is not DepthUnit.METRIC:
        raise ValueError("distance extraction requires a metric depth map")


def distance_bbox(
    depth: DepthMap, box: Detection, camera_id: str = ""
) -> DistanceEstimate:
    """20th percentile of in-box depth, holes (zero pixels) excluded.

    The percentile interpolates linearly between closest ranks: with the
    n kept values sorted, rank h = 0.2*(n-1)+1 and the result blends the
    values at ranks floor(h) and floor(h)+1.
    """
    _require_metric(depth)
    x0, y0, x1, y1 = box.pixel_box(depth.width, depth.height)
    if x1 <= x0 or y1 <= y0:
        raise EmptyBoxError(
            f"frame {box.frame_id}: box covers no pixels after rasterization"
        )
    patch = depth.values[y0:y1, x0:x1]
    kept = patch[patch > 0]
    if kept.size == 0:
        raise AllPixelsZeroError(
            f"frame {box.frame_id}: every in-box depth pixel is a hole"
        )
    dist = float(np.percentile(kept.astype(np.float64), BBOX_PERCENTILE))
    return DistanceEstimate(
        frame_id=box.frame_id,
        camera_id=camera_id,
        strategy=Strategy.BBOX_P20,
        distance_m=dist,
        n_pixels_used=int(kept.size),
    )


def mask_centre_pixel(mask: InstanceMask) -> tuple[int, int]:
    """Member pixel closest to the mask's geometric centre.

    The centroid (mean member row, mean member column) is rounded half-up
    to a pixel; when that pixel falls outside the mask (concave shapes) the
    member pixel nearest in Euclidean distance wins, ties broken by the
    smallest row then the smallest column.
    """
    if mask.is_empty:
        raise EmptyMaskError("mask has no member pixels")
    rows, cols = np.nonzero(mask.bits)
    r0 = int(math.floor(float(np.mean(rows)) + 0.5))
    c0 = int(math.floor(float(np.mean(cols)) + 0.5))
    if mask.bits[r0, c0]:
        return r0, c0
    d2 = (rows - r0) ** 2 + (cols - c0) ** 2
    best = np.lexsort((cols, rows, d2))[0]
    return int(rows[best]), int(cols[best])


def distance_seg(
    depth: DepthMap,
    mask: InstanceMask,
    frame_id: str = "",
    camera_id: str = "",
) -> DistanceEstimate:
    """Depth at the member pixel closest to the mask centre."""
    _require_metric(depth)
    if mask.bits.shape != depth.values.shape:
        raise DimensionMismatchError(
            f"mask {mask.bits.shape} and depth {depth.values.shape} differ in size"
        )
    r, c = mask_centre_pixel(mask)
    value = float(depth.values[r, c])
    if value <= 0:
        raise AllPixelsZeroError(
            f"frame {frame_id}: depth hole at mask centre pixel ({r}, {c})"
        )
    return DistanceEstimate(
        frame_id=frame_id,
        camera_id=camera_id,
        strategy=Strategy.SEG_CENTRE,
        distance_m=value,
        n_pixels_used=1,
    )


@dataclass(frozen=True)
class FrameArtifacts:
    """Everything known about one frame before distance extraction.

    ``masks`` aligns by index with ``detections``; entries may be None when
    no mask exists for that detection (an error only under SegCentre).
    """

    frame_id: str
    camera_id: str
    timestamp_s: float
    depth: DepthMap
    detections: tuple[Detection, ...] = ()
    masks: tuple[InstanceMask | None, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "detections", tuple(self.detections))
        object.__setattr__(self, "masks", tuple(self.masks))


def estimate_frame_distances(
    frame: FrameArtifacts, strategy: Strategy, min_conf: float = 0.0
) -> list[DistanceEstimate]:
    """One estimate per retained detection, in detection order."""
    out = []
    for i, det in enumerate(frame.detections):
        if det.confidence < min_conf:
            continue
        if strategy is Strategy.BBOX_P20:
            out.append(distance_bbox(frame.depth, det, camera_id=frame.camera_id))
        else:
            mask = frame.masks[i] if i < len(frame.masks) else None
            if mask is None:
                raise MissingMaskError(
                    f"frame {frame.frame_id}: detection {i} has no instance mask"
                )
            out.append(
                distance_seg(
                    frame.depth,
                    mask,
                    frame_id=frame.frame_id,
                    camera_id=frame.camera_id,
                )
            )
    return out


def process_frame(
    frame: FrameArtifacts, strategy: Strategy, min_conf: float = 0.0
) -> list[Observation]:
    """Distance estimates wrapped as model-sourced observations.

    Estimates beyond the survey truncation radius are kept; truncation is
    an analysis decision made downstream.
    """
    return [
        Observation(
            camera_id=frame.camera_id,
            timestamp_s=frame.timestamp_s,
            distance_m=est.distance_m,
            source=ObservationSource.MODEL,
        )
        for est in estimate_frame_distances(frame, strategy, min_conf)
    ]
