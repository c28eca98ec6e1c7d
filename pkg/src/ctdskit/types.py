"""Core value objects shared by every pipeline stage.

All types are immutable after construction (frozen dataclasses; embedded
numpy arrays are marked read-only), so they are safe to share between
concurrent workers. Constructors validate their invariants and raise
``ValueError`` with a descriptive message on violation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

#: Slack applied when checking that normalized boxes stay inside the frame.
BBOX_EPSILON = 1e-6

#: Reference footage convention: surveyor distances are recorded up to 15 m.
DEFAULT_MAX_REFERENCE_DISTANCE_M = 15.0


class DepthUnit(enum.Enum):
    RAW = "raw"          # model-native units, meaning varies per depth model
    METRIC = "metric"    # metres


class ObservationSource(enum.Enum):
    MANUAL = "manual"
    MODEL = "model"


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DepthMap:
    """Dense per-pixel depth for one frame.

    ``values`` is a row-major ``(height, width)`` float32 array with row 0
    at the top of the image. Values must be finite and non-negative; zero
    marks a hole in the depth prediction.
    """

    values: np.ndarray
    unit: DepthUnit = DepthUnit.RAW

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float32)
        if vals.ndim != 2:
            raise ValueError(f"depth values must be 2-D, got shape {vals.shape}")
        h, w = vals.shape
        if h < 1 or w < 1:
            raise ValueError(f"depth map must be at least 1x1, got {w}x{h}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("depth map contains non-finite values")
        if np.any(vals < 0):
            raise ValueError("depth map contains negative values")
        object.__setattr__(self, "values", _freeze(vals))
        if not isinstance(self.unit, DepthUnit):
            raise ValueError(f"unit must be a DepthUnit, got {self.unit!r}")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DepthMap):
            return NotImplemented
        return (
            self.unit is other.unit
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    def __hash__(self) -> int:  # frozen dataclass contract
        return hash((self.unit, self.values.shape, self.values.tobytes()))


@dataclass(frozen=True)
class Detection:
    """One detector hit: a normalized axis-aligned box plus confidence.

    The box is ``(x, y, w, h)`` with origin at the top-left of the frame and
    every coordinate normalized to [0, 1] (megadetector convention).
    """

    bbox: tuple[float, float, float, float]
    confidence: float
    frame_id: str

    def __post_init__(self) -> None:
        if len(self.bbox) != 4:
            raise ValueError(f"bbox must have 4 entries, got {len(self.bbox)}")
        x, y, w, h = (float(v) for v in self.bbox)
        eps = BBOX_EPSILON
        for name, v in zip("xywh", (x, y, w, h)):
            if not math.isfinite(v) or v < -eps or v > 1 + eps:
                raise ValueError(f"bbox {name}={v} outside [0, 1]")
        if w <= 0 or h <= 0:
            raise ValueError(f"bbox must have positive size, got w={w}, h={h}")
        if x + w > 1 + eps or y + h > 1 + eps:
            raise ValueError(
                f"bbox exceeds frame: x+w={x + w:.8f}, y+h={y + h:.8f}"
            )
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "bbox", (x, y, w, h))

    def pixel_box(self, width: int, height: int) -> tuple[int, int, int, int]:
        """Rasterize to half-open pixel bounds ``(x0, y0, x1, y1)``.

        Edges are rounded outward (floor on the min corner, ceil on the max
        corner) so a box never loses pixels it covers, then clipped to the
        frame.
        """
        x, y, w, h = self.bbox
        x0 = max(0, math.floor(x * width))
        y0 = max(0, math.floor(y * height))
        x1 = min(width, math.ceil((x + w) * width))
        y1 = min(height, math.ceil((y + h) * height))
        return x0, y0, x1, y1


@dataclass(frozen=True)
class InstanceMask:
    """Binary per-pixel membership for one animal instance.

    An all-zero mask is representable (parsers may produce one) but is not a
    valid instance for distance extraction; check ``is_empty``.
    """

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {bits.shape}")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")
        object.__setattr__(self, "bits", _freeze(bits.astype(bool)))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def is_empty(self) -> bool:
        return not bool(self.bits.any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InstanceMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))


@dataclass(frozen=True)
class ReferenceSample:
    """One reference reading: raw depth at a marker of known distance.

    ``max_distance_m`` caps the plausible marker distance (the survey
    convention stops at 15 m); override it for surveys with longer
    reference lines.
    """

    camera_id: str
    known_distance_m: float
    raw_depth: float
    ref_depth_map: DepthMap | None = None
    max_distance_m: float = DEFAULT_MAX_REFERENCE_DISTANCE_M

    def __post_init__(self) -> None:
        if not self.camera_id:
            raise ValueError("camera_id must be non-empty")
        d = self.known_distance_m
        if not math.isfinite(d) or d <= 0 or d > self.max_distance_m:
            raise ValueError(
                f"known_distance_m={d} outside (0, {self.max_distance_m}]"
            )
        if not math.isfinite(self.raw_depth) or self.raw_depth < 0:
            raise ValueError(f"raw_depth={self.raw_depth} must be finite and >= 0")


@dataclass(frozen=True)
class Camera:
    """Survey metadata for one camera location."""

    camera_id: str
    fov_rad: float
    operation_time_s: float
    location: str | None = None

    def __post_init__(self) -> None:
        if not self.camera_id:
            raise ValueError("camera_id must be non-empty")
        if not math.isfinite(self.fov_rad) or not (0 < self.fov_rad <= 2 * math.pi):
            raise ValueError(f"fov_rad={self.fov_rad} outside (0, 2*pi]")
        if not math.isfinite(self.operation_time_s) or self.operation_time_s <= 0:
            raise ValueError(
                f"operation_time_s={self.operation_time_s} must be positive"
            )


@dataclass(frozen=True)
class Observation:
    """One detected animal at a known camera, instant, and distance."""

    camera_id: str
    timestamp_s: float
    distance_m: float
    source: ObservationSource

    def __post_init__(self) -> None:
        if not self.camera_id:
            raise ValueError("camera_id must be non-empty")
        if not math.isfinite(self.timestamp_s) or self.timestamp_s < 0:
            raise ValueError(f"timestamp_s={self.timestamp_s} must be >= 0")
        if not math.isfinite(self.distance_m) or self.distance_m <= 0:
            raise ValueError(
                f"distance_m={self.distance_m} must be positive and finite"
            )
        if not isinstance(self.source, ObservationSource):
            raise ValueError(f"source must be an ObservationSource, got {self.source!r}")


def default_cutpoints(w_m: float = 15.0, n_bins: int = 15) -> tuple[float, ...]:
    """Evenly spaced distance-bin edges from 0 to the truncation radius."""
    if w_m <= 0 or n_bins < 1:
        raise ValueError("w_m must be positive and n_bins >= 1")
    return tuple(np.linspace(0.0, float(w_m), n_bins + 1).tolist())


@dataclass(frozen=True)
class SurveyConfig:
    """Analysis settings shared by binning, density, and simulation.

    ``cutpoints_m`` lists the full set of bin edges including the left
    truncation point (0 unless left-truncating) and must end at ``w_m``.
    ``availability`` is the fraction of time animals are detectable and
    divides the snapshot-level density estimate.
    """

    w_m: float = 15.0
    cutpoints_m: tuple[float, ...] = field(default_factory=default_cutpoints)
    snapshot_interval_s: float = 2.0
    availability: float = 1.0
    area_km2: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.w_m) or self.w_m <= 0:
            raise ValueError(f"w_m={self.w_m} must be positive")
        cuts = tuple(float(c) for c in self.cutpoints_m)
        if len(cuts) < 2:
            raise ValueError("cutpoints_m needs at least two edges")
        if cuts[0] < 0:
            raise ValueError("cutpoints_m must start at or above 0")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError(f"cutpoints_m must be strictly increasing: {cuts}")
        if cuts[-1] != self.w_m:
            raise ValueError(
                f"last cutpoint {cuts[-1]} must equal w_m={self.w_m}"
            )
        if not (self.snapshot_interval_s > 0):
            raise ValueError("snapshot_interval_s must be positive")
        if not (0 < self.availability <= 1):
            raise ValueError(f"availability={self.availability} outside (0, 1]")
        if self.area_km2 is not None and not (self.area_km2 > 0):
            raise ValueError(f"area_km2={self.area_km2} must be positive")
        object.__setattr__(self, "cutpoints_m", cuts)


@dataclass(frozen=True)
class DistanceDataset:
    """Observations plus the per-camera survey metadata they refer to."""

    observations: tuple[Observation, ...]
    cameras: tuple[Camera, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "cameras", tuple(self.cameras))
        ids = [c.camera_id for c in self.cameras]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate camera_id in dataset cameras")

    @property
    def camera_map(self) -> dict[str, Camera]:
        return {c.camera_id: c for c in self.cameras}
