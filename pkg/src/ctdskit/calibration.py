"""Per-camera conversion of raw model depth to metric metres.

A camera's reference samples (raw depth at markers of known distance) are
averaged at duplicate raw values, forced monotone by pool-adjacent-violators
regression, and evaluated piecewise-linearly. Optionally a per-frame scale
and shift aligns the observation depth map to the camera's reference depth
map before the curve is applied.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRawDepthError,
    DegenerateVarianceError,
    DimensionMismatchError,
    InsufficientPixelsError,
    MissingCurveError,
    TooFewSamplesError,
)
from .types import DepthMap, DepthUnit, InstanceMask, ReferenceSample

MIN_ALIGNMENT_PIXELS = 16
DEFAULT_TRIM_FRAC = 0.1


class Extrapolation(enum.Enum):
    CLAMP = "clamp"
    LINEAR_EXTEND = "linear_extend"


class DepthMode(enum.Enum):
    DIRECT = "direct"          # raw values are already metres; re-tag only
    CALIBRATED = "calibrated"  # apply curve (and optional alignment)


@dataclass(frozen=True)
class CalibrationCurve:
    """Monotone piecewise-linear map from raw depth to metres."""

    camera_id: str
    knots: tuple[tuple[float, float], ...]
    extrapolation_mode: Extrapolation = Extrapolation.CLAMP

    def __post_init__(self) -> None:
        knots = tuple((float(r), float(m)) for r, m in self.knots)
        if len(knots) < 2:
            raise ValueError(f"curve needs at least 2 knots, got {len(knots)}")
        raws = [r for r, _ in knots]
        mets = [m for _, m in knots]
        if any(b <= a for a, b in zip(raws, raws[1:])):
            raise ValueError("knot raw_depth values must be strictly increasing")
        if any(b < a for a, b in zip(mets, mets[1:])):
            raise ValueError("knot metric values must be non-decreasing")
        if any(not math.isfinite(v) for v in raws + mets):
            raise ValueError("knots must be finite")
        object.__setattr__(self, "knots", knots)

    def __call__(self, raw: np.ndarray | float) -> np.ndarray | float:
        xs = np.array([r for r, _ in self.knots])
        ys = np.array([m for _, m in self.knots])
        x = np.asarray(raw, dtype=np.float64)
        out = np.interp(x, xs, ys)  # clamps at the end knots
        if self.extrapolation_mode is Extrapolation.LINEAR_EXTEND:
            lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out = np.where(x < xs[0], ys[0] + (x - xs[0]) * lo_slope, out)
            out = np.where(x > xs[-1], ys[-1] + (x - xs[-1]) * hi_slope, out)
            # Extended depth below zero has no physical reading.
            out = np.maximum(out, 0.0)
        if np.ndim(raw) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class ScaleShift:
    """Affine alignment raw -> s*raw + t in raw-depth units."""

    s: float
    t: float
    inlier_fraction: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise ValueError(f"scale/shift must be finite, got s={self.s}, t={self.t}")
        if not (0.0 <= self.inlier_fraction <= 1.0):
            raise ValueError(f"inlier_fraction={self.inlier_fraction} outside [0, 1]")


IDENTITY_ALIGNMENT = ScaleShift(s=1.0, t=0.0)


def _pava_non_decreasing(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators fit, non-decreasing."""
    levels: list[list[float]] = []  # [value, weight, run length]
    for yi, wi in zip(y, w):
        levels.append([float(yi), float(wi), 1])
        while len(levels) > 1 and levels[-2][0] > levels[-1][0]:
            v2, w2, c2 = levels.pop()
            v1, w1, c1 = levels.pop()
            wt = w1 + w2
            levels.append([(v1 * w1 + v2 * w2) / wt, wt, c1 + c2])
    out = np.empty(len(y), dtype=np.float64)
    i = 0
    for value, _, count in levels:
        out[i : i + count] = value
        i += count
    return out


def fit_reference_curve(
    samples: list[ReferenceSample],
    extrapolation_mode: Extrapolation = Extrapolation.CLAMP,
) -> CalibrationCurve:
    """Fit one camera's monotone raw-to-metric curve from its references.

    Duplicate raw-depth readings are averaged first; the averaged points,
    ordered by raw depth, are then forced non-decreasing in metres by
    pool-adjacent-violators (duplicates weight their pooled mean).
    """
    if not samples:
        raise TooFewSamplesError("no reference samples supplied")
    camera_ids = {s.camera_id for s in samples}
    if len(camera_ids) != 1:
        raise ValueError(f"samples span multiple cameras: {sorted(camera_ids)}")
    camera_id = samples[0].camera_id
    if len(samples) < 2:
        raise TooFewSamplesError(
            f"camera {camera_id}: need at least 2 reference samples, got {len(samples)}"
        )
    by_raw: dict[float, list[float]] = {}
    for s in samples:
        by_raw.setdefault(float(s.raw_depth), []).append(float(s.known_distance_m))
    if len(by_raw) < 2:
        raise DegenerateRawDepthError(
            f"camera {camera_id}: raw_depth has zero spread across samples"
        )
    raws = np.array(sorted(by_raw))
    means = np.array([float(np.mean(by_raw[r])) for r in raws])
    weights = np.array([float(len(by_raw[r])) for r in raws])
    fitted = _pava_non_decreasing(means, weights)
    knots = tuple(zip(raws.tolist(), fitted.tolist()))
    return CalibrationCurve(
        camera_id=camera_id, knots=knots, extrapolation_mode=extrapolation_mode
    )


def _ols(obs: np.ndarray, ref: np.ndarray) -> tuple[float, float]:
    mx = float(np.mean(obs))
    my = float(np.mean(ref))
    var = float(np.mean((obs - mx) ** 2))
    if var == 0.0:
        raise DegenerateVarianceError(
            "observation depth has zero variance over retained pixels"
        )
    s = float(np.mean((obs - mx) * (ref - my))) / var
    return s, my - s * mx


def align_scale_shift(
    obs: DepthMap,
    ref: DepthMap,
    exclude: InstanceMask | None = None,
    trim_frac: float = DEFAULT_TRIM_FRAC,
) -> ScaleShift:
    """Least-squares (s, t) with s*obs + t approximating ref.

    Excluded pixels (the animal mask) never enter the fit. With a positive
    ``trim_frac`` an initial untrimmed fit ranks pixels by absolute
    residual and the largest ``floor(trim_frac * n)`` are dropped for one
    re-fit pass.
    """
    if not (0.0 <= trim_frac < 0.5):
        raise ValueError(f"trim_frac={trim_frac} outside [0, 0.5)")
    if obs.values.shape != ref.values.shape:
        raise DimensionMismatchError(
            f"obs {obs.values.shape} and ref {ref.values.shape} differ in size"
        )
    keep = np.ones(obs.values.shape, dtype=bool)
    if exclude is not None:
        if exclude.bits.shape != obs.values.shape:
            raise DimensionMismatchError(
                f"mask {exclude.bits.shape} and depth {obs.values.shape} differ in size"
            )
        keep &= ~exclude.bits
    x = obs.values[keep].astype(np.float64)
    y = ref.values[keep].astype(np.float64)
    n = x.size
    if n < MIN_ALIGNMENT_PIXELS:
        raise InsufficientPixelsError(
            f"only {n} non-excluded pixels, need at least {MIN_ALIGNMENT_PIXELS}"
        )
    s, t = _ols(x, y)
    k = math.floor(trim_frac * n)
    if k == 0:
        return ScaleShift(s=s, t=t, inlier_fraction=1.0)
    residuals = np.abs(s * x + t - y)
    order = np.argsort(residuals, kind="stable")
    kept = order[: n - k]
    s, t = _ols(x[kept], y[kept])
    return ScaleShift(s=s, t=t, inlier_fraction=(n - k) / n)


def metric_depth(
    depth: DepthMap,
    mode: DepthMode,
    curve: CalibrationCurve | None = None,
    alignment: ScaleShift | None = None,
) -> DepthMap:
    """Produce a metric depth map.

    Direct re-tags the raw values as metres (for depth models that already
    emit metric output). Calibrated maps each pixel through
    ``curve(s*v + t)``; alignment defaults to the identity when no
    reference depth map was available for the frame.
    """
    if mode is DepthMode.DIRECT:
        return DepthMap(values=depth.values, unit=DepthUnit.METRIC)
    if curve is None:
        raise MissingCurveError("calibrated mode requires a calibration curve")
    a = alignment or IDENTITY_ALIGNMENT
    aligned = a.s * depth.values.astype(np.float64) + a.t
    metric = curve(aligned)
    return DepthMap(values=np.asarray(metric, dtype=np.float32), unit=DepthUnit.METRIC)
