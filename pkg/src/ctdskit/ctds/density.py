"""Density and abundance estimation from fitted detection functions.

The point-transect estimator: D̂ = n / (pi * w_km^2 * P̂ * E * availability)
with temporal effort E summed over cameras in snapshot moments. Analytic
uncertainty combines the between-camera encounter-rate variance with the
delta-method variance of P̂ on the log scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import MissingCameraError, ZeroEffortError
from ..types import Camera, Observation, SurveyConfig
from .fit import FittedDetectionModel

_Z_975 = 1.959963984540054


def effort(camera: Camera, snapshot_interval_s: float) -> float:
    """Snapshot-moment effort e_k = theta * T / (2 pi t).

    One unit is a single full-circle snapshot; a camera watching a wedge
    accrues the wedge's fraction of a unit per interval.
    """
    if snapshot_interval_s <= 0:
        raise ValueError("snapshot_interval_s must be positive")
    return camera.fov_rad * camera.operation_time_s / (
        2.0 * math.pi * snapshot_interval_s
    )


@dataclass(frozen=True)
class DensityResult:
    """Point estimate with analytic (delta-method, log-normal CI) spread.

    When no observations survive truncation the estimate is a flagged zero
    with undefined spread (NaN), not an error: an empty survey is a valid
    outcome. With a single camera the encounter-rate variance is undefined
    and the spread is NaN as well.
    """

    d_hat: float
    se: float
    cv: float
    lci: float
    uci: float
    p_hat: float
    p_se: float
    total_effort: float
    n_obs: int
    n_cameras: int
    area_km2: float | None = None
    zero_observations: bool = False

    @property
    def n_hat(self) -> float | None:
        return None if self.area_km2 is None else self.d_hat * self.area_km2

    @property
    def abundance_interval(self) -> tuple[float, float, float] | None:
        """(lci, uci, se) for N̂; area is treated as a known constant."""
        if self.area_km2 is None:
            return None
        return (
            self.lci * self.area_km2,
            self.uci * self.area_km2,
            self.se * self.area_km2,
        )


def estimate_abundance(d_hat: float, area_km2: float) -> float:
    if area_km2 <= 0:
        raise ValueError(f"area_km2={area_km2} must be positive")
    if d_hat < 0:
        raise ValueError(f"d_hat={d_hat} must be non-negative")
    return d_hat * area_km2


def _encounter_rate_variance(
    counts: np.ndarray, efforts: np.ndarray
) -> float:
    """Between-camera empirical variance of the encounter rate n/E.

    The R2-style estimator weights each camera's squared rate deviation by
    its squared effort. Undefined (NaN) for a single camera.
    """
    k = counts.size
    if k < 2:
        return float("nan")
    total_effort = float(np.sum(efforts))
    er = float(np.sum(counts)) / total_effort
    dev = counts / efforts - er
    return float(
        k / ((k - 1) * total_effort**2) * np.sum(efforts**2 * dev**2)
    )


def estimate_density(
    observations: Iterable[Observation],
    cameras: Sequence[Camera],
    fitted: FittedDetectionModel,
    config: SurveyConfig,
) -> DensityResult:
    """Animals per square kilometre from truncated observations.

    Observations outside the binned range (beyond w, or at or below the
    left truncation point) are dropped here; every observation must name a
    known camera. Zero effort (no cameras) is an error, zero observations
    is a flagged zero estimate.
    """
    cams = list(cameras)
    if not cams:
        raise ZeroEffortError("no cameras supplied")
    by_id = {c.camera_id: c for c in cams}
    lo = config.cutpoints_m[0]
    w = config.w_m
    counts = {c.camera_id: 0 for c in cams}
    for obs in observations:
        if obs.camera_id not in by_id:
            raise MissingCameraError(
                f"observation at unknown camera {obs.camera_id!r}"
            )
        if lo < obs.distance_m <= w:
            counts[obs.camera_id] += 1

    efforts = np.array(
        [effort(c, config.snapshot_interval_s) for c in cams], dtype=np.float64
    )
    total_effort = float(np.sum(efforts))
    if total_effort <= 0:
        raise ZeroEffortError("total effort is zero")
    n_vec = np.array([counts[c.camera_id] for c in cams], dtype=np.float64)
    n = int(n_vec.sum())
    w_km = w / 1000.0
    denom = math.pi * w_km**2 * fitted.p_hat * total_effort * config.availability

    if n == 0:
        return DensityResult(
            d_hat=0.0,
            se=float("nan"),
            cv=float("nan"),
            lci=0.0,
            uci=0.0,
            p_hat=fitted.p_hat,
            p_se=fitted.p_se,
            total_effort=total_effort,
            n_obs=0,
            n_cameras=len(cams),
            area_km2=config.area_km2,
            zero_observations=True,
        )

    d_hat = n / denom
    er = n / total_effort
    var_er = _encounter_rate_variance(n_vec, efforts)
    cv_er2 = var_er / er**2
    cv_p2 = (fitted.p_se / fitted.p_hat) ** 2
    cv2 = cv_er2 + cv_p2
    if math.isfinite(cv2) and cv2 >= 0:
        cv = math.sqrt(cv2)
        se = d_hat * cv
        c = math.exp(_Z_975 * math.sqrt(math.log1p(cv2)))
        lci, uci = d_hat / c, d_hat * c
    else:
        cv = se = lci = uci = float("nan")
    return DensityResult(
        d_hat=d_hat,
        se=se,
        cv=cv,
        lci=lci,
        uci=uci,
        p_hat=fitted.p_hat,
        p_se=fitted.p_se,
        total_effort=total_effort,
        n_obs=n,
        n_cameras=len(cams),
        area_km2=config.area_km2,
        zero_observations=False,
    )
