"""Nonparametric bootstrap over cameras (the sampling units).

Each replicate resamples K cameras with replacement, carries their
observations and effort, and reruns model selection plus density
estimation from scratch. Replicate b draws from an independent, platform
stable stream seeded by (seed, b), so results are identical no matter how
many workers run or in what order replicates finish.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from ..errors import (
    AllFamiliesInfeasibleError,
    AllReplicatesFailedError,
    InsufficientDataError,
    NoFeasibleOptimumError,
    QuadratureFailureError,
)
from ..types import Camera, DistanceDataset, SurveyConfig
from . import quadrature
from .density import estimate_density
from .detection_function import DetectionFunctionSpec
from .fit import BinnedDistances, select_model


@dataclass(frozen=True)
class BootstrapSummary:
    replicates: int
    median: float
    lci: float
    uci: float
    se: float
    cv: float

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("summary needs at least one replicate")
        if not (self.lci <= self.median <= self.uci):
            raise ValueError(
                f"percentile order violated: {self.lci}, {self.median}, {self.uci}"
            )


@dataclass(frozen=True)
class BootstrapResult:
    density: BootstrapSummary
    abundance: BootstrapSummary | None
    b_requested: int
    n_failed: int
    d_replicates: tuple[float, ...]


def summarize_replicates(values: Sequence[float]) -> BootstrapSummary:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise AllReplicatesFailedError("no successful replicates to summarize")
    median = float(np.median(arr))
    lci, uci = (float(v) for v in np.percentile(arr, [2.5, 97.5]))
    se = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    cv = se / median if median != 0 else float("nan")
    return BootstrapSummary(
        replicates=int(arr.size), median=median, lci=lci, uci=uci, se=se, cv=cv
    )


def _resample(
    dataset: DistanceDataset, rng: np.random.Generator
) -> DistanceDataset:
    cams = dataset.cameras
    draws = rng.integers(0, len(cams), len(cams))
    obs_by_camera: dict[str, list] = {c.camera_id: [] for c in cams}
    for obs in dataset.observations:
        obs_by_camera[obs.camera_id].append(obs)
    new_cams = []
    new_obs = []
    for i, d in enumerate(draws):
        cam = cams[int(d)]
        # Duplicate draws keep distinct identities so per-camera counts and
        # efforts enter the estimator once per draw.
        pseudo_id = f"{cam.camera_id}#{i}"
        new_cams.append(
            Camera(
                camera_id=pseudo_id,
                fov_rad=cam.fov_rad,
                operation_time_s=cam.operation_time_s,
                location=cam.location,
            )
        )
        for obs in obs_by_camera[cam.camera_id]:
            new_obs.append(
                type(obs)(
                    camera_id=pseudo_id,
                    timestamp_s=obs.timestamp_s,
                    distance_m=obs.distance_m,
                    source=obs.source,
                )
            )
    return DistanceDataset(observations=tuple(new_obs), cameras=tuple(new_cams))


def _replicate_density(
    b: int,
    seed: int,
    dataset: DistanceDataset,
    candidates: tuple[DetectionFunctionSpec, ...],
    config: SurveyConfig,
    tol: float,
) -> float | None:
    """One replicate's D̂, or None when the refit fails."""
    rng = np.random.default_rng([seed, b])
    resampled = _resample(dataset, rng)
    lo, w = config.cutpoints_m[0], config.w_m
    retained = [
        o.distance_m for o in resampled.observations if lo < o.distance_m <= w
    ]
    if not retained:
        # A survey that saw nothing estimates zero density; that is a valid
        # replicate outcome, not a fitting failure.
        return 0.0
    binned = BinnedDistances.from_distances(retained, config.cutpoints_m)
    try:
        fitted = select_model(candidates, binned, w_m=w, tol=tol)
    except (
        AllFamiliesInfeasibleError,
        NoFeasibleOptimumError,
        InsufficientDataError,
        QuadratureFailureError,
    ):
        return None
    result = estimate_density(resampled.observations, resampled.cameras, fitted, config)
    return result.d_hat


def bootstrap(
    dataset: DistanceDataset,
    candidates: Sequence[DetectionFunctionSpec],
    config: SurveyConfig,
    b_replicates: int,
    seed: int,
    workers: int | None = None,
    tol: float = quadrature.DEFAULT_TOL,
) -> BootstrapResult:
    """Percentile bootstrap of density (and abundance when an area is set).

    Failed refits are dropped and counted; the summary covers successful
    replicates only. Raises when every replicate fails.
    """
    if b_replicates < 1:
        raise ValueError("b_replicates must be at least 1")
    if not dataset.cameras:
        raise ValueError("dataset has no cameras")
    run = partial(
        _replicate_density,
        seed=seed,
        dataset=dataset,
        candidates=tuple(candidates),
        config=config,
        tol=tol,
    )
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(run, range(b_replicates), chunksize=max(1, b_replicates // (4 * workers)))
            )
    else:
        outcomes = [run(b) for b in range(b_replicates)]
    values = [v for v in outcomes if v is not None]
    n_failed = b_replicates - len(values)
    if not values:
        raise AllReplicatesFailedError(
            f"all {b_replicates} bootstrap replicates failed to fit"
        )
    density = summarize_replicates(values)
    abundance = None
    if config.area_km2 is not None:
        abundance = summarize_replicates(
            [v * config.area_km2 for v in values]
        )
    return BootstrapResult(
        density=density,
        abundance=abundance,
        b_requested=b_replicates,
        n_failed=n_failed,
        d_replicates=tuple(values),
    )
