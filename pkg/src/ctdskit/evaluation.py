"""Distance-accuracy analysis: paired errors, 0.5 m grouping, slopes.

Model estimates are compared against manual readings frame by frame.
Frames with more than one reading on either side are excluded from the
join, so a pair always compares the same animal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateXError, EmptyInputError, EmptyJoinError

DEFAULT_BIN_STEP_M = 0.5
_SLACK = 1e-12


@dataclass(frozen=True)
class PairedDistances:
    """(manual_m, model_m) pairs for one configuration label."""

    pairs: tuple[tuple[float, float], ...]
    label: str = ""

    def __post_init__(self) -> None:
        pairs = tuple((float(a), float(b)) for a, b in self.pairs)
        for manual, model in pairs:
            if not (math.isfinite(manual) and manual > 0):
                raise ValueError(f"manual distance {manual} must be positive and finite")
            if not (math.isfinite(model) and model > 0):
                raise ValueError(f"model distance {model} must be positive and finite")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ErrorSummary:
    mae_m: float
    rmse_m: float
    delta_avg_m: float  # mean(model - manual); positive = overestimation
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if abs(self.delta_avg_m) > self.mae_m + _SLACK:
            raise ValueError("|delta_avg| exceeds MAE")
        if self.mae_m > self.rmse_m + _SLACK:
            raise ValueError("MAE exceeds RMSE")


def error_metrics(pairs: PairedDistances) -> ErrorSummary:
    if pairs.n == 0:
        raise EmptyInputError("no pairs to summarize")
    arr = np.asarray(pairs.pairs, dtype=np.float64)
    diff = arr[:, 1] - arr[:, 0]
    return ErrorSummary(
        mae_m=float(np.mean(np.abs(diff))),
        rmse_m=float(np.sqrt(np.mean(diff**2))),
        delta_avg_m=float(np.mean(diff)),
        n=pairs.n,
    )


def snap_to_bin(manual_m: float, step_m: float = DEFAULT_BIN_STEP_M) -> float:
    """Nearest multiple of step_m, ties rounding half up."""
    if step_m <= 0:
        raise ValueError("step_m must be positive")
    return math.floor(manual_m / step_m + 0.5) * step_m


def group_by_manual(
    pairs: PairedDistances, step_m: float = DEFAULT_BIN_STEP_M
) -> dict[float, PairedDistances]:
    """Pairs keyed by snapped manual distance; empty bins never appear."""
    groups: dict[float, list[tuple[float, float]]] = {}
    for manual, model in pairs.pairs:
        groups.setdefault(snap_to_bin(manual, step_m), []).append((manual, model))
    return {
        k: PairedDistances(pairs=tuple(groups[k]), label=pairs.label)
        for k in sorted(groups)
    }


@dataclass(frozen=True)
class BinStats:
    """Per-bin model-distance distribution for band plots."""

    bin_m: float
    n: int
    mean_model_m: float
    p5_m: float
    p25_m: float
    p75_m: float
    p95_m: float


def bin_statistics(
    pairs: PairedDistances, step_m: float = DEFAULT_BIN_STEP_M
) -> list[BinStats]:
    out = []
    for key, grp in group_by_manual(pairs, step_m).items():
        models = np.asarray([m for _, m in grp.pairs], dtype=np.float64)
        p5, p25, p75, p95 = np.percentile(models, [5, 25, 75, 95])
        out.append(
            BinStats(
                bin_m=key,
                n=grp.n,
                mean_model_m=float(np.mean(models)),
                p5_m=float(p5),
                p25_m=float(p25),
                p75_m=float(p75),
                p95_m=float(p95),
            )
        )
    return out


def regression_slope(
    bin_means: list[tuple[float, float]],
) -> tuple[float, float]:
    """Unweighted OLS of mean model distance on manual bin value.

    Returns (slope, intercept).
    """
    if len({x for x, _ in bin_means}) < 2:
        raise DegenerateXError(
            f"regression needs >= 2 distinct manual values, got {len(bin_means)} bin(s)"
        )
    arr = np.asarray(bin_means, dtype=np.float64)
    x, y = arr[:, 0], arr[:, 1]
    mx, my = float(np.mean(x)), float(np.mean(y))
    slope = float(np.sum((x - mx) * (y - my)) / np.sum((x - mx) ** 2))
    return slope, my - slope * mx


def binned_regression(
    pairs: PairedDistances, step_m: float = DEFAULT_BIN_STEP_M
) -> tuple[float, float]:
    """Slope and intercept over per-bin mean model distances."""
    stats = bin_statistics(pairs, step_m)
    return regression_slope([(s.bin_m, s.mean_model_m) for s in stats])


def error_by_distance(
    pairs: PairedDistances, step_m: float = DEFAULT_BIN_STEP_M
) -> list[tuple[float, ErrorSummary]]:
    return [
        (key, error_metrics(grp))
        for key, grp in group_by_manual(pairs, step_m).items()
    ]


@dataclass(frozen=True)
class JoinResult:
    pairs: PairedDistances
    n_manual_rows: int
    n_model_rows: int
    n_excluded_multi: int   # frames with >1 row on either side
    n_unmatched: int        # single-row frames present on one side only


def join_single_animal(
    manual_rows: list[tuple[str, float]],
    model_rows: list[tuple[str, float]],
    label: str = "",
) -> JoinResult:
    """Pair manual and model distances by frame id.

    A frame joins only when it has exactly one manual and exactly one model
    row; multi-animal frames cannot be paired without tracking and are
    counted instead. Pair order is (manual, model).
    """
    by_manual: dict[str, list[float]] = {}
    for fid, d in manual_rows:
        by_manual.setdefault(fid, []).append(d)
    by_model: dict[str, list[float]] = {}
    for fid, d in model_rows:
        by_model.setdefault(fid, []).append(d)
    pairs = []
    excluded = 0
    unmatched = 0
    for fid in sorted(set(by_manual) | set(by_model)):
        man = by_manual.get(fid, [])
        mod = by_model.get(fid, [])
        if len(man) > 1 or len(mod) > 1:
            excluded += 1
        elif len(man) == 1 and len(mod) == 1:
            pairs.append((man[0], mod[0]))
        else:
            unmatched += 1
    if not pairs:
        raise EmptyJoinError(
            f"no single-animal frames joined ({excluded} multi-animal, "
            f"{unmatched} unmatched)"
        )
    return JoinResult(
        pairs=PairedDistances(pairs=tuple(pairs), label=label),
        n_manual_rows=len(manual_rows),
        n_model_rows=len(model_rows),
        n_excluded_multi=excluded,
        n_unmatched=unmatched,
    )


def relative_difference(value: float, reference: float) -> float:
    """|value - reference| / |reference|."""
    if reference == 0:
        raise ValueError("reference must be nonzero")
    return abs(value - reference) / abs(reference)
