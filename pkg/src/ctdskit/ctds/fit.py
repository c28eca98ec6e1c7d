"""Maximum-likelihood fitting and QAIC model selection on binned distances.

The multinomial log-likelihood is maximized over transformed parameters
(log sigma, log b, unconstrained cosine coefficients) with a derivative-free
simplex search from five deterministic starting scales. Selection is the
two-step procedure: QAIC within each key family (overdispersion ĉ taken
from the family's most-parameterized member), then the Pearson chi-square
ratio across family winners.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from ..errors import (
    AllFamiliesInfeasibleError,
    InsufficientDataError,
    NoFeasibleOptimumError,
    QuadratureFailureError,
)
from . import quadrature
from .detection_function import (
    DetectionFunctionSpec,
    DetectionModel,
    Key,
    bin_probabilities,
    estimate_P,
    is_feasible,
)

SIMPLEX_XATOL = 1e-8
SIMPLEX_MAX_EVALS = 10000
#: Multistart scales for sigma, as fractions of the truncation distance.
SIGMA_START_FACTORS = (0.125, 0.25, 0.5, 1.0, 2.0)
HAZARD_B_START = 2.0
#: sigma outside [w/80, 20w] marks a boundary (degenerate-data) optimum.
SIGMA_BOUNDARY_LO = 1.0 / 80.0
SIGMA_BOUNDARY_HI = 20.0
_HESS_STEP = 1e-4

DEFAULT_CANDIDATES: tuple[DetectionFunctionSpec, ...] = (
    DetectionFunctionSpec(key=Key.UNIFORM, cosine_adjustment_orders=(1,)),
    DetectionFunctionSpec(key=Key.UNIFORM, cosine_adjustment_orders=(1, 2)),
    DetectionFunctionSpec(key=Key.HALF_NORMAL),
    DetectionFunctionSpec(key=Key.HALF_NORMAL, cosine_adjustment_orders=(2,)),
    DetectionFunctionSpec(key=Key.HAZARD_RATE),
    DetectionFunctionSpec(key=Key.HAZARD_RATE, cosine_adjustment_orders=(2,)),
)


@dataclass(frozen=True)
class BinnedDistances:
    """Counts of observed radial distances per bin.

    Bins are the half-open intervals (c_{j-1}, c_j]; distances at or below
    the first cutpoint or beyond the last are outside the binned range.
    """

    cutpoints_m: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        cuts = tuple(float(c) for c in self.cutpoints_m)
        counts = tuple(int(n) for n in self.counts)
        if len(cuts) < 2:
            raise ValueError("need at least two cutpoints")
        if cuts[0] < 0:
            raise ValueError("cutpoints must be non-negative")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError(f"cutpoints must be strictly increasing: {cuts}")
        if len(counts) != len(cuts) - 1:
            raise ValueError(
                f"{len(cuts)} cutpoints require {len(cuts) - 1} counts, got {len(counts)}"
            )
        if any(n < 0 for n in counts):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "cutpoints_m", cuts)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def w_m(self) -> float:
        return self.cutpoints_m[-1]

    @classmethod
    def from_distances(
        cls, distances_m: Iterable[float], cutpoints_m: Sequence[float]
    ) -> "BinnedDistances":
        cuts = np.asarray(list(cutpoints_m), dtype=np.float64)
        r = np.asarray(list(distances_m), dtype=np.float64)
        idx = np.searchsorted(cuts, r, side="left") - 1
        idx = idx[(idx >= 0) & (idx < cuts.size - 1)]
        counts = np.bincount(idx, minlength=cuts.size - 1)
        return cls(cutpoints_m=tuple(cuts.tolist()), counts=tuple(counts.tolist()))


@dataclass(frozen=True)
class FittedDetectionModel:
    model: DetectionModel
    w_m: float
    loglik: float
    q: int
    p_hat: float
    p_se: float
    chat: float
    qaic: float
    gof_chi2: float
    gof_df: int
    n_obs: int
    pi_hat: tuple[float, ...]
    at_boundary: bool = False

    @property
    def spec(self) -> DetectionFunctionSpec:
        return self.model.spec


def _unpack(theta: np.ndarray, spec: DetectionFunctionSpec) -> DetectionModel:
    i = 0
    sigma = b = None
    if spec.key is not Key.UNIFORM:
        sigma = math.exp(theta[0])
        i = 1
        if spec.key is Key.HAZARD_RATE:
            b = math.exp(theta[1])
            i = 2
    return DetectionModel(
        spec=spec, sigma=sigma, b=b, adjustments=tuple(float(a) for a in theta[i:])
    )


def _neg_loglik(
    theta: np.ndarray,
    spec: DetectionFunctionSpec,
    edges: np.ndarray,
    counts: np.ndarray,
    w_m: float,
    tol: float,
) -> float:
    try:
        model = _unpack(theta, spec)
    except (ValueError, OverflowError):
        return np.inf
    if not is_feasible(model, w_m):
        return np.inf
    try:
        pis = bin_probabilities(model, edges, w_m, tol=tol)
    except QuadratureFailureError:
        return np.inf
    observed = counts > 0
    if np.any(pis[observed] <= 0):
        return np.inf
    return -float(np.sum(counts[observed] * np.log(pis[observed])))


def _starts(spec: DetectionFunctionSpec, w_m: float) -> list[np.ndarray]:
    adj0 = [0.0] * len(spec.cosine_adjustment_orders)
    if spec.key is Key.UNIFORM:
        return [np.array(adj0, dtype=np.float64)]
    out = []
    for factor in SIGMA_START_FACTORS:
        head = [math.log(factor * w_m)]
        if spec.key is Key.HAZARD_RATE:
            head.append(math.log(HAZARD_B_START))
        out.append(np.array(head + adj0, dtype=np.float64))
    return out


def _gof(counts: np.ndarray, pis: np.ndarray, q: int) -> tuple[float, int]:
    n = counts.sum()
    expected = n * pis
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (counts - expected) ** 2 / expected
    terms = np.where((expected == 0) & (counts == 0), 0.0, terms)
    chi2 = float(np.sum(terms))
    df = max(1, counts.size - 1 - q)
    return chi2, df


def _hessian(f, x: np.ndarray) -> np.ndarray:
    k = x.size
    h = _HESS_STEP * np.maximum(1.0, np.abs(x))
    hess = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return hess


def _p_standard_error(
    theta: np.ndarray,
    spec: DetectionFunctionSpec,
    edges: np.ndarray,
    counts: np.ndarray,
    w_m: float,
    tol: float,
) -> float:
    """Delta-method SE of P from the observed information matrix."""
    if theta.size == 0:
        return 0.0

    def nll(t: np.ndarray) -> float:
        return _neg_loglik(t, spec, edges, counts, w_m, tol)

    def p_of(t: np.ndarray) -> float:
        model = _unpack(t, spec)
        if not is_feasible(model, w_m):
            return np.nan
        return estimate_P(model, w_m, tol=tol)

    try:
        info = _hessian(nll, theta)
        grad = np.empty(theta.size)
        h = _HESS_STEP * np.maximum(1.0, np.abs(theta))
        for i in range(theta.size):
            ei = np.zeros(theta.size)
            ei[i] = h[i]
            grad[i] = (p_of(theta + ei) - p_of(theta - ei)) / (2.0 * h[i])
        if not (np.all(np.isfinite(info)) and np.all(np.isfinite(grad))):
            return float("nan")
        var = float(grad @ np.linalg.solve(info, grad))
    except np.linalg.LinAlgError:
        return float("nan")
    if not math.isfinite(var) or var < 0:
        return float("nan")
    return math.sqrt(var)


def fit_detection_function(
    binned: BinnedDistances,
    spec: DetectionFunctionSpec,
    w_m: float | None = None,
    tol: float = quadrature.DEFAULT_TOL,
) -> FittedDetectionModel:
    """Fit one detection-function spec to binned distances.

    The returned ĉ and QAIC use the model's own goodness of fit; model
    selection recomputes them family-wise.
    """
    w = float(w_m) if w_m is not None else binned.w_m
    counts = np.asarray(binned.counts, dtype=np.float64)
    edges = np.asarray(binned.cutpoints_m, dtype=np.float64)
    n = binned.n
    if n < spec.q + 1:
        raise InsufficientDataError(
            f"{spec.label()}: {n} observations cannot support q={spec.q} parameters"
        )

    best_theta: np.ndarray | None = None
    best_fun = np.inf
    for theta0 in _starts(spec, w):
        if theta0.size == 0:
            fun = _neg_loglik(theta0, spec, edges, counts, w, tol)
            theta, success = theta0, math.isfinite(fun)
        else:
            res = optimize.minimize(
                _neg_loglik,
                theta0,
                args=(spec, edges, counts, w, tol),
                method="Nelder-Mead",
                options={
                    "xatol": SIMPLEX_XATOL,
                    "fatol": np.inf,
                    "maxfev": SIMPLEX_MAX_EVALS,
                    "maxiter": SIMPLEX_MAX_EVALS,
                },
            )
            theta, fun = res.x, float(res.fun)
            success = math.isfinite(fun)
        if success and fun < best_fun:
            best_fun, best_theta = fun, theta
    if best_theta is None:
        raise NoFeasibleOptimumError(
            f"{spec.label()}: no feasible optimum from any starting point"
        )

    model = _unpack(best_theta, spec)
    pis = bin_probabilities(model, edges, w, tol=tol)
    loglik = -best_fun
    chi2, df = _gof(counts, pis, spec.q)
    chat = max(1.0, chi2 / df)
    qaic = -2.0 * loglik / chat + 2.0 * spec.q
    p_hat = estimate_P(model, w, tol=tol)
    p_se = _p_standard_error(best_theta, spec, edges, counts, w, tol)
    at_boundary = model.sigma is not None and not (
        SIGMA_BOUNDARY_LO * w <= model.sigma <= SIGMA_BOUNDARY_HI * w
    )
    return FittedDetectionModel(
        model=model,
        w_m=w,
        loglik=loglik,
        q=spec.q,
        p_hat=p_hat,
        p_se=p_se,
        chat=chat,
        qaic=qaic,
        gof_chi2=chi2,
        gof_df=df,
        n_obs=n,
        pi_hat=tuple(float(p) for p in pis),
        at_boundary=at_boundary,
    )


def chat_and_qaic(
    fitted: FittedDetectionModel, chat: float | None = None
) -> tuple[float, float]:
    """Overdispersion ĉ (clamped at 1) and the resulting QAIC.

    Pass the family-level ĉ to score a member against its family's
    most-parameterized model.
    """
    c = max(1.0, fitted.gof_chi2 / fitted.gof_df) if chat is None else max(1.0, chat)
    return c, -2.0 * fitted.loglik / c + 2.0 * fitted.q


def select_model(
    candidates: Sequence[DetectionFunctionSpec],
    binned: BinnedDistances,
    w_m: float | None = None,
    tol: float = quadrature.DEFAULT_TOL,
) -> FittedDetectionModel:
    """Two-step QAIC selection across key families.

    Within a family every member is scored with the family ĉ (from its
    most-parameterized fitted member) and the lowest QAIC wins; across
    family winners the lowest raw chi-square/df ratio wins. Ties prefer
    fewer parameters, then the canonical family order. Candidates that
    fail to fit are skipped.
    """
    if not candidates:
        raise ValueError("no candidate specs supplied")
    fits: list[tuple[int, FittedDetectionModel]] = []
    for i, spec in enumerate(candidates):
        try:
            fits.append((i, fit_detection_function(binned, spec, w_m=w_m, tol=tol)))
        except (NoFeasibleOptimumError, InsufficientDataError, QuadratureFailureError):
            continue
    if not fits:
        raise AllFamiliesInfeasibleError(
            f"none of the {len(candidates)} candidate models could be fitted"
        )

    winners: list[tuple[float, int, int, int, FittedDetectionModel]] = []
    for key in Key:
        family = [(i, f) for i, f in fits if f.spec.key is key]
        if not family:
            continue
        richest = max(family, key=lambda item: (item[1].q, -item[0]))[1]
        family_chat = max(1.0, richest.gof_chi2 / richest.gof_df)
        scored = []
        for i, f in family:
            _, qaic = chat_and_qaic(f, chat=family_chat)
            scored.append((qaic, f.q, i, dataclasses.replace(f, chat=family_chat, qaic=qaic)))
        scored.sort(key=lambda item: (item[0], item[1], item[2]))
        best = scored[0][3]
        winners.append(
            (best.gof_chi2 / best.gof_df, best.q, key.order, scored[0][2], best)
        )
    winners.sort(key=lambda item: (item[0], item[1], item[2]))
    return winners[0][4]
