"""Batch command line: calibrate, distances, eval, ctds, simulate.

Every command reads files, writes files, and reports diagnostics on
stderr; stdout is reserved for show-config. Outputs are deterministic
given (inputs, config, seed): rerunning a command produces byte-identical
files, whatever the worker count.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .calibration import (
    CalibrationCurve,
    DepthMode,
    Extrapolation,
    align_scale_shift,
    fit_reference_curve,
    metric_depth,
)
from .ctds import (
    BinnedDistances,
    DetectionFunctionSpec,
    Key,
    bootstrap,
    estimate_density,
    select_model,
)
from .distances import FrameArtifacts, Strategy, estimate_frame_distances
from .errors import (
    BadNumericError,
    CtdskitError,
    MissingColumnError,
    MissingCurveError,
    MissingInputError,
)
from .ingest import (
    load_manifest,
    parse_cameras_csv,
    parse_detections,
    parse_observations_csv,
    parse_references_csv,
    provenance_line,
    read_pfm,
    read_pgm_mask,
    write_cameras_csv,
    write_observations_csv,
    write_table,
)
from .simulate import TruthConfig, simulate_survey
from .types import (
    Camera,
    DistanceDataset,
    InstanceMask,
    ObservationSource,
    SurveyConfig,
)
from .ctds.detection_function import DetectionModel

DEFAULT_CONFIG: dict[str, Any] = {
    "w_m": 15.0,
    "cutpoints_m": [float(i) for i in range(16)],
    "snapshot_interval_s": 2.0,
    "availability": 1.0,
    "area_km2": None,
    "min_conf": 0.0,
    "strategy": "bbox_p20",
    "depth_mode": "direct",
    "align_frames": False,
    "trim_frac": 0.1,
    "extrapolation": "clamp",
    "bin_step_m": 0.5,
    "candidates": [
        {"key": "uniform", "cosine_orders": [1]},
        {"key": "uniform", "cosine_orders": [1, 2]},
        {"key": "half_normal", "cosine_orders": []},
        {"key": "half_normal", "cosine_orders": [2]},
        {"key": "hazard_rate", "cosine_orders": []},
        {"key": "hazard_rate", "cosine_orders": [2]},
    ],
    "b_replicates": 200,
    "seed": 1,
    "workers": None,
}

_STRATEGY_ALIASES = {
    "bbox": "bbox_p20",
    "bbox_p20": "bbox_p20",
    "seg": "seg_centre",
    "seg_centre": "seg_centre",
}


def merge_config(
    config_path: str | None, overrides: dict[str, Any]
) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags (flags win)."""
    cfg = dict(DEFAULT_CONFIG)
    explicit: set[str] = set()
    if config_path:
        p = Path(config_path)
        if not p.is_file():
            raise MissingInputError(f"config file not found: {p}")
        loaded = json.loads(p.read_text())
        if not isinstance(loaded, dict):
            raise BadNumericError(f"{p}: config must be an object")
        unknown = sorted(set(loaded) - set(DEFAULT_CONFIG))
        if unknown:
            raise BadNumericError(f"{p}: unknown config key(s): {', '.join(unknown)}")
        cfg.update(loaded)
        explicit |= set(loaded)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
            explicit.add(key)
    # A changed truncation radius shifts the default bins with it unless the
    # cutpoints were pinned explicitly.
    if "w_m" in explicit and "cutpoints_m" not in explicit:
        w = float(cfg["w_m"])
        n_bins = max(5, round(w))
        cfg["cutpoints_m"] = np.linspace(0.0, w, n_bins + 1).tolist()
    return cfg


def survey_config_from(cfg: dict[str, Any]) -> SurveyConfig:
    return SurveyConfig(
        w_m=float(cfg["w_m"]),
        cutpoints_m=tuple(float(c) for c in cfg["cutpoints_m"]),
        snapshot_interval_s=float(cfg["snapshot_interval_s"]),
        availability=float(cfg["availability"]),
        area_km2=None if cfg["area_km2"] is None else float(cfg["area_km2"]),
    )


def candidates_from(cfg: dict[str, Any]) -> tuple[DetectionFunctionSpec, ...]:
    out = []
    for entry in cfg["candidates"]:
        out.append(
            DetectionFunctionSpec(
                key=Key(entry["key"]),
                cosine_adjustment_orders=tuple(entry.get("cosine_orders", ())),
            )
        )
    return tuple(out)


def _provenance(cfg: dict[str, Any]) -> str:
    # workers is an execution knob, not an input: the same analysis on a
    # different machine must produce the same bytes, hash excluded.
    material = {k: v for k, v in cfg.items() if k != "workers"}
    return provenance_line(__version__, material, cfg.get("seed"))


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_distance_table(path: str | Path) -> list[tuple[str, float]]:
    """Generic (frame_id, distance_m) reader for eval inputs."""
    text = Path(path).read_text()
    lines = [
        ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise MissingColumnError(f"{path}: empty table, header row required")
    reader = csv.reader(lines)
    header = [c.strip() for c in next(reader)]
    for col in ("frame_id", "distance_m"):
        if col not in header:
            raise MissingColumnError(f"{path}: missing column {col}; got {header}")
    fid_i, dist_i = header.index("frame_id"), header.index("distance_m")
    out = []
    for row in reader:
        try:
            value = float(row[dist_i])
        except (ValueError, IndexError) as exc:
            raise BadNumericError(f"{path}: bad distance in row {row}") from exc
        if not math.isfinite(value):
            raise BadNumericError(f"{path}: non-finite distance in row {row}")
        out.append((row[fid_i].strip(), value))
    return out


def cmd_show_config(args: argparse.Namespace) -> int:
    cfg = merge_config(args.config, {})
    print(json.dumps(cfg, indent=2))
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = merge_config(args.config, {"extrapolation": args.extrapolation})
    manifest = load_manifest(args.manifest)
    if manifest.references_path is None:
        raise MissingInputError("manifest lists no references table")
    samples = parse_references_csv(manifest.references_path.read_text())
    by_camera: dict[str, list] = {}
    for s in samples:
        by_camera.setdefault(s.camera_id, []).append(s)
    mode = Extrapolation(cfg["extrapolation"])
    rows = []
    for camera_id in sorted(by_camera):
        curve = fit_reference_curve(by_camera[camera_id], extrapolation_mode=mode)
        for raw, metric in curve.knots:
            rows.append((camera_id, raw, metric))
        _note(f"camera {camera_id}: {len(curve.knots)} knots")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(
        out / "curves.csv",
        ("camera_id", "raw_depth", "metric_m"),
        rows,
        provenance=_provenance(cfg),
    )
    _note(f"calibrated {len(by_camera)} camera(s) -> {out / 'curves.csv'}")
    return 0


def read_curves_table(path: str | Path) -> dict[str, CalibrationCurve]:
    """Load the calibrate command's output back into curve objects."""
    text = Path(path).read_text()
    lines = [
        ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")
    ]
    reader = csv.reader(lines)
    header = [c.strip() for c in next(reader)]
    for col in ("camera_id", "raw_depth", "metric_m"):
        if col not in header:
            raise MissingColumnError(f"{path}: missing column {col}")
    ci, ri, mi = (header.index(c) for c in ("camera_id", "raw_depth", "metric_m"))
    knots: dict[str, list[tuple[float, float]]] = {}
    for row in reader:
        knots.setdefault(row[ci], []).append((float(row[ri]), float(row[mi])))
    return {
        cam: CalibrationCurve(camera_id=cam, knots=tuple(pts))
        for cam, pts in knots.items()
    }


def _union_mask(masks: Sequence[InstanceMask | None]) -> InstanceMask | None:
    bits = [m.bits for m in masks if m is not None]
    if not bits:
        return None
    return InstanceMask(bits=np.logical_or.reduce(bits))


def cmd_distances(args: argparse.Namespace) -> int:
    cfg = merge_config(
        args.config,
        {
            "strategy": _STRATEGY_ALIASES[args.strategy] if args.strategy else None,
            "depth_mode": args.depth_mode,
            "min_conf": args.min_conf,
            "align_frames": args.align_frames,
            "trim_frac": args.trim_frac,
        },
    )
    manifest = load_manifest(args.manifest)
    strategy = Strategy(cfg["strategy"])
    mode = DepthMode(cfg["depth_mode"])

    detections_by_frame: dict[str, list] = {}
    if manifest.detections_path is not None:
        for det in parse_detections(
            manifest.detections_path, min_confidence=float(cfg["min_conf"])
        ):
            detections_by_frame.setdefault(det.frame_id, []).append(det)

    curves: dict[str, CalibrationCurve] = {}
    if mode is DepthMode.CALIBRATED:
        if manifest.references_path is None:
            raise MissingInputError(
                "calibrated depth mode requires a references table in the manifest"
            )
        samples = parse_references_csv(manifest.references_path.read_text())
        by_camera: dict[str, list] = {}
        for s in samples:
            by_camera.setdefault(s.camera_id, []).append(s)
        ext = Extrapolation(cfg["extrapolation"])
        curves = {
            cam: fit_reference_curve(ss, extrapolation_mode=ext)
            for cam, ss in by_camera.items()
        }

    ref_depth_cache: dict[str, Any] = {}
    rows = []
    n_failed = 0
    frames = sorted(manifest.frames, key=lambda f: f.frame_id)
    for entry in frames:
        try:
            depth = read_pfm(entry.depth_path)
            masks = tuple(
                read_pgm_mask(p) if p is not None else None for p in entry.mask_paths
            )
            if mode is DepthMode.DIRECT:
                metric = metric_depth(depth, DepthMode.DIRECT)
            else:
                curve = curves.get(entry.camera_id)
                if curve is None:
                    raise MissingCurveError(
                        f"no calibration samples for camera {entry.camera_id}"
                    )
                alignment = None
                if cfg["align_frames"]:
                    ref_path = manifest.reference_depth_paths.get(entry.camera_id)
                    if ref_path is not None:
                        if entry.camera_id not in ref_depth_cache:
                            ref_depth_cache[entry.camera_id] = read_pfm(ref_path)
                        alignment = align_scale_shift(
                            depth,
                            ref_depth_cache[entry.camera_id],
                            exclude=_union_mask(masks),
                            trim_frac=float(cfg["trim_frac"]),
                        )
                metric = metric_depth(depth, DepthMode.CALIBRATED, curve, alignment)
            frame = FrameArtifacts(
                frame_id=entry.frame_id,
                camera_id=entry.camera_id,
                timestamp_s=entry.timestamp_s,
                depth=metric,
                detections=tuple(detections_by_frame.get(entry.frame_id, ())),
                masks=masks,
            )
            for est in estimate_frame_distances(frame, strategy):
                rows.append(
                    (
                        est.frame_id,
                        est.camera_id,
                        est.strategy.value,
                        est.distance_m,
                        est.n_pixels_used,
                    )
                )
        except CtdskitError as exc:
            n_failed += 1
            _note(f"frame {entry.frame_id}: {exc}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(
        out / "distances.csv",
        ("frame_id", "camera_id", "strategy", "distance_m", "n_pixels_used"),
        rows,
        provenance=_provenance(cfg),
    )
    _note(
        f"{len(rows)} estimate(s) from {len(frames)} frame(s), {n_failed} failed"
    )
    if frames and n_failed == len(frames):
        return 1
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import (
        bin_statistics,
        binned_regression,
        error_by_distance,
        error_metrics,
        join_single_animal,
    )

    cfg = merge_config(args.config, {"bin_step_m": args.step})
    step = float(cfg["bin_step_m"])
    manual = _read_distance_table(args.manual)
    model = _read_distance_table(args.model)
    join = join_single_animal(manual, model, label=args.label)
    summary = error_metrics(join.pairs)
    slope, intercept = binned_regression(join.pairs, step)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prov = _provenance(cfg)
    write_table(
        out / "summary.csv",
        (
            "label",
            "n_pairs",
            "mae_m",
            "rmse_m",
            "delta_avg_m",
            "slope",
            "intercept",
            "n_excluded_multi",
            "n_unmatched",
        ),
        [
            (
                args.label,
                summary.n,
                summary.mae_m,
                summary.rmse_m,
                summary.delta_avg_m,
                slope,
                intercept,
                join.n_excluded_multi,
                join.n_unmatched,
            )
        ],
        provenance=prov,
    )
    write_table(
        out / "bins.csv",
        ("bin_m", "n", "mean_model_m", "p5_m", "p25_m", "p75_m", "p95_m"),
        [
            (s.bin_m, s.n, s.mean_model_m, s.p5_m, s.p25_m, s.p75_m, s.p95_m)
            for s in bin_statistics(join.pairs, step)
        ],
        provenance=prov,
    )
    write_table(
        out / "errors_by_bin.csv",
        ("bin_m", "n", "mae_m", "rmse_m", "delta_avg_m"),
        [
            (b, e.n, e.mae_m, e.rmse_m, e.delta_avg_m)
            for b, e in error_by_distance(join.pairs, step)
        ],
        provenance=prov,
    )
    _note(
        f"joined {summary.n} pair(s); excluded {join.n_excluded_multi} "
        f"multi-animal frame(s), {join.n_unmatched} unmatched"
    )
    return 0


def cmd_ctds(args: argparse.Namespace) -> int:
    cfg = merge_config(
        args.config,
        {
            "w_m": args.w_m,
            "area_km2": args.area_km2,
            "availability": args.availability,
            "snapshot_interval_s": args.snapshot_interval,
            "b_replicates": args.b_replicates,
            "seed": args.seed,
            "workers": args.workers,
        },
    )
    survey = survey_config_from(cfg)
    candidates = candidates_from(cfg)
    observations = parse_observations_csv(Path(args.observations).read_text())
    cameras = parse_cameras_csv(Path(args.cameras).read_text())
    dataset = DistanceDataset(
        observations=tuple(observations), cameras=tuple(cameras)
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prov = _provenance(cfg)
    columns = ("quantity", "est", "lci", "uci", "se", "cv")
    nan = float("nan")

    lo, w = survey.cutpoints_m[0], survey.w_m
    retained = [o.distance_m for o in observations if lo < o.distance_m <= w]
    boot = bootstrap(
        dataset,
        candidates,
        survey,
        b_replicates=int(cfg["b_replicates"]),
        seed=int(cfg["seed"]),
        workers=cfg["workers"],
    )
    rows: list[tuple[Any, ...]] = []
    if not retained:
        _note("zero observations within the truncation range; density flagged zero")
        rows.append(("density", 0.0, 0.0, 0.0, nan, nan))
        d_boot = boot.density
        rows.append(
            ("density_bootstrap", d_boot.median, d_boot.lci, d_boot.uci, d_boot.se, d_boot.cv)
        )
        if survey.area_km2 is not None:
            rows.append(("abundance", 0.0, 0.0, 0.0, nan, nan))
            n_boot = boot.abundance
            rows.append(
                (
                    "abundance_bootstrap",
                    n_boot.median,
                    n_boot.lci,
                    n_boot.uci,
                    n_boot.se,
                    n_boot.cv,
                )
            )
        write_table(out / "results.csv", columns, rows, provenance=prov)
        return 0

    binned = BinnedDistances.from_distances(retained, survey.cutpoints_m)
    fitted = select_model(candidates, binned, w_m=survey.w_m)
    density = estimate_density(observations, cameras, fitted, survey)
    rows.append(
        ("density", density.d_hat, density.lci, density.uci, density.se, density.cv)
    )
    d_boot = boot.density
    rows.append(
        ("density_bootstrap", d_boot.median, d_boot.lci, d_boot.uci, d_boot.se, d_boot.cv)
    )
    if survey.area_km2 is not None:
        n_lci, n_uci, n_se = density.abundance_interval
        rows.append(("abundance", density.n_hat, n_lci, n_uci, n_se, density.cv))
        n_boot = boot.abundance
        rows.append(
            (
                "abundance_bootstrap",
                n_boot.median,
                n_boot.lci,
                n_boot.uci,
                n_boot.se,
                n_boot.cv,
            )
        )
    write_table(out / "results.csv", columns, rows, provenance=prov)
    model = fitted.model
    write_table(
        out / "model.csv",
        (
            "key",
            "cosine_orders",
            "sigma",
            "b",
            "adjustments",
            "loglik",
            "q",
            "p_hat",
            "p_se",
            "chat",
            "qaic",
            "gof_chi2",
            "gof_df",
            "n_obs",
            "at_boundary",
        ),
        [
            (
                model.spec.key.value,
                " ".join(str(j) for j in model.spec.cosine_adjustment_orders),
                "" if model.sigma is None else model.sigma,
                "" if model.b is None else model.b,
                " ".join(f"{a:.10g}" for a in model.adjustments),
                fitted.loglik,
                fitted.q,
                fitted.p_hat,
                fitted.p_se,
                fitted.chat,
                fitted.qaic,
                fitted.gof_chi2,
                fitted.gof_df,
                fitted.n_obs,
                fitted.at_boundary,
            )
        ],
        provenance=prov,
    )
    _note(
        f"selected {model.spec.label()}: n={fitted.n_obs}, P={fitted.p_hat:.4f}, "
        f"D={density.d_hat:.4f}/km^2, {boot.n_failed} bootstrap failure(s)"
    )
    return 0


def _truth_from_json(path: str | Path, seed_override: int | None) -> TruthConfig:
    doc = json.loads(Path(path).read_text())
    det = doc["detection"]
    spec = DetectionFunctionSpec(
        key=Key(det["key"]),
        cosine_adjustment_orders=tuple(det.get("cosine_orders", ())),
    )
    model = DetectionModel(
        spec=spec,
        sigma=det.get("sigma"),
        b=det.get("b"),
        adjustments=tuple(det.get("adjustments", ())),
    )
    cameras = tuple(
        Camera(
            camera_id=c["camera_id"],
            fov_rad=math.radians(float(c["fov_deg"])),
            operation_time_s=float(c["operation_time_days"]) * 86400.0,
        )
        for c in doc["cameras"]
    )
    return TruthConfig(
        true_density_km2=float(doc["true_density_km2"]),
        model=model,
        cameras=cameras,
        w_m=float(doc["w_m"]),
        snapshot_interval_s=float(doc.get("snapshot_interval_s", 2.0)),
        seed=int(doc["seed"] if seed_override is None else seed_override),
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    truth = _truth_from_json(args.truth, args.seed)
    dataset = simulate_survey(truth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    truth_doc = json.loads(Path(args.truth).read_text())
    prov = provenance_line(__version__, truth_doc, truth.seed)
    write_cameras_csv(out / "cameras.csv", dataset.cameras, provenance=prov)
    write_observations_csv(
        out / "observations.csv", dataset.observations, provenance=prov
    )
    _note(
        f"simulated {len(dataset.observations)} observation(s) across "
        f"{len(dataset.cameras)} camera(s)"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctdskit",
        description=(
            "Camera-trap distance sampling: depth calibration, distance "
            "extraction, accuracy evaluation, and density estimation."
        ),
    )
    parser.add_argument("--version", action="version", version=f"ctdskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("show-config", help="print the effective configuration")
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_show_config)

    p = sub.add_parser("calibrate", help="fit per-camera depth calibration curves")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument(
        "--extrapolation", choices=[e.value for e in Extrapolation], default=None
    )
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("distances", help="extract animal distances from depth maps")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--strategy", choices=sorted(_STRATEGY_ALIASES), default=None)
    p.add_argument(
        "--depth-mode", choices=[m.value for m in DepthMode], default=None
    )
    p.add_argument("--min-conf", type=float, default=None)
    p.add_argument(
        "--align", dest="align_frames", action="store_const", const=True, default=None,
        help="align each frame to the camera reference depth map",
    )
    p.add_argument(
        "--no-align", dest="align_frames", action="store_const", const=False
    )
    p.add_argument("--trim-frac", type=float, default=None)
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("eval", help="compare model distances against manual readings")
    p.add_argument("--model", required=True, help="model distance table")
    p.add_argument("--manual", required=True, help="manual distance table")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--step", type=float, default=None, help="grouping step in metres")
    p.add_argument("--label", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ctds", help="estimate density and abundance")
    p.add_argument("--observations", required=True)
    p.add_argument("--cameras", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--w-m", type=float, default=None, help="truncation distance (m)")
    p.add_argument("--area-km2", type=float, default=None)
    p.add_argument("--availability", type=float, default=None)
    p.add_argument("--snapshot-interval", type=float, default=None)
    p.add_argument("-B", "--b-replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_ctds)

    p = sub.add_parser("simulate", help="generate a synthetic survey")
    p.add_argument("--truth", required=True, help="truth config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CtdskitError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
