"""Command line for the exporter.

Two workflows, both deterministic for a fixed seed: synthetic-frames
writes per-frame depth maps, masks, a detections document, and a run
manifest; synthetic-reference writes the calibration reference table.
list-models shows the registered backend names per stage.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .backends import DEPTH_MODELS, DETECTORS, SEGMENTERS, FrameInput
from .errors import ExportError
from .export import (
    ExportManifest,
    export_frames,
    export_reference,
    synthetic_reference_inputs,
)
from .scene import random_scenes


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"size must look like 128x96, got {text!r}") from exc


def _distances(text: str) -> list[float]:
    try:
        out = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad distance list {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("distance list is empty")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctds-export",
        description="Export model outputs into the survey pipeline's file formats.",
    )
    parser.add_argument("--version", action="version", version=f"ctds-export {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    frames = sub.add_parser(
        "synthetic-frames", help="export deterministic synthetic frames (no weights)"
    )
    frames.add_argument("--out", required=True, help="output directory")
    frames.add_argument("--camera", default="cam00", help="camera id for all frames")
    frames.add_argument("--frames", type=int, default=3, help="number of frames")
    frames.add_argument("--seed", type=int, default=0)
    frames.add_argument("--size", type=_size, default=(128, 96), help="frame size WxH")
    frames.add_argument("--interval-s", type=float, default=2.0)
    frames.add_argument(
        "--depth-model",
        default="synthetic-metric",
        choices=sorted(DEPTH_MODELS),
    )
    frames.add_argument("--detector", default="synthetic", choices=sorted(DETECTORS))
    frames.add_argument("--segmenter", default="synthetic", choices=sorted(SEGMENTERS))
    frames.add_argument(
        "--min-conf", type=float, default=0.2, help="drop detections below this"
    )
    frames.add_argument("--prompt", default="box", choices=("box", "point"))

    ref = sub.add_parser(
        "synthetic-reference", help="export a synthetic calibration reference table"
    )
    ref.add_argument("--out", required=True)
    ref.add_argument("--camera", action="append", required=True, dest="cameras",
                     help="camera id; repeat for several cameras")
    ref.add_argument(
        "--distances",
        type=_distances,
        default=[2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
        help="comma-separated known distances in metres",
    )
    ref.add_argument("--seed", type=int, default=0)
    ref.add_argument(
        "--depth-model",
        default="synthetic-metric",
        choices=sorted(DEPTH_MODELS),
    )

    sub.add_parser("list-models", help="print registered backend names")
    return parser


def cmd_synthetic_frames(args: argparse.Namespace) -> int:
    width, height = args.size
    scenes = random_scenes(
        args.camera,
        args.frames,
        args.seed,
        height=height,
        width=width,
        interval_s=args.interval_s,
    )
    manifest = ExportManifest(
        inputs=tuple(FrameInput.from_scene(s) for s in scenes),
        out_dir=Path(args.out),
        detector=args.detector,
        segmenter=args.segmenter,
        depth_model=args.depth_model,
        min_conf=args.min_conf,
        prompt=args.prompt,
    )
    summary = export_frames(manifest)
    n_masks = sum(len(e.mask_rels) for e in summary.frames)
    print(
        f"exported {len(summary.frames)} frame(s), {n_masks} mask(s), "
        f"{summary.n_failed} failed -> {summary.manifest_path}",
        file=sys.stderr,
    )
    return 1 if summary.frames == () and summary.n_failed > 0 else 0


def cmd_synthetic_reference(args: argparse.Namespace) -> int:
    refs = []
    for camera_id in args.cameras:
        refs.extend(synthetic_reference_inputs(camera_id, args.distances, args.seed))
    manifest = ExportManifest(
        inputs=tuple(r.frame for r in refs),
        out_dir=Path(args.out),
        depth_model=args.depth_model,
    )
    path = export_reference(
        refs, manifest, comment=f"ctds-export {__version__} seed={args.seed}"
    )
    print(
        f"wrote {len(refs)} reference row(s) for {len(args.cameras)} camera(s) -> {path}",
        file=sys.stderr,
    )
    return 0


def cmd_list_models(args: argparse.Namespace) -> int:
    for stage, registry in (
        ("detector", DETECTORS),
        ("segmenter", SEGMENTERS),
        ("depth-model", DEPTH_MODELS),
    ):
        for name in sorted(registry):
            print(f"{stage} {name}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "synthetic-frames": cmd_synthetic_frames,
        "synthetic-reference": cmd_synthetic_reference,
        "list-models": cmd_list_models,
    }
    try:
        return handlers[args.command](args)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
