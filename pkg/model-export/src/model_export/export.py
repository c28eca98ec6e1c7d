"""Frame and reference export: run the stages, serialize the results.

Per frame the exporter writes exactly one depth map, contributes exactly
one entry to the detections document (an empty list when nothing was
detected), and writes one mask per retained detection, in detection
order. A failing frame is skipped with a note on stderr and never
produces partial entries in the documents.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .backends import (
    BBox,
    FrameInput,
    Stages,
    resolve_person_detector,
    resolve_stages,
)
from .errors import EmptySegmentationError, ExportError, NoPersonDetectedError
from .scene import reference_scene

_STEM_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _stem(frame_id: str) -> str:
    return _STEM_SAFE.sub("_", frame_id)


@dataclass(frozen=True)
class ExportManifest:
    """What to export, with which model per stage, and where to."""

    inputs: tuple[FrameInput, ...]
    out_dir: Path
    detector: str = "synthetic"
    segmenter: str = "synthetic"
    depth_model: str = "synthetic-metric"
    min_conf: float = 0.2
    prompt: str = "box"

    def __post_init__(self) -> None:
        if not (0.0 <= self.min_conf <= 1.0):
            raise ValueError(f"min_conf {self.min_conf} outside [0, 1]")
        if self.prompt not in ("box", "point"):
            raise ValueError(f"prompt must be 'box' or 'point', got {self.prompt!r}")
        stems = [_stem(f.frame_id) for f in self.inputs]
        if len(set(stems)) != len(stems):
            raise ValueError("frame ids collide after filename sanitization")
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    def stages(self) -> Stages:
        return resolve_stages(self.detector, self.segmenter, self.depth_model)


@dataclass(frozen=True)
class ExportedFrame:
    frame_id: str
    camera_id: str
    timestamp_s: float
    depth_rel: str
    mask_rels: tuple[str, ...]
    detections: tuple[tuple[BBox, float], ...]


@dataclass(frozen=True)
class ExportSummary:
    frames: tuple[ExportedFrame, ...]
    n_failed: int
    manifest_path: Path
    detections_path: Path


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def export_frame(
    frame: FrameInput, manifest: ExportManifest, stages: Stages | None = None
) -> ExportedFrame:
    """Run all stages on one frame and write its artifacts.

    Returns the relative paths written; document files (detections,
    run manifest) are the batch entry point's job.
    """
    stages = stages or manifest.stages()
    out = manifest.out_dir
    (out / "depth").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)

    depth = np.asarray(stages.depth(frame))
    retained = [
        (box, conf) for box, conf in stages.detect(frame) if conf >= manifest.min_conf
    ]
    masks = stages.segment(frame, [box for box, _ in retained], prompt=manifest.prompt)
    if len(masks) != len(retained):
        raise ExportError(
            f"frame {frame.frame_id!r}: {len(retained)} detection(s) but "
            f"{len(masks)} mask(s)"
        )
    for i, mask in enumerate(masks):
        if not mask.any():
            raise EmptySegmentationError(
                f"frame {frame.frame_id!r}: detection {i} got an empty mask"
            )
        if mask.shape != depth.shape:
            raise ExportError(
                f"frame {frame.frame_id!r}: mask {i} shape {mask.shape} "
                f"differs from depth {depth.shape}"
            )

    stem = _stem(frame.frame_id)
    depth_rel = f"depth/{stem}.pfm"
    formats.write_pfm(out / depth_rel, depth)
    mask_rels = []
    for i, mask in enumerate(masks):
        rel = f"masks/{stem}_{i:02d}.pgm"
        formats.write_pgm_mask(out / rel, mask)
        mask_rels.append(rel)
    return ExportedFrame(
        frame_id=frame.frame_id,
        camera_id=frame.camera_id,
        timestamp_s=frame.timestamp_s,
        depth_rel=depth_rel,
        mask_rels=tuple(mask_rels),
        detections=tuple(retained),
    )


def export_frames(manifest: ExportManifest) -> ExportSummary:
    """Export every input frame, skipping failures with a note.

    After the per-frame artifacts, writes the detections document (one
    entry per exported frame) and the run manifest tying everything
    together with paths relative to the output directory.
    """
    stages = manifest.stages()
    exported: list[ExportedFrame] = []
    n_failed = 0
    for frame in manifest.inputs:
        try:
            exported.append(export_frame(frame, manifest, stages))
        except ExportError as exc:
            n_failed += 1
            _note(f"skipping frame {frame.frame_id}: {exc}")
    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)
    formats.write_detections(
        out / "detections.json", {e.frame_id: e.detections for e in exported}
    )
    formats.write_run_manifest(
        out / "manifest.json",
        frames=[
            {
                "frame_id": e.frame_id,
                "camera_id": e.camera_id,
                "timestamp_s": e.timestamp_s,
                "depth": e.depth_rel,
                "masks": list(e.mask_rels),
            }
            for e in exported
        ],
        detections="detections.json",
    )
    return ExportSummary(
        frames=tuple(exported),
        n_failed=n_failed,
        manifest_path=out / "manifest.json",
        detections_path=out / "detections.json",
    )


@dataclass(frozen=True)
class ReferenceInput:
    """A staged frame with the surveyor at a tape-measured distance."""

    frame: FrameInput
    known_distance_m: float

    def __post_init__(self) -> None:
        if not (self.known_distance_m > 0):
            raise ValueError(
                f"known_distance_m must be positive, got {self.known_distance_m}"
            )


def synthetic_reference_inputs(
    camera_id: str, distances_m: Sequence[float], seed: int
) -> tuple[ReferenceInput, ...]:
    """One staged scene per known distance for one camera."""
    out = []
    for i, d in enumerate(distances_m):
        scene = reference_scene(camera_id, f"{camera_id}_ref{i:02d}", float(d), seed)
        out.append(
            ReferenceInput(frame=FrameInput.from_scene(scene), known_distance_m=float(d))
        )
    return tuple(out)


def reference_rows(
    refs: Sequence[ReferenceInput], manifest: ExportManifest
) -> list[tuple[str, float, float]]:
    """(camera_id, known_distance_m, raw_depth) per staged frame.

    raw_depth is the median raw value over the person's mask. A frame
    without a person is an error, not a skip: a broken reference pass
    should not silently thin out a camera's calibration.
    """
    stages = manifest.stages()
    detect_person = resolve_person_detector(manifest.detector)
    rows = []
    for ref in refs:
        frame = ref.frame
        people = detect_person(frame)
        if not people:
            raise NoPersonDetectedError(
                f"reference frame {frame.frame_id!r} contains no person"
            )
        # Highest-confidence person wins if several were staged.
        box, _conf = max(people, key=lambda bc: bc[1])
        mask = stages.segment(frame, [box], prompt=manifest.prompt)[0]
        if not mask.any():
            raise EmptySegmentationError(
                f"reference frame {frame.frame_id!r}: person mask is empty"
            )
        depth = np.asarray(stages.depth(frame))
        rows.append(
            (frame.camera_id, ref.known_distance_m, float(np.median(depth[mask])))
        )
    return rows


def export_reference(
    refs: Sequence[ReferenceInput], manifest: ExportManifest, comment: str | None = None
) -> Path:
    """Write the reference table and a run manifest pointing at it."""
    rows = reference_rows(refs, manifest)
    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)
    formats.write_references_csv(out / "references.csv", rows, comment=comment)
    formats.write_run_manifest(out / "manifest.json", references="references.csv")
    return out / "references.csv"
