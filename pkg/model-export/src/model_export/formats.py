"""Standalone writers for the consumer pipeline's on-disk formats.

This module deliberately imports nothing from the consuming package: the
file formats are the contract between the two, and keeping the writers
self-contained means either side can change internals without breaking
the other. Formats produced here:

- little-endian grayscale PFM depth maps (rows stored bottom to top),
- binary P5 PGM instance masks (members 255, background 0),
- the detector JSON document ({"images": [{"file", "detections"}]}),
- the reference CSV table (camera_id, known_distance_m, raw_depth),
- the run manifest JSON naming all of the above with relative paths.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

#: Detector category written for animal detections.
ANIMAL_CATEGORY = "1"


def write_pfm(path: str | Path, values: np.ndarray) -> None:
    """Write a depth array (row 0 = top of image) as grayscale PFM.

    Values are stored float32 little-endian with scale -1.0; rows go to
    disk bottom-up per the format. Non-finite or negative values are
    rejected here rather than at parse time downstream.
    """
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"depth must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("depth contains non-finite values")
    if np.any(arr < 0):
        raise ValueError("depth contains negative values")
    h, w = arr.shape
    header = f"Pf\n{w} {h}\n-1.0000\n".encode("ascii")
    Path(path).write_bytes(header + np.flipud(arr).astype("<f4").tobytes())


def write_pgm_mask(path: str | Path, bits: np.ndarray) -> None:
    """Write a boolean mask as binary PGM (P5, maxval 255)."""
    arr = np.asarray(bits)
    if arr.ndim != 2 or arr.dtype != np.bool_:
        raise ValueError(f"mask must be a 2-D boolean array, got {arr.dtype} {arr.shape}")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + np.where(arr, 255, 0).astype(np.uint8).tobytes())


def detections_document(
    entries: Mapping[str, Sequence[tuple[tuple[float, float, float, float], float]]],
) -> dict[str, Any]:
    """Detector JSON layout from {frame_id: [(bbox, conf), ...]}.

    Every listed frame gets an images entry, empty detection lists
    included; frames are sorted by id so the bytes do not depend on
    mapping order.
    """
    images = []
    for frame_id in sorted(entries):
        images.append(
            {
                "file": frame_id,
                "detections": [
                    {
                        "category": ANIMAL_CATEGORY,
                        "conf": float(conf),
                        "bbox": [float(v) for v in bbox],
                    }
                    for bbox, conf in entries[frame_id]
                ],
            }
        )
    return {"images": images}


def write_detections(
    path: str | Path,
    entries: Mapping[str, Sequence[tuple[tuple[float, float, float, float], float]]],
) -> None:
    doc = detections_document(entries)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_references_csv(
    path: str | Path,
    rows: Iterable[tuple[str, float, float]],
    comment: str | None = None,
) -> None:
    """Write reference rows (camera_id, known_distance_m, raw_depth)."""
    buf = io.StringIO()
    if comment is not None:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("camera_id", "known_distance_m", "raw_depth"))
    for camera_id, known_m, raw in rows:
        writer.writerow((camera_id, f"{float(known_m):.10g}", f"{float(raw):.10g}"))
    Path(path).write_text(buf.getvalue())


def write_run_manifest(
    path: str | Path,
    frames: Sequence[Mapping[str, Any]] = (),
    detections: str | None = None,
    references: str | None = None,
) -> None:
    """Write the run manifest; all paths are relative to the manifest file.

    Frame mappings carry frame_id, camera_id, timestamp_s, depth, and a
    masks list whose order matches the frame's detections entry.
    """
    doc: dict[str, Any] = {}
    if detections is not None:
        doc["detections"] = detections
    if references is not None:
        doc["references"] = references
    if frames:
        doc["frames"] = [dict(f) for f in frames]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
