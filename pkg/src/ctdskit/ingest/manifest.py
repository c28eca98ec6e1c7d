"""The run manifest: one structured-text document naming every input.

A manifest lists the three tables plus, per frame, the depth map and any
instance masks. All paths are resolved relative to the manifest file and
checked eagerly so a batch run fails before any work starts, not halfway
through.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import MissingInputError, ParseError


@dataclass(frozen=True)
class FrameEntry:
    frame_id: str
    camera_id: str
    timestamp_s: float
    depth_path: Path
    mask_paths: tuple[Path | None, ...] = ()


@dataclass(frozen=True)
class Manifest:
    root: Path
    cameras_path: Path | None = None
    observations_path: Path | None = None
    references_path: Path | None = None
    detections_path: Path | None = None
    reference_depth_paths: dict[str, Path] = field(default_factory=dict)
    frames: tuple[FrameEntry, ...] = ()


def _resolve(root: Path, rel: str, what: str) -> Path:
    p = root / rel
    if not p.is_file():
        raise MissingInputError(f"{what} file not found: {p}")
    return p


def load_manifest(path: str | Path) -> Manifest:
    p = Path(path)
    if not p.is_file():
        raise MissingInputError(f"manifest not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{p}: manifest must be an object")
    root = p.parent

    def table(key: str) -> Path | None:
        rel = doc.get(key)
        if rel is None:
            return None
        if not isinstance(rel, str):
            raise ParseError(f"{p}: {key} must be a path string")
        return _resolve(root, rel, f"{key} table")

    ref_depths: dict[str, Path] = {}
    for cam, rel in (doc.get("reference_depths") or {}).items():
        if not isinstance(rel, str):
            raise ParseError(f"{p}: reference_depths[{cam!r}] must be a path string")
        ref_depths[str(cam)] = _resolve(root, rel, f"reference depth for {cam}")

    frames: list[FrameEntry] = []
    raw_frames = doc.get("frames", [])
    if not isinstance(raw_frames, list):
        raise ParseError(f"{p}: frames must be a list")
    seen_ids: set[str] = set()
    for i, fr in enumerate(raw_frames):
        if not isinstance(fr, dict):
            raise ParseError(f"{p}: frames[{i}] is not an object")
        fid = fr.get("frame_id")
        cam = fr.get("camera_id")
        if not isinstance(fid, str) or not fid:
            raise ParseError(f"{p}: frames[{i}] missing non-empty frame_id")
        if fid in seen_ids:
            raise ParseError(f"{p}: duplicate frame_id {fid!r}")
        seen_ids.add(fid)
        if not isinstance(cam, str) or not cam:
            raise ParseError(f"{p}: frames[{i}] missing non-empty camera_id")
        ts = fr.get("timestamp_s", 0.0)
        if (
            not isinstance(ts, (int, float))
            or isinstance(ts, bool)
            or not math.isfinite(float(ts))
            or float(ts) < 0
        ):
            raise ParseError(f"{p}: frames[{i}] timestamp_s must be a number >= 0")
        depth_rel = fr.get("depth")
        if not isinstance(depth_rel, str):
            raise ParseError(f"{p}: frames[{i}] missing depth path")
        masks_raw = fr.get("masks", [])
        if not isinstance(masks_raw, list):
            raise ParseError(f"{p}: frames[{i}].masks must be a list")
        masks: list[Path | None] = []
        for j, m in enumerate(masks_raw):
            if m is None:
                masks.append(None)
            elif isinstance(m, str):
                masks.append(_resolve(root, m, f"mask {j} of frame {fid}"))
            else:
                raise ParseError(f"{p}: frames[{i}].masks[{j}] must be a path or null")
        frames.append(
            FrameEntry(
                frame_id=fid,
                camera_id=cam,
                timestamp_s=float(ts),
                depth_path=_resolve(root, depth_rel, f"depth for frame {fid}"),
                mask_paths=tuple(masks),
            )
        )
    return Manifest(
        root=root,
        cameras_path=table("cameras"),
        observations_path=table("observations"),
        references_path=table("references"),
        detections_path=table("detections"),
        reference_depth_paths=ref_depths,
        frames=tuple(frames),
    )
