"""Image and annotation file formats.

PFM depth maps (grayscale ``Pf`` only, little-endian), PGM instance masks
(binary ``P5`` and plain ``P2``), and the detector JSON layout. Depth maps
round-trip bit exactly because storage is float32 end to end.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import (
    DimensionMismatchError,
    InvalidBBoxError,
    MalformedHeaderError,
    NonFinitePixelError,
    ParseError,
)
from ..types import DepthMap, DepthUnit, Detection, InstanceMask

#: Detector category treated as an animal unless the caller overrides it.
ANIMAL_CATEGORY = "1"

_WS = b" \t\r\n"


def _read_token(buf: bytes, pos: int, what: str, path: str) -> tuple[bytes, int]:
    """Next whitespace-delimited token, skipping ``#`` comment lines."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in (b"#",):
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c in (b" ", b"\t", b"\r", b"\n"):
            pos += 1
        else:
            break
    if pos >= n:
        raise MalformedHeaderError(f"{path}: truncated header, expected {what}")
    start = pos
    while pos < n and buf[pos : pos + 1] not in (b" ", b"\t", b"\r", b"\n", b"#"):
        pos += 1
    return buf[start:pos], pos


def read_pfm(path: str | Path, unit: DepthUnit = DepthUnit.RAW) -> DepthMap:
    """Read a grayscale PFM depth map.

    Only the single-channel ``Pf`` variant with a negative scale
    (little-endian) is accepted. PFM stores rows bottom to top; the result
    is flipped so row 0 is the top of the image.
    """
    p = Path(path)
    buf = p.read_bytes()
    spath = str(p)
    if not buf.startswith(b"Pf"):
        got = buf[:2].decode("latin-1", "replace")
        raise MalformedHeaderError(
            f"{spath}: expected grayscale PFM magic 'Pf', got {got!r}"
        )
    tok, pos = _read_token(buf, 0, "magic", spath)
    if tok != b"Pf":
        raise MalformedHeaderError(f"{spath}: expected magic 'Pf', got {tok!r}")
    wtok, pos = _read_token(buf, pos, "width", spath)
    htok, pos = _read_token(buf, pos, "height", spath)
    stok, pos = _read_token(buf, pos, "scale", spath)
    try:
        width, height = int(wtok), int(htok)
        scale = float(stok)
    except ValueError as exc:
        raise MalformedHeaderError(f"{spath}: bad header field: {exc}") from exc
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"{spath}: bad dimensions {width}x{height}")
    if scale == 0 or not math.isfinite(scale):
        raise MalformedHeaderError(f"{spath}: bad scale {scale}")
    if scale > 0:
        raise MalformedHeaderError(
            f"{spath}: big-endian PFM (scale {scale} > 0) is not supported"
        )
    # Header ends with exactly one whitespace byte after the scale token.
    pos += 1
    expected = width * height * 4
    data = buf[pos : pos + expected]
    if len(data) != expected:
        raise DimensionMismatchError(
            f"{spath}: expected {expected} pixel bytes for "
            f"{width}x{height}, found {len(data)}"
        )
    pixels = np.frombuffer(data, dtype="<f4").reshape(height, width)
    if not np.all(np.isfinite(pixels)):
        bad = int(np.count_nonzero(~np.isfinite(pixels)))
        raise NonFinitePixelError(f"{spath}: {bad} non-finite pixel(s)")
    # Bottom-to-top on disk; flip to image orientation.
    return DepthMap(values=np.flipud(pixels), unit=unit)


def write_pfm(path: str | Path, depth: DepthMap) -> None:
    """Write a DepthMap as little-endian grayscale PFM (scale -1.0)."""
    p = Path(path)
    h, w = depth.values.shape
    header = f"Pf\n{w} {h}\n-1.0000\n".encode("ascii")
    body = np.flipud(depth.values).astype("<f4").tobytes()
    p.write_bytes(header + body)


def read_pgm_mask(path: str | Path) -> InstanceMask:
    """Read a PGM (``P5`` binary or ``P2`` plain) as a boolean mask.

    Any pixel greater than zero is a member. ``maxval`` must be at most
    255 (one byte per pixel in the binary variant).
    """
    p = Path(path)
    buf = p.read_bytes()
    spath = str(p)
    tok, pos = _read_token(buf, 0, "magic", spath)
    if tok not in (b"P5", b"P2"):
        raise MalformedHeaderError(f"{spath}: expected PGM magic P5 or P2, got {tok!r}")
    magic = tok
    wtok, pos = _read_token(buf, pos, "width", spath)
    htok, pos = _read_token(buf, pos, "height", spath)
    mtok, pos = _read_token(buf, pos, "maxval", spath)
    try:
        width, height, maxval = int(wtok), int(htok), int(mtok)
    except ValueError as exc:
        raise MalformedHeaderError(f"{spath}: bad header field: {exc}") from exc
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"{spath}: bad dimensions {width}x{height}")
    if not (0 < maxval <= 255):
        raise MalformedHeaderError(f"{spath}: maxval {maxval} outside (0, 255]")
    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte terminates the header
        data = buf[pos : pos + n]
        if len(data) != n:
            raise DimensionMismatchError(
                f"{spath}: expected {n} pixel bytes for {width}x{height}, "
                f"found {len(data)}"
            )
        pixels = np.frombuffer(data, dtype=np.uint8).reshape(height, width)
    else:
        values = []
        while len(values) < n:
            tok, pos = _read_token(buf, pos, f"pixel {len(values)}", spath)
            try:
                values.append(int(tok))
            except ValueError as exc:
                raise ParseError(f"{spath}: bad pixel value {tok!r}") from exc
        pixels = np.array(values, dtype=np.int64).reshape(height, width)
    if np.any(pixels > maxval):
        raise ParseError(f"{spath}: pixel value exceeds maxval {maxval}")
    return InstanceMask(bits=pixels > 0)


def write_pgm_mask(path: str | Path, mask: InstanceMask) -> None:
    """Write a boolean mask as binary PGM (members 255, background 0)."""
    p = Path(path)
    h, w = mask.bits.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    body = np.where(mask.bits, 255, 0).astype(np.uint8).tobytes()
    p.write_bytes(header + body)


def parse_detections(
    path: str | Path,
    min_confidence: float = 0.0,
    animal_category: str = ANIMAL_CATEGORY,
) -> list[Detection]:
    """Parse the detector output JSON and keep animal hits.

    Layout: ``{"images": [{"file": id, "detections": [{"category",
    "conf", "bbox": [x, y, w, h]}, ...]}, ...]}``. Detections are kept
    when the category matches ``animal_category`` and the confidence is at
    least ``min_confidence``; only the retained detections are validated,
    so junk boxes on discarded categories do not fail the parse.
    """
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "images" not in doc:
        raise ParseError(f"{p}: top level must be an object with an 'images' list")
    images = doc["images"]
    if not isinstance(images, list):
        raise ParseError(f"{p}: 'images' must be a list")
    out: list[Detection] = []
    for i, entry in enumerate(images):
        if not isinstance(entry, dict):
            raise ParseError(f"{p}: images[{i}] is not an object")
        frame_id = entry.get("file")
        if not isinstance(frame_id, str) or not frame_id:
            raise ParseError(f"{p}: images[{i}] missing a non-empty 'file'")
        dets = entry.get("detections", [])
        if not isinstance(dets, list):
            raise ParseError(f"{p}: images[{i}].detections must be a list")
        for j, det in enumerate(dets):
            if not isinstance(det, dict):
                raise ParseError(f"{p}: images[{i}].detections[{j}] is not an object")
            category = str(det.get("category", ""))
            conf_raw = det.get("conf", None)
            if not isinstance(conf_raw, (int, float)) or isinstance(conf_raw, bool):
                raise ParseError(
                    f"{p}: images[{i}].detections[{j}] has non-numeric conf"
                )
            conf = float(conf_raw)
            if category != animal_category or conf < min_confidence:
                continue
            bbox = det.get("bbox")
            if (
                not isinstance(bbox, list)
                or len(bbox) != 4
                or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in bbox
                )
            ):
                raise InvalidBBoxError(
                    f"{p}: images[{i}].detections[{j}] bbox must be 4 numbers"
                )
            try:
                out.append(
                    Detection(
                        bbox=(float(bbox[0]), float(bbox[1]), float(bbox[2]), float(bbox[3])),
                        confidence=conf,
                        frame_id=frame_id,
                    )
                )
            except ValueError as exc:
                raise InvalidBBoxError(
                    f"{p}: images[{i}].detections[{j}]: {exc}"
                ) from exc
    return out


def write_detections(path: str | Path, groups: dict[str, list[Detection]]) -> None:
    """Write detections grouped by frame id in the detector JSON layout."""
    images: list[dict[str, Any]] = []
    for frame_id in sorted(groups):
        images.append(
            {
                "file": frame_id,
                "detections": [
                    {
                        "category": ANIMAL_CATEGORY,
                        "conf": d.confidence,
                        "bbox": list(d.bbox),
                    }
                    for d in groups[frame_id]
                ],
            }
        )
    Path(path).write_text(json.dumps({"images": images}, indent=2) + "\n")


_FRAME_ID_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def safe_stem(frame_id: str) -> str:
    """Filesystem-safe stem for per-frame artifact files."""
    return _FRAME_ID_SAFE.sub("_", frame_id)
