"""Delimiter-separated tables for cameras, observations, and references.

Parsing is locale-independent (decimal point only). Lines whose first
non-blank character is ``#`` are comments; every table written by this
package starts with one provenance comment carrying the tool version,
config hash, and seed.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from ..errors import (
    BadNumericError,
    DuplicateCameraError,
    MissingColumnError,
    ParseError,
)
from ..types import Camera, Observation, ObservationSource, ReferenceSample

SECONDS_PER_DAY = 86400.0

_TABLE_COLUMNS = {
    "cameras": ("camera_id", "fov_deg", "operation_time_days"),
    "observations": ("camera_id", "timestamp_s", "distance_m", "source"),
    "references": ("camera_id", "known_distance_m", "raw_depth"),
}


def _rows(csv_text: str, kind: str) -> tuple[dict[str, int], list[list[str]]]:
    lines = [
        ln for ln in csv_text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise MissingColumnError(f"{kind} table is empty, header row required")
    reader = csv.reader(lines)
    header = [c.strip() for c in next(reader)]
    required = _TABLE_COLUMNS[kind]
    missing = [c for c in required if c not in header]
    if missing:
        raise MissingColumnError(
            f"{kind} table missing column(s) {', '.join(missing)}; got {header}"
        )
    index = {c: header.index(c) for c in required}
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) < len(header):
            raise ParseError(
                f"{kind} table line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        rows.append([c.strip() for c in row])
    return index, rows


def _num(value: str, column: str, kind: str) -> float:
    # Reject locale-style separators explicitly; float() already rejects most.
    if "," in value or " " in value:
        raise BadNumericError(f"{kind} table: bad numeric {value!r} in {column}")
    try:
        out = float(value)
    except ValueError as exc:
        raise BadNumericError(
            f"{kind} table: bad numeric {value!r} in {column}"
        ) from exc
    if not math.isfinite(out):
        raise BadNumericError(f"{kind} table: non-finite {value!r} in {column}")
    return out


def parse_cameras_csv(csv_text: str) -> list[Camera]:
    """Parse the camera table; degrees to radians, days to seconds."""
    idx, rows = _rows(csv_text, "cameras")
    seen: set[str] = set()
    out = []
    for row in rows:
        cid = row[idx["camera_id"]]
        if cid in seen:
            raise DuplicateCameraError(f"duplicate camera_id {cid!r} in camera table")
        seen.add(cid)
        fov_deg = _num(row[idx["fov_deg"]], "fov_deg", "cameras")
        days = _num(row[idx["operation_time_days"]], "operation_time_days", "cameras")
        try:
            out.append(
                Camera(
                    camera_id=cid,
                    fov_rad=math.radians(fov_deg),
                    operation_time_s=days * SECONDS_PER_DAY,
                )
            )
        except ValueError as exc:
            raise BadNumericError(f"cameras table: {exc}") from exc
    return out


def parse_observations_csv(csv_text: str) -> list[Observation]:
    idx, rows = _rows(csv_text, "observations")
    out = []
    for row in rows:
        src_raw = row[idx["source"]].lower()
        try:
            source = ObservationSource(src_raw)
        except ValueError as exc:
            raise BadNumericError(
                f"observations table: unknown source {row[idx['source']]!r}"
            ) from exc
        try:
            out.append(
                Observation(
                    camera_id=row[idx["camera_id"]],
                    timestamp_s=_num(row[idx["timestamp_s"]], "timestamp_s", "observations"),
                    distance_m=_num(row[idx["distance_m"]], "distance_m", "observations"),
                    source=source,
                )
            )
        except ValueError as exc:
            raise BadNumericError(f"observations table: {exc}") from exc
    return out


def parse_references_csv(csv_text: str) -> list[ReferenceSample]:
    idx, rows = _rows(csv_text, "references")
    out = []
    for row in rows:
        try:
            out.append(
                ReferenceSample(
                    camera_id=row[idx["camera_id"]],
                    known_distance_m=_num(
                        row[idx["known_distance_m"]], "known_distance_m", "references"
                    ),
                    raw_depth=_num(row[idx["raw_depth"]], "raw_depth", "references"),
                )
            )
        except ValueError as exc:
            raise BadNumericError(f"references table: {exc}") from exc
    return out


def parse_tables(csv_text: str, kind: str) -> list:
    """Dispatch table parsing by kind: cameras, observations, or references."""
    parsers = {
        "cameras": parse_cameras_csv,
        "observations": parse_observations_csv,
        "references": parse_references_csv,
    }
    if kind not in parsers:
        raise ValueError(f"unknown table kind {kind!r}")
    return parsers[kind](csv_text)


def config_hash(config: Mapping[str, Any] | None) -> str:
    """Short stable digest of a config mapping (sorted-key canonical form)."""
    payload = json.dumps(config or {}, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def provenance_line(
    version: str, config: Mapping[str, Any] | None = None, seed: int | None = None
) -> str:
    seed_txt = "none" if seed is None else str(seed)
    return f"# ctdskit {version} config={config_hash(config)} seed={seed_txt}"


def format_number(value: Any) -> str:
    """Render a cell: floats via %.10g, everything else via str."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.10g}"
    return str(value)


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    provenance: str | None = None,
) -> str:
    """Render rows as CSV text with an optional leading comment line."""
    buf = io.StringIO()
    if provenance is not None:
        buf.write(provenance + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    provenance: str | None = None,
) -> None:
    Path(path).write_text(render_table(columns, rows, provenance))


def cameras_to_rows(cameras: Iterable[Camera]) -> list[tuple[Any, ...]]:
    """Rows in the ingest column layout (radians back to degrees, s to days)."""
    return [
        (c.camera_id, math.degrees(c.fov_rad), c.operation_time_s / SECONDS_PER_DAY)
        for c in cameras
    ]


def observations_to_rows(observations: Iterable[Observation]) -> list[tuple[Any, ...]]:
    return [
        (o.camera_id, o.timestamp_s, o.distance_m, o.source.value)
        for o in observations
    ]


def write_cameras_csv(
    path: str | Path, cameras: Iterable[Camera], provenance: str | None = None
) -> None:
    write_table(path, _TABLE_COLUMNS["cameras"], cameras_to_rows(cameras), provenance)


def write_observations_csv(
    path: str | Path, observations: Iterable[Observation], provenance: str | None = None
) -> None:
    write_table(
        path, _TABLE_COLUMNS["observations"], observations_to_rows(observations), provenance
    )
