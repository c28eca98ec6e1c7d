"""File formats, tables, and the run manifest."""
from .formats import (
    ANIMAL_CATEGORY,
    parse_detections,
    read_pfm,
    read_pgm_mask,
    safe_stem,
    write_detections,
    write_pfm,
    write_pgm_mask,
)
from .manifest import FrameEntry, Manifest, load_manifest
from .tables import (
    cameras_to_rows,
    config_hash,
    format_number,
    observations_to_rows,
    parse_cameras_csv,
    parse_observations_csv,
    parse_references_csv,
    parse_tables,
    provenance_line,
    render_table,
    write_cameras_csv,
    write_observations_csv,
    write_table,
)

__all__ = [
    "ANIMAL_CATEGORY",
    "FrameEntry",
    "Manifest",
    "cameras_to_rows",
    "config_hash",
    "format_number",
    "load_manifest",
    "observations_to_rows",
    "parse_cameras_csv",
    "parse_detections",
    "parse_observations_csv",
    "parse_references_csv",
    "parse_tables",
    "provenance_line",
    "read_pfm",
    "read_pgm_mask",
    "render_table",
    "safe_stem",
    "write_cameras_csv",
    "write_detections",
    "write_observations_csv",
    "write_pfm",
    "write_pgm_mask",
    "write_table",
]
