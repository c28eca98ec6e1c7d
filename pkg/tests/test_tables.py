"""Table parsing, unit conversion, and provenance headers."""
import math

import pytest

from ctdskit.errors import (
    BadNumericError,
    DuplicateCameraError,
    MissingColumnError,
)
from ctdskit.ingest import (
    parse_cameras_csv,
    parse_observations_csv,
    parse_references_csv,
    parse_tables,
    provenance_line,
    render_table,
)
from ctdskit.types import ObservationSource


class TestCameras:
    def test_units_converted_at_parse(self):
        cams = parse_cameras_csv("camera_id,fov_deg,operation_time_days\nc1,42,30\n")
        assert len(cams) == 1
        assert cams[0].fov_rad == pytest.approx(math.radians(42.0), abs=1e-9)
        assert cams[0].fov_rad == pytest.approx(0.733038, abs=1e-6)
        assert cams[0].operation_time_s == pytest.approx(2_592_000.0)

    def test_duplicate_camera_rejected(self):
        text = "camera_id,fov_deg,operation_time_days\nc1,42,30\nc1,50,10\n"
        with pytest.raises(DuplicateCameraError):
            parse_cameras_csv(text)

    def test_missing_column(self):
        with pytest.raises(MissingColumnError):
            parse_cameras_csv("camera_id,fov_deg\nc1,42\n")

    def test_bad_numeric(self):
        with pytest.raises(BadNumericError):
            parse_cameras_csv("camera_id,fov_deg,operation_time_days\nc1,forty,30\n")

    def test_comment_lines_skipped(self):
        text = "# ctdskit 0.1.0 config=abc seed=1\ncamera_id,fov_deg,operation_time_days\nc1,42,30\n"
        assert len(parse_cameras_csv(text)) == 1

    def test_extra_columns_tolerated(self):
        text = "location,camera_id,fov_deg,operation_time_days\nforest,c1,42,30\n"
        assert parse_cameras_csv(text)[0].camera_id == "c1"


class TestObservations:
    def test_source_parsed(self):
        obs = parse_observations_csv(
            "camera_id,timestamp_s,distance_m,source\nc1,10,4.5,manual\n"
        )
        assert obs[0].source is ObservationSource.MANUAL
        assert obs[0].distance_m == 4.5

    def test_unknown_source(self):
        with pytest.raises(BadNumericError):
            parse_observations_csv(
                "camera_id,timestamp_s,distance_m,source\nc1,10,4.5,guess\n"
            )

    def test_invalid_distance_rejected(self):
        with pytest.raises(BadNumericError):
            parse_observations_csv(
                "camera_id,timestamp_s,distance_m,source\nc1,10,-4.5,manual\n"
            )


class TestReferences:
    def test_rows(self):
        refs = parse_references_csv(
            "camera_id,known_distance_m,raw_depth\nc1,5,1.25\nc1,10,2.5\n"
        )
        assert [r.known_distance_m for r in refs] == [5.0, 10.0]

    def test_dispatch(self):
        rows = parse_tables(
            "camera_id,known_distance_m,raw_depth\nc1,5,1.25\n", "references"
        )
        assert rows[0].raw_depth == 1.25
        with pytest.raises(ValueError):
            parse_tables("x", "nonsense")

    def test_locale_independent(self):
        # no thousands separators, decimal point only
        with pytest.raises(BadNumericError):
            parse_references_csv(
                'camera_id,known_distance_m,raw_depth\nc1,"1,5",1.25\n'
            )


class TestRendering:
    def test_provenance_line_shape(self):
        line = provenance_line("0.1.0", {"w_m": 15.0}, 7)
        assert line.startswith("# ctdskit 0.1.0 config=")
        assert line.endswith(" seed=7")
        digest = line.split("config=")[1].split()[0]
        assert len(digest) == 12

    def test_provenance_hash_tracks_config(self):
        a = provenance_line("0.1.0", {"w_m": 15.0}, 7)
        b = provenance_line("0.1.0", {"w_m": 10.0}, 7)
        assert a != b

    def test_render_skips_comments_on_reparse(self):
        text = render_table(
            ("camera_id", "fov_deg", "operation_time_days"),
            [("c1", 42.0, 30.0)],
            provenance=provenance_line("0.1.0", None, None),
        )
        cams = parse_cameras_csv(text)
        assert cams[0].camera_id == "c1"

    def test_float_formatting_is_compact(self):
        text = render_table(("a",), [(0.30000000000000004,)])
        assert text.splitlines()[1] == "0.3"
        text = render_table(("a",), [(151200.0,)])
        assert text.splitlines()[1] == "151200"
