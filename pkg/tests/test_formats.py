"""PFM, PGM, and detection-document parsing against independent decoders."""
import json
import re
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctdskit.errors import (
    DimensionMismatchError,
    InvalidBBoxError,
    MalformedHeaderError,
    NonFinitePixelError,
    ParseError,
)
from ctdskit.ingest import (
    parse_detections,
    read_pfm,
    read_pgm_mask,
    write_detections,
    write_pfm,
    write_pgm_mask,
)
from ctdskit.types import DepthMap, Detection, InstanceMask


def reference_pfm_decode(raw: bytes) -> np.ndarray:
    """Minimal independent PFM decoder used as the test oracle.

    Matches the header with one regex instead of the incremental tokenizer
    the production reader uses, and unpacks pixels with struct.
    """
    m = re.match(rb"Pf\s+(\d+)\s+(\d+)\s+(-[0-9.eE+]+)\s", raw)
    assert m is not None
    w, h = int(m.group(1)), int(m.group(2))
    body = raw[m.end():]
    vals = np.array(struct.unpack(f"<{w * h}f", body[: w * h * 4]), dtype=np.float32)
    return np.flipud(vals.reshape(h, w))


class TestPfm:
    def test_single_pixel_identity(self, tmp_path):
        raw = b"Pf\n1 1\n-1.0\n" + struct.pack("<f", 2.5)
        p = tmp_path / "one.pfm"
        p.write_bytes(raw)
        d = read_pfm(p)
        assert d.values.shape == (1, 1)
        assert d.values[0, 0] == np.float32(2.5)

    def test_writer_header_layout(self, tmp_path):
        p = tmp_path / "zero.pfm"
        write_pfm(p, DepthMap(values=np.zeros((1, 1), dtype=np.float32)))
        raw = p.read_bytes()
        assert raw[:15] == b"Pf\n1 1\n-1.0000\n"
        assert raw[15:] == b"\x00\x00\x00\x00"

    def test_rows_stored_bottom_to_top(self, tmp_path):
        # 1x2 map: top row 1.0, bottom row 2.0; on disk bottom row first
        vals = np.array([[1.0], [2.0]], dtype=np.float32)
        p = tmp_path / "twop.pfm"
        write_pfm(p, DepthMap(values=vals))
        raw = p.read_bytes()
        body = raw.split(b"\n", 3)[3]
        assert struct.unpack("<2f", body) == (2.0, 1.0)
        assert np.array_equal(read_pfm(p).values, vals)

    def test_matches_reference_decoder(self, tmp_path):
        rng = np.random.default_rng(42)
        vals = rng.random((7, 5), dtype=np.float32) * 30.0
        p = tmp_path / "ref.pfm"
        write_pfm(p, DepthMap(values=vals))
        raw = p.read_bytes()
        assert np.array_equal(reference_pfm_decode(raw), read_pfm(p).values)

    def test_rejects_big_endian(self, tmp_path):
        p = tmp_path / "be.pfm"
        p.write_bytes(b"Pf\n1 1\n1.0\n" + struct.pack(">f", 2.5))
        with pytest.raises(MalformedHeaderError):
            read_pfm(p)

    def test_rejects_color_pfm(self, tmp_path):
        p = tmp_path / "color.pfm"
        p.write_bytes(b"PF\n1 1\n-1.0\n" + struct.pack("<3f", 1, 2, 3))
        with pytest.raises(MalformedHeaderError):
            read_pfm(p)

    def test_rejects_truncated_body(self, tmp_path):
        p = tmp_path / "short.pfm"
        p.write_bytes(b"Pf\n2 2\n-1.0\n" + struct.pack("<3f", 1, 2, 3))
        with pytest.raises(DimensionMismatchError):
            read_pfm(p)

    def test_rejects_nan_pixels(self, tmp_path):
        p = tmp_path / "nan.pfm"
        p.write_bytes(b"Pf\n1 1\n-1.0\n" + struct.pack("<f", float("nan")))
        with pytest.raises(NonFinitePixelError):
            read_pfm(p)

    def test_round_trip_bit_exact_seeded(self, tmp_path):
        rng = np.random.default_rng(7)
        for i in range(50):
            h, w = int(rng.integers(1, 12)), int(rng.integers(1, 12))
            vals = (rng.random((h, w)) * 100).astype(np.float32)
            p = tmp_path / f"rt{i}.pfm"
            write_pfm(p, DepthMap(values=vals))
            back = read_pfm(p)
            assert back.values.tobytes() == vals.tobytes()

    @settings(max_examples=40, deadline=None)
    @given(
        h=st.integers(1, 8),
        w=st.integers(1, 8),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_round_trip_property(self, tmp_path_factory, h, w, seed):
        rng = np.random.default_rng(seed)
        vals = (rng.random((h, w)) * 50).astype(np.float32)
        p = tmp_path_factory.mktemp("pfm") / "x.pfm"
        write_pfm(p, DepthMap(values=vals))
        assert read_pfm(p).values.tobytes() == vals.tobytes()


class TestPgm:
    def test_p2_single_member(self, tmp_path):
        p = tmp_path / "one.pgm"
        p.write_text("P2\n1 1\n255\n255\n")
        m = read_pgm_mask(p)
        assert m.bits.shape == (1, 1) and bool(m.bits[0, 0])

    def test_all_zero_p5_is_empty(self, tmp_path):
        p = tmp_path / "zero.pgm"
        p.write_bytes(b"P5\n4 4\n255\n" + bytes(16))
        m = read_pgm_mask(p)
        assert m.is_empty

    def test_threshold_at_zero(self, tmp_path):
        p = tmp_path / "mix.pgm"
        p.write_bytes(b"P5\n3 1\n255\n" + bytes([0, 128, 255]))
        m = read_pgm_mask(p)
        assert m.bits.tolist() == [[False, True, True]]

    def test_comments_in_header(self, tmp_path):
        p = tmp_path / "com.pgm"
        p.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([0, 7]))
        m = read_pgm_mask(p)
        assert m.bits.tolist() == [[False, True]]

    def test_rejects_wide_maxval(self, tmp_path):
        p = tmp_path / "wide.pgm"
        p.write_bytes(b"P5\n1 1\n65535\n\x00\x01")
        with pytest.raises(MalformedHeaderError):
            read_pgm_mask(p)

    def test_rejects_short_body(self, tmp_path):
        p = tmp_path / "short.pgm"
        p.write_bytes(b"P5\n2 2\n255\n\x01\x02")
        with pytest.raises(DimensionMismatchError):
            read_pgm_mask(p)

    def test_round_trip_bit_exact_seeded(self, tmp_path):
        rng = np.random.default_rng(11)
        for i in range(50):
            h, w = int(rng.integers(1, 10)), int(rng.integers(1, 10))
            bits = rng.random((h, w)) < 0.4
            p = tmp_path / f"rt{i}.pgm"
            write_pgm_mask(p, InstanceMask(bits=bits))
            assert np.array_equal(read_pgm_mask(p).bits, bits)

    def test_p2_and_p5_agree(self, tmp_path):
        vals = [[0, 3], [200, 0]]
        p2 = tmp_path / "a.pgm"
        p2.write_text("P2\n2 2\n255\n0 3\n200 0\n")
        p5 = tmp_path / "b.pgm"
        p5.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 3, 200, 0]))
        assert np.array_equal(read_pgm_mask(p2).bits, read_pgm_mask(p5).bits)
        assert read_pgm_mask(p2).bits.tolist() == [[False, True], [True, False]]


class TestDetections:
    def _doc(self, detections):
        return json.dumps({"images": [{"file": "f1", "detections": detections}]})

    def test_keeps_confident_animal(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(self._doc([{"category": "1", "conf": 0.9, "bbox": [0.1, 0.1, 0.2, 0.2]}]))
        dets = parse_detections(p, min_confidence=0.5)
        assert len(dets) == 1
        assert dets[0].frame_id == "f1"

    def test_drops_low_confidence(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(self._doc([{"category": "1", "conf": 0.3, "bbox": [0.1, 0.1, 0.2, 0.2]}]))
        assert parse_detections(p, min_confidence=0.5) == []

    def test_drops_other_categories(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(self._doc([{"category": "2", "conf": 0.9, "bbox": [0.1, 0.1, 0.2, 0.2]}]))
        assert parse_detections(p) == []

    def test_invalid_bbox_raises(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(self._doc([{"category": "1", "conf": 0.9, "bbox": [0.5, 0.5, 0.6, 0.2]}]))
        with pytest.raises(InvalidBBoxError):
            parse_detections(p)

    def test_discarded_detection_not_validated(self, tmp_path):
        # junk bbox on a filtered-out category must not fail the parse
        p = tmp_path / "d.json"
        p.write_text(self._doc([{"category": "3", "conf": 0.9, "bbox": [9, 9, 9, 9]}]))
        assert parse_detections(p) == []

    def test_order_preserved_within_image(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(
            self._doc(
                [
                    {"category": "1", "conf": 0.9, "bbox": [0.0, 0.0, 0.1, 0.1]},
                    {"category": "1", "conf": 0.8, "bbox": [0.5, 0.5, 0.1, 0.1]},
                ]
            )
        )
        dets = parse_detections(p)
        assert [d.confidence for d in dets] == [0.9, 0.8]

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            parse_detections(p)

    def test_write_then_parse(self, tmp_path):
        groups = {
            "f2": [Detection(bbox=(0.1, 0.1, 0.2, 0.2), confidence=0.7, frame_id="f2")],
            "f1": [Detection(bbox=(0.3, 0.3, 0.1, 0.1), confidence=0.9, frame_id="f1")],
        }
        p = tmp_path / "d.json"
        write_detections(p, groups)
        back = parse_detections(p)
        assert [d.frame_id for d in back] == ["f1", "f2"]
        assert back[0].bbox == (0.3, 0.3, 0.1, 0.1)
