"""Synthetic scene generation and the stage backends built on it."""
import numpy as np
import pytest

from model_export.backends import (
    FrameInput,
    RELATIVE_KNEE_M,
    RELATIVE_SCALE,
    resolve_stages,
    synthetic_depth_metric,
    synthetic_depth_relative,
    synthetic_detect,
    synthetic_segment,
)
from model_export.errors import BadSceneError, ExportDependencyError, ExportError
from model_export.scene import (
    Blob,
    SceneSpec,
    random_scenes,
    reference_scene,
    render_depth_m,
    render_index,
)


def plain_scene(blobs, **kwargs):
    defaults = dict(
        frame_id="f0",
        camera_id="cam",
        timestamp_s=0.0,
        blobs=blobs,
        texture_amp_m=0.0,
    )
    defaults.update(kwargs)
    return SceneSpec(**defaults)


class TestBlobValidation:
    def test_radius_floor(self):
        with pytest.raises(BadSceneError, match="radii"):
            Blob(cx=0.5, cy=0.5, rx=0.001, ry=0.1, distance_m=3.0)

    def test_must_fit_inside_margins(self):
        with pytest.raises(BadSceneError, match="margins"):
            Blob(cx=0.99, cy=0.5, rx=0.1, ry=0.1, distance_m=3.0)

    def test_distance_positive(self):
        with pytest.raises(BadSceneError, match="distance"):
            Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=0.0)

    def test_confidence_range(self):
        with pytest.raises(BadSceneError, match="confidence"):
            Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=3.0, confidence=1.5)

    def test_bbox_is_xywh(self):
        b = Blob(cx=0.5, cy=0.4, rx=0.1, ry=0.2, distance_m=3.0)
        assert b.bbox() == (0.4, 0.2, 0.2, 0.4)


class TestSceneValidation:
    def test_background_behind_blobs(self):
        blob = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=30.0)
        with pytest.raises(BadSceneError, match="background"):
            plain_scene((blob,), background_m=25.0)

    def test_minimum_size(self):
        with pytest.raises(BadSceneError, match="too small"):
            plain_scene((), height=4)


class TestRendering:
    def test_nearest_blob_wins_overlap(self):
        near = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=3.0)
        far = Blob(cx=0.5, cy=0.5, rx=0.2, ry=0.2, distance_m=5.0)
        scene = plain_scene((near, far))
        index = render_index(scene)
        # the whole small ellipse belongs to the near blob
        assert not np.any((index == 1) & (index == 0))
        assert np.count_nonzero(index == 0) > 0
        assert np.count_nonzero(index == 1) > 0
        depth = render_depth_m(scene)
        assert np.all(depth[index == 0] == 3.0)
        assert np.all(depth[index == 1] == 5.0)
        assert np.all(depth[index == -1] == scene.background_m)

    def test_texture_bounded_and_deterministic(self):
        blob = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=4.0)
        scene = plain_scene((blob,), texture_amp_m=0.05, texture_seed=9)
        d1 = render_depth_m(scene)
        d2 = render_depth_m(scene)
        assert np.array_equal(d1, d2)
        index = render_index(scene)
        assert np.all(np.abs(d1[index == 0] - 4.0) <= 0.05)


class TestRandomScenes:
    def test_deterministic_and_prefix_stable(self):
        a = random_scenes("cam", 5, seed=3)
        b = random_scenes("cam", 5, seed=3)
        assert a == b
        # each frame has its own stream, so shorter runs are prefixes
        assert random_scenes("cam", 3, seed=3) == a[:3]
        assert random_scenes("cam", 5, seed=4) != a

    def test_fields(self):
        scenes = random_scenes("camX", 4, seed=0, interval_s=2.5)
        assert [s.frame_id for s in scenes] == [f"camX_f{k:04d}" for k in range(4)]
        assert [s.timestamp_s for s in scenes] == [0.0, 2.5, 5.0, 7.5]
        for s in scenes:
            assert not any(b.is_person for b in s.blobs)

    def test_blob_counts_vary(self):
        scenes = random_scenes("cam", 30, seed=1)
        counts = {len(s.blobs) for s in scenes}
        assert len(counts) > 1
        assert min(counts) == 0  # some frames are empty


class TestBackends:
    def test_detector_reads_scene(self):
        blob = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=3.0, confidence=0.7)
        frame = FrameInput.from_scene(plain_scene((blob,)))
        assert synthetic_detect(frame) == [((0.4, 0.4, 0.2, 0.2), 0.7)]

    def test_detector_skips_persons(self):
        person = Blob(
            cx=0.5, cy=0.5, rx=0.1, ry=0.2, distance_m=5.0, is_person=True
        )
        frame = FrameInput.from_scene(plain_scene((person,)))
        assert synthetic_detect(frame) == []

    def test_segment_matches_boxes(self):
        b1 = Blob(cx=0.3, cy=0.3, rx=0.1, ry=0.1, distance_m=3.0)
        b2 = Blob(cx=0.7, cy=0.7, rx=0.1, ry=0.1, distance_m=5.0)
        scene = plain_scene((b1, b2))
        frame = FrameInput.from_scene(scene)
        masks = synthetic_segment(frame, [b2.bbox(), b1.bbox()])
        index = render_index(scene)
        assert np.array_equal(masks[0], index == 1)
        assert np.array_equal(masks[1], index == 0)

    def test_segment_unknown_box_raises(self):
        frame = FrameInput.from_scene(plain_scene(()))
        with pytest.raises(BadSceneError, match="matches 0 blob"):
            synthetic_segment(frame, [(0.1, 0.1, 0.2, 0.2)])

    def test_metric_depth_is_metres(self):
        blob = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=7.0)
        scene = plain_scene((blob,))
        depth = synthetic_depth_metric(FrameInput.from_scene(scene))
        assert np.all(depth[render_index(scene) == 0] == 7.0)

    def test_relative_depth_transform(self):
        blob = Blob(cx=0.5, cy=0.5, rx=0.1, ry=0.1, distance_m=7.0)
        scene = plain_scene((blob,))
        raw = synthetic_depth_relative(FrameInput.from_scene(scene))
        expected = RELATIVE_SCALE * 7.0 / (7.0 + RELATIVE_KNEE_M)
        assert np.allclose(raw[render_index(scene) == 0], expected)
        # monotone: nearer background pixels read lower than the far plane
        assert expected < RELATIVE_SCALE * 25.0 / (25.0 + RELATIVE_KNEE_M)

    def test_unknown_names_raise(self):
        with pytest.raises(ExportError, match="unknown detector"):
            resolve_stages("nope", "synthetic", "synthetic-metric")

    def test_real_slots_need_dependencies(self):
        stages = resolve_stages("megadetector-v5", "sam", "dpt-hybrid")
        frame = FrameInput.from_scene(plain_scene(()))
        with pytest.raises(ExportDependencyError, match="torch"):
            stages.detect(frame)

    def test_synthetic_needs_scene(self):
        frame = FrameInput(
            frame_id="f", camera_id="c", timestamp_s=0.0, image_path="img.png"
        )
        with pytest.raises(ExportError, match="synthetic detector"):
            synthetic_detect(frame)


class TestFrameInput:
    def test_exactly_one_source(self):
        with pytest.raises(ValueError, match="exactly one"):
            FrameInput(frame_id="f", camera_id="c", timestamp_s=0.0)

    def test_scene_ids_must_agree(self):
        scene = plain_scene(())
        with pytest.raises(ValueError, match="disagree"):
            FrameInput(frame_id="other", camera_id="cam", timestamp_s=0.0, scene=scene)


def test_reference_scene_has_one_person():
    scene = reference_scene("camA", "camA_ref00", 6.0, seed=2)
    assert len(scene.blobs) == 1
    assert scene.blobs[0].is_person
    assert scene.blobs[0].distance_m == 6.0
