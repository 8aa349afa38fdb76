import numpy as np
import pytest

from rotaug import (
    CuboidPose,
    EulerAngles,
    Extrinsics,
    GeometryError,
    Intrinsics,
    ObjectAnnotation,
    Sample,
    TransformRecord,
    attach_canvas,
    audit_gravity_alignment,
    cuboid_corners,
    filter_objects,
    map_pixels,
    object_filter_reasons,
    project,
    pure_rotation_homography,
    transform_sample,
)
from rotaug.config import AugmentConfig

from conftest import compose_euler, make_sample, rot_x


def record_for(yaw=0.0, pitch=0.0, roll=0.0, flip_axis=None):
    euler = EulerAngles(yaw, pitch, roll)
    rotation = compose_euler(yaw, pitch, roll)
    if flip_axis is not None:
        mirrors = {"x": np.diag([-1.0, 1, 1]), "y": np.diag([1.0, -1, 1]), "z": np.diag([1.0, 1, -1])}
        operator = mirrors[flip_axis] @ rotation
    else:
        operator = rotation
    return TransformRecord(
        operator=operator,
        is_reflection=flip_axis is not None,
        euler=euler,
        flip_axis=flip_axis,
        canvas=None,
        seed_path="test",
    )


class TestTransformSample:
    def test_identity_record_is_noop(self):
        sample = make_sample(3)
        out = transform_sample(sample, record_for())
        assert out.intrinsics == sample.intrinsics
        assert (out.width, out.height) == (sample.width, sample.height)
        assert len(out.objects) == len(sample.objects)
        for a, b in zip(out.objects, sample.objects):
            np.testing.assert_array_equal(a.pose.r, b.pose.r)
            np.testing.assert_array_equal(a.pose.t, b.pose.t)
            np.testing.assert_array_equal(a.pose.size, b.pose.size)

    def test_x_mirror_moves_center_and_keeps_chirality(self):
        sample = Sample(
            "img.png", Intrinsics(500, 500, 320, 240), Extrinsics.identity(),
            640, 480,
            (ObjectAnnotation("a", "chair", CuboidPose(np.eye(3), [1, 2, 3], [1, 1, 1])),),
        )
        out = transform_sample(sample, record_for(flip_axis="x"), keep_chirality=True)
        pose = out.objects[0].pose
        np.testing.assert_allclose(pose.t, [-1, 2, 3], atol=1e-12)
        assert np.linalg.det(pose.r) == pytest.approx(1.0, abs=1e-9)

        raw = transform_sample(sample, record_for(flip_axis="x"), keep_chirality=False)
        assert np.linalg.det(raw.objects[0].pose.r) == pytest.approx(-1.0, abs=1e-9)

    def test_extrinsics_updated_by_combined_operator(self):
        sample = make_sample(1)
        rec = record_for(yaw=8, pitch=-3, roll=2, flip_axis="x")
        out = transform_sample(sample, rec)
        np.testing.assert_allclose(out.extrinsics.r, rec.operator, atol=1e-15)
        assert not out.extrinsics.is_proper

    def test_projected_corners_agree_with_homography_map(self):
        # Two routes to the augmented screen position of every corner:
        # re-project the new pose, or homography-map the old projection.
        sample = make_sample(4, seed=3)
        rng = np.random.default_rng(7)
        for _ in range(10):
            yaw, pitch, roll = rng.uniform(-1, 1, 3) * [10, 5, 5]
            rec = attach_canvas(record_for(yaw, pitch, roll), sample)
            out = transform_sample(sample, rec)
            h = pure_rotation_homography(rec.canvas.k, rec.operator, sample.intrinsics)
            for old, new in zip(sample.objects, out.objects):
                old_px = np.array(
                    [project(sample.intrinsics, c)[:2] for c in cuboid_corners(old.pose)]
                )
                mapped, valid = map_pixels(h, old_px)
                assert valid.all()
                new_px = np.array(
                    [project(rec.canvas.k, c)[:2] for c in cuboid_corners(new.pose)]
                )
                np.testing.assert_allclose(mapped, new_px, atol=1e-6)

    def test_inconsistent_record_rejected(self):
        sample = make_sample(1)
        rec = TransformRecord(
            operator=compose_euler(5, 0, 0),
            is_reflection=False,
            euler=EulerAngles(0, 0, 0),
            flip_axis=None,
            canvas=None,
            seed_path="bad",
        )
        with pytest.raises(GeometryError):
            transform_sample(sample, rec)


class TestMetricInvariants:
    def test_sizes_and_distances_preserved(self):
        sample = make_sample(5, seed=1)
        rng = np.random.default_rng(2)
        for flip in (None, "x"):
            yaw, pitch, roll = rng.uniform(-1, 1, 3) * [10, 5, 5]
            out = transform_sample(sample, record_for(yaw, pitch, roll, flip))
            for a, b in zip(out.objects, sample.objects):
                assert a.pose.size.tobytes() == b.pose.size.tobytes()
            told = np.array([o.pose.t for o in sample.objects])
            tnew = np.array([o.pose.t for o in out.objects])
            dold = np.linalg.norm(told[:, None] - told[None, :], axis=2)
            dnew = np.linalg.norm(tnew[:, None] - tnew[None, :], axis=2)
            np.testing.assert_allclose(dnew, dold, atol=1e-12)

    def test_pure_yaw_keeps_gravity_angles(self):
        sample = make_sample(4, seed=5)
        down = np.array([0.0, 1.0, 0.0])
        out = transform_sample(sample, record_for(yaw=9.0))
        for a, b in zip(out.objects, sample.objects):
            before = np.abs(b.pose.r.T @ down)
            after = np.abs(a.pose.r.T @ down)
            np.testing.assert_allclose(after, before, atol=1e-9)

    def test_double_flip_restores_sample_exactly(self):
        sample = make_sample(3, seed=8)
        for kc in (False, True):
            rec = record_for(flip_axis="x")
            once = transform_sample(sample, rec, keep_chirality=kc)
            twice = transform_sample(once, rec, keep_chirality=kc)
            assert (twice.width, twice.height) == (sample.width, sample.height)
            for a, b in zip(twice.objects, sample.objects):
                assert np.array_equal(a.pose.r, b.pose.r)
                assert np.array_equal(a.pose.t, b.pose.t)
                assert np.array_equal(a.pose.size, b.pose.size)


class TestFiltering:
    def small_object_sample(self, box_height):
        # fx = 512, z_near = 4.0: projected height is exactly
        # 512 * box_height / 4 pixels, all values binary-exact.
        k = Intrinsics(512.0, 512.0, 320.0, 240.0)
        pose = CuboidPose(np.eye(3), [0.0, 0.0, 4.25], [0.4, box_height, 0.5])
        return Sample(
            "img.png", k, Extrinsics.identity(), 640, 480,
            (ObjectAnnotation("o", "chair", pose),),
        )

    def test_threshold_is_strict_less_than(self):
        # 0.0625 * 480 = 30 px exactly.
        removed = self.small_object_sample(29 * 4 / 512)  # 29 px on screen
        assert object_filter_reasons(removed) == ["height"]
        assert len(filter_objects(removed).objects) == 0

        kept = self.small_object_sample(30 * 4 / 512)  # exactly 30 px
        assert object_filter_reasons(kept) == [None]
        assert len(filter_objects(kept).objects) == 1

    def test_invalid_depth_removed(self):
        sample = make_sample(0)
        bad = ObjectAnnotation(
            "b", "chair", CuboidPose(np.eye(3), [0, 0, -1.0], [1, 1, 1])
        )
        sample = Sample(
            sample.image_path, sample.intrinsics, sample.extrinsics,
            sample.width, sample.height, (bad,),
        )
        assert object_filter_reasons(sample) == ["depth"]

    def test_center_outside_canvas_removed(self):
        sample = make_sample(0)
        off = ObjectAnnotation(
            "c", "chair", CuboidPose(np.eye(3), [10.0, 0.0, 2.0], [1, 1, 1])
        )
        sample = Sample(
            sample.image_path, sample.intrinsics, sample.extrinsics,
            sample.width, sample.height, (off,),
        )
        assert object_filter_reasons(sample, rules=("center",)) == ["center"]

    def test_filtering_never_adds_and_disabled_preserves(self):
        sample = make_sample(4, seed=11)
        out = filter_objects(sample, rules=())
        assert out.objects == sample.objects
        filtered = filter_objects(sample)
        assert len(filtered.objects) <= len(sample.objects)

    def test_corner_overlap_knob(self):
        sample = make_sample(0)
        # Center barely inside, most corners far outside.
        wide = ObjectAnnotation(
            "w", "table", CuboidPose(np.eye(3), [0.6, 0.0, 1.0], [6.0, 0.2, 0.2])
        )
        sample = Sample(
            sample.image_path, sample.intrinsics, sample.extrinsics,
            sample.width, sample.height, (wide,),
        )
        assert object_filter_reasons(sample, rules=("center",)) == [None]
        assert object_filter_reasons(
            sample, rules=("center",), min_corner_overlap=0.9
        ) == ["overlap"]


class TestGravityAudit:
    def test_flags_misaligned_box(self):
        sample = make_sample(0)
        upright = ObjectAnnotation(
            "u", "chair", CuboidPose(rot_x(90), [0, 0, 3], [1, 1, 1])
        )
        tilted = ObjectAnnotation(
            "t", "chair", CuboidPose(np.eye(3), [0, 0, 3], [1, 1, 1])
        )
        sample = Sample(
            sample.image_path, sample.intrinsics, sample.extrinsics,
            sample.width, sample.height, (upright, tilted),
        )
        messages = audit_gravity_alignment(sample)
        assert len(messages) == 1
        assert "'t'" in messages[0]


class TestPipelinestageSelection:
    def test_pre_stage_filters_against_source_canvas(self):
        from rotaug.pipeline import augment_sample_arrays

        sample = TestFiltering().small_object_sample(29 * 4 / 512)
        image = np.zeros((480, 640, 3), dtype=np.uint8)
        cfg = AugmentConfig(p_rotation=0.0, p_flip=0.0, small_object_stage="pre")
        out, _, _, _ = augment_sample_arrays(sample, image, cfg, 0, 0)
        assert len(out.objects) == 0
