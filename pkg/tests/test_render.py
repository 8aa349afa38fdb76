import numpy as np

from rotaug import (
    CuboidPose,
    Extrinsics,
    Intrinsics,
    ObjectAnnotation,
    Sample,
    project,
    cuboid_corners,
    render_overlay,
)
from rotaug.render import FILTERED_COLOR, KEPT_COLOR


def scene(*objects):
    return Sample(
        "img.png", Intrinsics(500, 500, 320, 240), Extrinsics.identity(),
        640, 480, tuple(objects),
    )


def black(width=640, height=480):
    return np.zeros((height, width, 3), dtype=np.uint8)


class TestRenderOverlay:
    def test_centered_cube_draws_symmetric_wireframe(self):
        cube = ObjectAnnotation("c", "box", CuboidPose(np.eye(3), [0, 0, 4.0], [1.5, 1.5, 1.5]))
        sample = scene(cube)
        out, statuses = render_overlay(black(), sample, draw_legend=False)
        assert statuses[0].status == "kept"
        assert statuses[0].edges_drawn == 12

        colored = np.any(out != 0, axis=2)
        assert colored.any()
        # Every projected corner sits on drawn ink.
        for corner in cuboid_corners(cube.pose):
            u, v, _ = project(sample.intrinsics, corner)
            patch = colored[int(v) - 2 : int(v) + 3, int(u) - 2 : int(u) + 3]
            assert patch.any()
        # The wireframe of an axis-centered cube is left/right symmetric.
        left = int(colored[:, :320].sum())
        right = int(colored[:, 320:].sum())
        assert abs(left - right) <= 0.05 * max(left, right)

    def test_behind_camera_object_flagged_not_drawn(self):
        ghost = ObjectAnnotation("g", "box", CuboidPose(np.eye(3), [0, 0, -5.0], [1, 1, 1]))
        out, statuses = render_overlay(black(), scene(ghost), draw_legend=False)
        assert statuses[0].status == "behind-camera"
        assert statuses[0].edges_drawn == 0
        assert not np.any(out != 0)

    def test_filtered_objects_use_alternate_color(self):
        # Tall enough to keep vs tiny sliver that the height rule drops.
        keep = ObjectAnnotation("k", "box", CuboidPose(np.eye(3), [0, 0, 4.0], [1.5, 1.5, 1.5]))
        drop = ObjectAnnotation("d", "box", CuboidPose(np.eye(3), [1.0, 0, 4.0], [0.2, 0.01, 0.2]))
        out, statuses = render_overlay(black(), scene(keep, drop), draw_legend=False)
        assert statuses[0].status == "kept"
        assert statuses[1].status == "filtered:height"
        pixels = out.reshape(-1, 3)
        assert (pixels == np.array(KEPT_COLOR)).all(axis=1).any()
        assert (pixels == np.array(FILTERED_COLOR)).all(axis=1).any()

    def test_legend_text_is_painted(self):
        cube = ObjectAnnotation("c", "box", CuboidPose(np.eye(3), [0, 0, 4.0], [1.5, 1.5, 1.5]))
        bare, _ = render_overlay(black(), scene(cube), draw_legend=False)
        titled, _ = render_overlay(black(), scene(cube), draw_legend=True)
        assert (titled != bare).any()
