"""Depth-free, geometry-consistent rotation/reflection augmentation.

Rotating (or mirroring) a camera about its optical center moves pixels
by an exact homography and left-multiplies extrinsics and 3D cuboid
poses, so RGB content, intrinsics and labels can be augmented together
without any depth input.  This package implements that transform family
end to end: operator construction, canvas realignment, image warping,
label synchronization, a JSONL pipeline, and brute-force oracles that
verify 2D-3D consistency of every piece.
"""

from .canvas import CanvasSpec, content_bounds_canvas, realign_principal_point
from .config import AugmentConfig, load_config_file
from .dataset import (
    emit_record,
    emit_sample,
    load_dataset,
    parse_sample,
    record_to_dict,
    write_dataset,
)
from .errors import (
    BehindCameraError,
    CanvasTooLargeError,
    DataError,
    DegenerateDepthError,
    ExcessiveRotationError,
    GeometryError,
    InvalidHomographyError,
)
from .geometry import (
    BOX_EDGES,
    CORNER_SIGNS,
    AffineDecomposition,
    CuboidPose,
    EulerAngles,
    Extrinsics,
    Intrinsics,
    Reflection,
    RotationSO3,
    admissible_affine_decompose,
    compose_flip_rotation,
    cuboid_corners,
    flip_pose,
    map_pixels,
    mirror_matrix,
    normalize_pixel,
    operator_matrix,
    project,
    pure_rotation_homography,
    rotate_camera_point,
    rotation_from_euler,
    update_cuboid_pose,
    update_extrinsics,
    world_to_camera,
)
from .labels import (
    ObjectAnnotation,
    Sample,
    TransformRecord,
    audit_gravity_alignment,
    filter_objects,
    object_filter_reasons,
    transform_sample,
)
from .pipeline import augment_sample_arrays, run_augment, run_render, run_verify
from .render import render_overlay
from .sampling import attach_canvas, rng_for, sample_transform
from .warp import load_png, save_png, warp_image, warp_mask

__version__ = "0.1.0"
