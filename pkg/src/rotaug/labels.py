"""Applying a sampled camera transform to a whole annotated sample.

A sample is one image record: intrinsics, optional world extrinsics
(identity when annotations are camera-frame, the usual case) and a list
of 3D cuboid annotations.  ``transform_sample`` rewrites all of them for
a given transform record; ``filter_objects`` then drops annotations
that the transform made invalid (behind the camera, centered off-canvas,
or too small on screen).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .canvas import CanvasSpec, content_bounds_canvas, realign_principal_point
from .errors import GeometryError
from .geometry import (
    EulerAngles,
    Extrinsics,
    Intrinsics,
    CuboidPose,
    cuboid_corners,
    flip_pose,
    mirror_matrix,
    operator_matrix,
    rotation_from_euler,
    update_cuboid_pose,
)

log = logging.getLogger(__name__)

# Camera-frame "down" under the x-right / y-down / z-forward convention.
GLOBAL_DOWN = np.array([0.0, 1.0, 0.0])

# Depth below which an object is considered degenerate for projection.
DEPTH_EPS = 0.01
SMALL_OBJECT_RATIO = 0.0625


@dataclass(frozen=True)
class ObjectAnnotation:
    id: str
    category: str
    pose: CuboidPose

    def __post_init__(self):
        if not self.category:
            raise GeometryError("object category must be non-empty")


@dataclass(frozen=True)
class Sample:
    image_path: str
    intrinsics: Intrinsics
    extrinsics: Extrinsics
    width: int
    height: int
    objects: tuple[ObjectAnnotation, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(
                f"sample dims must be positive, got {self.width}x{self.height}"
            )
        object.__setattr__(self, "objects", tuple(self.objects))


@dataclass(frozen=True)
class TransformRecord:
    """Audit record of one sampled transform.

    ``operator`` is the combined orthogonal map (mirror @ rotation when
    both fired).  ``canvas`` is attached once the record is paired with
    a sample; ``seed_path`` documents the RNG stream that produced it.
    """

    operator: np.ndarray
    is_reflection: bool
    euler: EulerAngles
    flip_axis: str | None
    canvas: CanvasSpec | None
    seed_path: str

    def __post_init__(self):
        object.__setattr__(self, "operator", operator_matrix(self.operator))

    def parts(self):
        """(rotation, mirror-or-None) whose product is ``operator``."""
        rotation = rotation_from_euler(self.euler)
        mirror = None
        if self.is_reflection:
            if self.flip_axis is None:
                raise GeometryError("reflection record must name its flip axis")
            mirror = mirror_matrix(self.flip_axis)
        composed = mirror.m @ rotation.m if mirror is not None else rotation.m
        if float(np.max(np.abs(composed - self.operator))) > 1e-9:
            raise GeometryError("record operator disagrees with euler/flip fields")
        return rotation, mirror


def canvas_for(sample: Sample, rec: TransformRecord, center_realign: bool) -> CanvasSpec:
    build = realign_principal_point if center_realign else content_bounds_canvas
    return build(sample.intrinsics, sample.width, sample.height, rec.operator)


def transform_sample(
    sample: Sample,
    rec: TransformRecord,
    keep_chirality: bool = True,
    center_realign: bool = True,
) -> Sample:
    """Rewrite intrinsics, extrinsics and every cuboid for the transform.

    The rotation part left-multiplies poses; the mirror part goes through
    :func:`flip_pose` so chirality handling stays in one place.  Filtering
    is not done here, call :func:`filter_objects` afterwards.
    """
    canvas = rec.canvas or canvas_for(sample, rec, center_realign)
    rotation, mirror = rec.parts()
    op = rec.operator
    new_ext = Extrinsics(op @ sample.extrinsics.r, op @ sample.extrinsics.t)
    new_objects = []
    for obj in sample.objects:
        pose = update_cuboid_pose(rotation, obj.pose)
        if mirror is not None:
            pose = flip_pose(mirror, pose, keep_chirality)
        new_objects.append(replace(obj, pose=pose))
    return Sample(
        image_path=sample.image_path,
        intrinsics=canvas.k,
        extrinsics=new_ext,
        width=canvas.width,
        height=canvas.height,
        objects=tuple(new_objects),
    )


def _projected_vertical_extent(k: Intrinsics, pose: CuboidPose):
    """On-screen height in pixels of the corner bounding box, or None when
    a corner is too close to (or behind) the image plane to project."""
    corners = cuboid_corners(pose)
    z = corners[:, 2]
    if np.any(z <= 1e-9):
        return None
    v = k.fy * corners[:, 1] / z + k.cy
    return float(np.max(v) - np.min(v))


def _projected_corner_fraction(k: Intrinsics, pose: CuboidPose, width, height):
    corners = cuboid_corners(pose)
    z = corners[:, 2]
    front = z > 1e-9
    if not np.any(front):
        return 0.0
    u = k.fx * corners[front, 0] / z[front] + k.cx
    v = k.fy * corners[front, 1] / z[front] + k.cy
    inside = (u >= 0) & (u <= width) & (v >= 0) & (v <= height)
    return float(np.count_nonzero(inside)) / 8.0


def object_filter_reasons(
    sample: Sample,
    rules: tuple[str, ...] = ("depth", "center", "height"),
    height_ratio: float = SMALL_OBJECT_RATIO,
    depth_eps: float = DEPTH_EPS,
    min_corner_overlap: float = 0.0,
) -> list[str | None]:
    """First matching removal reason per object, None for keepers.

    depth:  center depth <= depth_eps
    center: projected box center falls outside the canvas
    height: projected corner bbox is shorter than height_ratio * canvas
            height (strict less-than, so an exact-threshold object stays)
    overlap: fewer than min_corner_overlap of the 8 corners project
            inside the canvas (off by default)
    """
    k = sample.intrinsics
    reasons: list[str | None] = []
    for obj in sample.objects:
        pose = obj.pose
        reason = None
        z = pose.t[2]
        if "depth" in rules and z <= depth_eps:
            reason = "depth"
        if reason is None and "center" in rules:
            if z <= 1e-12:
                reason = "center"
            else:
                u = k.fx * pose.t[0] / z + k.cx
                v = k.fy * pose.t[1] / z + k.cy
                if not (0 <= u <= sample.width and 0 <= v <= sample.height):
                    reason = "center"
        if reason is None and "height" in rules:
            extent = _projected_vertical_extent(k, pose)
            if extent is not None and extent < height_ratio * sample.height:
                reason = "height"
        if reason is None and min_corner_overlap > 0.0:
            frac = _projected_corner_fraction(k, pose, sample.width, sample.height)
            if frac < min_corner_overlap:
                reason = "overlap"
        reasons.append(reason)
    return reasons


def filter_objects(
    sample: Sample,
    rules: tuple[str, ...] = ("depth", "center", "height"),
    height_ratio: float = SMALL_OBJECT_RATIO,
    depth_eps: float = DEPTH_EPS,
    min_corner_overlap: float = 0.0,
) -> Sample:
    """Drop objects the rules flag; never adds or reorders anything."""
    reasons = object_filter_reasons(
        sample, rules, height_ratio, depth_eps, min_corner_overlap
    )
    kept = tuple(o for o, r in zip(sample.objects, reasons) if r is None)
    return replace(sample, objects=kept)


def audit_gravity_alignment(sample: Sample, threshold: float = 0.9) -> list[str]:
    """Flag objects whose third orientation column is not gravity-aligned.

    Assumes camera-frame annotations with y pointing down.  This is an
    audit aid for dataset curation, not a filter.
    """
    messages = []
    for obj in sample.objects:
        alignment = abs(float(obj.pose.r[:, 2] @ GLOBAL_DOWN))
        if alignment < threshold:
            messages.append(
                f"object {obj.id!r} ({obj.category}): |up-axis . down| = "
                f"{alignment:.3f} < {threshold}"
            )
    return messages
