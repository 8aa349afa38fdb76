"""Closed-form geometry for camera-centric rotation and reflection.

Conventions used throughout the package:

* Camera frame: x right, y down, z forward (optical axis).  Points are
  column vectors and operators act by left multiplication.
* Euler angles are degrees: yaw about y, pitch about x, roll about z,
  composed as ``R = Rz(roll) @ Rx(pitch) @ Ry(yaw)``.
* Pixels are homogeneous ``[u, v, 1]``.  The continuous image domain is
  ``[0, width] x [0, height]`` and pixel (i, j) is centered at
  ``(i + 0.5, j + 0.5)``.
* Cuboid corners are the offsets ``(+-W/2, +-H/2, +-L/2)`` enumerated in
  the fixed sign order ``---, --+, -+-, -++, +--, +-+, ++-, +++``
  (x slowest, z fastest).

A rotation of the camera about its optical center moves every pixel by
the homography ``H = K_dst @ R @ K_src^-1`` regardless of scene depth;
the same ``R`` left-multiplies extrinsics and object poses.  Reflections
follow the identical algebra but invert chirality, which the
``keep_chirality`` option of :func:`flip_pose` repairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, DegenerateDepthError, GeometryError

# Construction tolerances for orthogonal operators, and the homogeneous-w
# cutoff below which a mapped pixel is treated as a point at infinity.
ORTHO_TOL = 1e-9
DET_TOL = 1e-9
W_EPS = 1e-12

# Corner sign pattern, lexicographic with -1 before +1 (x slowest, z fastest).
CORNER_SIGNS = np.array(
    [
        [1.0 if i & 4 else -1.0, 1.0 if i & 2 else -1.0, 1.0 if i & 1 else -1.0]
        for i in range(8)
    ]
)

# The 12 box edges as index pairs into the corner ordering above
# (corners joined by an edge differ in exactly one sign).
BOX_EDGES = (
    (0, 1), (0, 2), (0, 4),
    (1, 3), (1, 5),
    (2, 3), (2, 6),
    (3, 7),
    (4, 5), (4, 6),
    (5, 7),
    (6, 7),
)

_MIRRORS = {
    "x": np.diag([-1.0, 1.0, 1.0]),
    "y": np.diag([1.0, -1.0, 1.0]),
    "z": np.diag([1.0, 1.0, -1.0]),
}


def _as_mat3(value, name: str) -> np.ndarray:
    m = np.array(value, dtype=np.float64)
    if m.shape != (3, 3):
        raise GeometryError(f"{name} must be 3x3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GeometryError(f"{name} contains non-finite entries")
    return m


def _as_vec3(value, name: str) -> np.ndarray:
    v = np.array(value, dtype=np.float64).reshape(-1)
    if v.shape != (3,):
        raise GeometryError(f"{name} must have 3 components, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"{name} contains non-finite entries")
    return v


def orthogonality_defect(m: np.ndarray) -> float:
    """Max-abs deviation of ``m.T @ m`` from the identity."""
    return float(np.max(np.abs(m.T @ m - np.eye(3))))


def _check_orthogonal(m: np.ndarray, name: str, tol: float = ORTHO_TOL) -> None:
    defect = orthogonality_defect(m)
    if defect > tol:
        raise GeometryError(f"{name} is not orthogonal (defect {defect:.3e} > {tol:g})")


@dataclass(frozen=True)
class EulerAngles:
    """Yaw/pitch/roll in degrees about the camera y/x/z axes."""

    yaw: float
    pitch: float
    roll: float

    def __post_init__(self):
        for field in ("yaw", "pitch", "roll"):
            v = getattr(self, field)
            if not math.isfinite(v):
                raise GeometryError(f"{field} must be finite, got {v!r}")


@dataclass(frozen=True)
class RotationSO3:
    """Proper rotation: orthogonal 3x3 matrix with det +1."""

    m: np.ndarray

    def __post_init__(self):
        m = _as_mat3(self.m, "rotation")
        _check_orthogonal(m, "rotation")
        det = float(np.linalg.det(m))
        if abs(det - 1.0) > DET_TOL:
            raise GeometryError(f"rotation determinant {det!r} is not +1")
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "RotationSO3":
        return cls(np.eye(3))


@dataclass(frozen=True)
class Reflection:
    """Improper orthogonal operator: 3x3, det -1 (a mirror)."""

    m: np.ndarray

    def __post_init__(self):
        m = _as_mat3(self.m, "reflection")
        _check_orthogonal(m, "reflection")
        det = float(np.linalg.det(m))
        if abs(det + 1.0) > DET_TOL:
            raise GeometryError(f"reflection determinant {det!r} is not -1")
        object.__setattr__(self, "m", m)


def operator_matrix(op) -> np.ndarray:
    """Coerce a RotationSO3, Reflection or raw matrix to a validated
    orthogonal 3x3 array (det +1 or -1)."""
    if isinstance(op, (RotationSO3, Reflection)):
        return op.m
    m = _as_mat3(op, "operator")
    _check_orthogonal(m, "operator")
    det = float(np.linalg.det(m))
    if abs(abs(det) - 1.0) > DET_TOL:
        raise GeometryError(f"operator determinant {det!r} is not +-1")
    return m


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics with zero skew.  Units are pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        for field in ("fx", "fy", "cx", "cy"):
            v = getattr(self, field)
            if not math.isfinite(v):
                raise GeometryError(f"{field} must be finite, got {v!r}")
        if self.fx <= 0 or self.fy <= 0:
            raise GeometryError(
                f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}"
            )

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def inverse_matrix(self) -> np.ndarray:
        # Closed form; always exists because fx, fy > 0.
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )

    @classmethod
    def from_matrix(cls, k) -> "Intrinsics":
        m = _as_mat3(k, "intrinsics")
        expected_zero = (m[0, 1], m[1, 0], m[2, 0], m[2, 1])
        if any(v != 0.0 for v in expected_zero) or m[2, 2] != 1.0:
            raise GeometryError("intrinsics matrix must be [[fx,0,cx],[0,fy,cy],[0,0,1]]")
        return cls(float(m[0, 0]), float(m[1, 1]), float(m[0, 2]), float(m[1, 2]))


@dataclass(frozen=True)
class Extrinsics:
    """World-to-camera transform ``p_cam = r @ p_world + t``.

    ``r`` is orthogonal within 1e-9.  det(r) is +1 for ordinary poses;
    reflection augmentation intentionally produces det -1 (the stored
    operator is then improper and ``is_proper`` is False).
    """

    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        r = self.r.m if isinstance(self.r, (RotationSO3, Reflection)) else self.r
        r = _as_mat3(r, "extrinsic rotation")
        _check_orthogonal(r, "extrinsic rotation")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", _as_vec3(self.t, "extrinsic translation"))

    @property
    def is_proper(self) -> bool:
        return float(np.linalg.det(self.r)) > 0.0

    @classmethod
    def identity(cls) -> "Extrinsics":
        return cls(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class CuboidPose:
    """3D box as (orientation, center, side lengths) in the camera frame.

    ``size`` is (W, H, L) along the box's local x/y/z axes, all positive.
    ``r`` is orthogonal; raw (non-chirality-preserving) flips store an
    improper matrix here by design.
    """

    r: np.ndarray
    t: np.ndarray
    size: np.ndarray

    def __post_init__(self):
        r = self.r.m if isinstance(self.r, (RotationSO3, Reflection)) else self.r
        r = _as_mat3(r, "pose rotation")
        _check_orthogonal(r, "pose rotation")
        size = _as_vec3(self.size, "pose size")
        if np.any(size <= 0):
            raise GeometryError(f"size components must be positive, got {size}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", _as_vec3(self.t, "pose translation"))
        object.__setattr__(self, "size", size)


def _axis_rotation(axis: int, degrees: float) -> np.ndarray:
    c = math.cos(math.radians(degrees))
    s = math.sin(math.radians(degrees))
    m = np.eye(3)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m[i, i] = c
    m[j, j] = c
    m[i, j] = -s
    m[j, i] = s
    return m


def rotation_from_euler(angles: EulerAngles) -> RotationSO3:
    """Build ``R = Rz(roll) @ Rx(pitch) @ Ry(yaw)`` (degrees).

    Yaw turns the camera about its vertical (y, down) axis, pitch about
    the lateral x axis, roll about the optical z axis.
    """
    r_yaw = _axis_rotation(1, angles.yaw)
    r_pitch = _axis_rotation(0, angles.pitch)
    r_roll = _axis_rotation(2, angles.roll)
    return RotationSO3(r_roll @ r_pitch @ r_yaw)


def mirror_matrix(axis: str) -> Reflection:
    """Axis-aligned mirror; ``"x"`` is the usual horizontal image flip."""
    try:
        return Reflection(_MIRRORS[axis].copy())
    except KeyError:
        raise GeometryError(f"flip axis must be one of x/y/z, got {axis!r}") from None


def world_to_camera(ext: Extrinsics, point_world) -> np.ndarray:
    """Map a world-frame point into the camera frame: ``r @ p + t``."""
    return ext.r @ _as_vec3(point_world, "point") + ext.t


def rotate_camera_point(op, point_cam) -> np.ndarray:
    """Re-express a camera-frame point in the rotated camera frame."""
    return operator_matrix(op) @ _as_vec3(point_cam, "point")


def update_extrinsics(op, ext: Extrinsics) -> Extrinsics:
    """Extrinsics of the rotated camera: ``(op @ r, op @ t)``."""
    m = operator_matrix(op)
    return Extrinsics(m @ ext.r, m @ ext.t)


def cuboid_corners(pose: CuboidPose) -> np.ndarray:
    """The 8 corners as an (8, 3) array, rows in the CORNER_SIGNS order."""
    offsets = CORNER_SIGNS * (pose.size / 2.0)
    return offsets @ pose.r.T + pose.t


def update_cuboid_pose(op, pose: CuboidPose) -> CuboidPose:
    """Left-multiply orientation and center by the camera operator.

    Side lengths are untouched, so corners(update(op, pose)) equals
    op applied to corners(pose) exactly up to float association.
    """
    m = operator_matrix(op)
    return CuboidPose(m @ pose.r, m @ pose.t, pose.size)


def project(k: Intrinsics, point_cam) -> np.ndarray:
    """Pinhole projection to a homogeneous pixel ``[u, v, 1]``.

    Raises DegenerateDepthError when |z| <= 1e-12 and BehindCameraError
    for z < 0.
    """
    p = _as_vec3(point_cam, "point")
    z = p[2]
    if abs(z) <= W_EPS:
        raise DegenerateDepthError(f"depth {z!r} too close to the image plane")
    if z < 0:
        raise BehindCameraError(f"point has negative depth {z!r}")
    return np.array([k.fx * p[0] / z + k.cx, k.fy * p[1] / z + k.cy, 1.0])


def normalize_pixel(p) -> np.ndarray:
    """Scale a homogeneous pixel so its third component is 1."""
    v = _as_vec3(p, "pixel")
    if v[2] <= W_EPS:
        raise DegenerateDepthError(f"homogeneous w {v[2]!r} is at infinity")
    return np.array([v[0] / v[2], v[1] / v[2], 1.0])


def pure_rotation_homography(k_dst: Intrinsics, op, k_src: Intrinsics) -> np.ndarray:
    """Pixel map induced by rotating/mirroring the camera in place.

    ``H = K_dst @ op @ K_src^-1``; depth never enters, so the same H is
    valid for every scene.  Apply with :func:`normalize_pixel` or
    :func:`map_pixels` (division by the third component).
    """
    return k_dst.matrix() @ operator_matrix(op) @ k_src.inverse_matrix()


def map_pixels(h, uv) -> tuple[np.ndarray, np.ndarray]:
    """Apply a homography to (N, 2) pixel coordinates.

    Returns (mapped (N, 2), valid (N,)); rows with homogeneous
    w <= 1e-12 are marked invalid and left as NaN.
    """
    m = _as_mat3(h, "homography")
    pts = np.asarray(uv, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected (N, 2) pixel array, got {pts.shape}")
    hom = pts @ m[:, :2].T + m[:, 2]
    w = hom[:, 2]
    valid = w > W_EPS
    out = np.full_like(pts, np.nan)
    out[valid] = hom[valid, :2] / w[valid, None]
    return out, valid


def flip_pose(mirror, pose: CuboidPose, keep_chirality: bool) -> CuboidPose:
    """Reflect a cuboid pose through the camera optical center.

    keep_chirality=False is the raw update ``(M @ r, M @ t)`` whose
    orientation is improper (det -1).  keep_chirality=True re-expresses
    the mirror in the box's local frame as well, ``(M @ r @ M, M @ t)``,
    which restores det +1; for the axis-aligned mirrors this only
    permutes the corner sign pattern, so the corner set is unchanged.
    """
    m = operator_matrix(mirror)
    if float(np.linalg.det(m)) > 0:
        raise GeometryError("flip_pose requires an improper (det -1) operator")
    r_new = m @ pose.r @ m if keep_chirality else m @ pose.r
    return CuboidPose(r_new, m @ pose.t, pose.size)


def compose_flip_rotation(mirror, rotation, ext: Extrinsics):
    """Rotate first, then mirror: combined operator ``M @ R``.

    Returns the det -1 operator together with the updated extrinsics
    ``(M @ R @ r, M @ R @ t)``.  The operator feeds
    :func:`pure_rotation_homography` for the matching image warp.
    """
    m = operator_matrix(mirror)
    r = operator_matrix(rotation)
    op = m @ r
    return op, Extrinsics(op @ ext.r, op @ ext.t)


@dataclass(frozen=True)
class AffineDecomposition:
    """Outcome of the uniform-scale admissibility test.

    accepted=True carries ``a = scale * orthogonal``; accepted=False
    carries only how far ``a.T @ a`` is from a scaled identity.
    """

    accepted: bool
    scale: float | None
    orthogonal: np.ndarray | None
    max_deviation: float


def admissible_affine_decompose(a, tol: float = 1e-9) -> AffineDecomposition:
    """Test whether a linear map preserves the (R, t, size) cuboid form.

    A box with arbitrary orientation stays an axis-orthogonal cuboid
    under ``a`` for every orientation only when ``a.T @ a`` is a scaled
    identity, i.e. ``a`` is a uniform scaling times an orthogonal
    operator.  Anything else (non-uniform scale, shear) is rejected.
    """
    m = _as_mat3(a, "affine")
    det = float(np.linalg.det(m))
    if abs(det) <= tol:
        raise GeometryError(f"affine map is singular (det {det!r})")
    gram = m.T @ m
    lam_sq = float(np.trace(gram)) / 3.0
    deviation = float(np.max(np.abs(gram - lam_sq * np.eye(3))))
    if deviation > tol:
        return AffineDecomposition(False, None, None, deviation)
    lam = math.sqrt(lam_sq)
    return AffineDecomposition(True, lam, m / lam, deviation)
