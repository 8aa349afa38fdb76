"""Brute-force verifiers for 2D-3D consistency.

Everything here re-derives projections from first principles (inline
pinhole arithmetic, raw matrix products) instead of calling the package
projection/homography helpers, so a systematic error in those helpers
cannot cancel out of the comparison.  All randomness is seeded and the
seed is echoed in each report.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .canvas import CanvasSpec, realign_principal_point
from .config import AugmentConfig
from .geometry import (
    CuboidPose,
    EulerAngles,
    Intrinsics,
    admissible_affine_decompose,
    cuboid_corners,
    flip_pose,
    mirror_matrix,
    operator_matrix,
    pure_rotation_homography,
    rotation_from_euler,
    update_cuboid_pose,
)


@dataclass(frozen=True)
class ProjectiveCheck:
    max_residual_px: float
    accepted: int
    trials: int
    seed: int


@dataclass(frozen=True)
class AffineCheck:
    agrees: bool
    closed_form_accepts: bool
    brute_force_accepts: bool
    samples: int
    seed: int


def check_projective_consistency(
    h,
    k_src: Intrinsics,
    src_width,
    src_height,
    op,
    k_dst: Intrinsics,
    dst_width,
    dst_height,
    trials: int = 100_000,
    seed: int = 0,
    depth_range: tuple[float, float] = (0.3, 20.0),
) -> ProjectiveCheck:
    """Compare H-mapped pixels against rotate-then-reproject.

    Random scene points are drawn in the source frustum at log-uniform
    depths; points that leave the destination frustum after the rotation
    are rejected, since the identity is only claimed for points imaged
    by both views.  Returns the max pixel residual over survivors.
    """
    m = operator_matrix(op)
    h = np.asarray(h, dtype=np.float64)
    rng = np.random.default_rng(seed)

    u = rng.uniform(0.0, float(src_width), size=trials)
    v = rng.uniform(0.0, float(src_height), size=trials)
    lo, hi = depth_range
    z = np.exp(rng.uniform(math.log(lo), math.log(hi), size=trials))

    # Independent back-projection: ray through the pixel, scaled by depth.
    x = (u - k_src.cx) / k_src.fx * z
    y = (v - k_src.cy) / k_src.fy * z
    pts = np.stack([x, y, z], axis=0)

    rot = m @ pts
    zr = rot[2]
    keep = zr > 1e-9
    # Independent reprojection with the destination intrinsics.
    ua = k_dst.fx * rot[0, keep] / zr[keep] + k_dst.cx
    va = k_dst.fy * rot[1, keep] / zr[keep] + k_dst.cy
    inside = (ua >= 0) & (ua <= dst_width) & (va >= 0) & (va <= dst_height)
    ua, va = ua[inside], va[inside]

    uk = u[keep][inside]
    vk = v[keep][inside]
    hom = h @ np.stack([uk, vk, np.ones_like(uk)], axis=0)
    w = hom[2]
    ok = w > 1e-12
    ub = hom[0, ok] / w[ok]
    vb = hom[1, ok] / w[ok]
    ua, va = ua[ok], va[ok]

    accepted = int(ua.size)
    if accepted == 0:
        return ProjectiveCheck(float("nan"), 0, trials, seed)
    residual = float(np.max(np.maximum(np.abs(ua - ub), np.abs(va - vb))))
    return ProjectiveCheck(residual, accepted, trials, seed)


def _corner_oracle(pose: CuboidPose) -> np.ndarray:
    # Inline corner enumeration, same documented sign order as the package.
    signs = np.array(
        [[sx, sy, sz] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)]
    )
    return (signs * (pose.size / 2.0)) @ pose.r.T + pose.t


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def check_cuboid_consistency(
    pose: CuboidPose, op, keep_chirality: bool = False, mirror=None
) -> float:
    """Corner residual between the pose-update path and op @ corners.

    For proper operators and raw flips the corner order is preserved and
    compared elementwise; the chirality-preserving flip permutes corners,
    so its residual is the symmetric set distance.
    """
    m = operator_matrix(op)
    expected = _corner_oracle(pose) @ m.T

    det = float(np.linalg.det(m))
    if det > 0:
        updated = update_cuboid_pose(m, pose)
        permuted = False
    else:
        mirror_m = m if mirror is None else operator_matrix(mirror)
        rotation_part = mirror_m @ m  # mirror is involutive
        intermediate = update_cuboid_pose(rotation_part, pose)
        updated = flip_pose(mirror_m, intermediate, keep_chirality)
        permuted = keep_chirality
    actual = cuboid_corners(updated)

    if permuted:
        return _hausdorff(actual, expected)
    return float(np.max(np.abs(actual - expected)))


def random_orthogonal(rng: np.random.Generator, proper: bool | None = None) -> np.ndarray:
    """Haar-ish orthogonal sample via QR; proper=None mixes both signs."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    det = float(np.linalg.det(q))
    if proper is None:
        flip = bool(rng.random() < 0.5)
    else:
        flip = (det > 0) != proper
    if flip:
        q = q.copy()
        q[:, 0] = -q[:, 0]
    return q


def brute_force_affine_check(
    a, samples: int = 1000, tol: float = 1e-9, seed: int = 0
) -> AffineCheck:
    """Cross-check the closed-form admissibility test by sampling O(3).

    ``a`` preserves the cuboid factorization for every orientation iff
    (a @ o1).T @ (a @ o1) is diagonal for all orthogonal o1; random o1 of
    both determinant signs probe that condition directly.
    """
    m = np.asarray(a, dtype=np.float64)
    closed = admissible_affine_decompose(m, tol).accepted
    rng = np.random.default_rng(seed)
    brute = True
    for _ in range(samples):
        o1 = random_orthogonal(rng)
        gram = (m @ o1).T @ (m @ o1)
        off = gram - np.diag(np.diag(gram))
        if float(np.max(np.abs(off))) > tol:
            brute = False
            break
    return AffineCheck(closed == brute, closed, brute, samples, seed)


def check_canvas_containment(
    k_src: Intrinsics,
    src_width,
    src_height,
    op,
    canvas: CanvasSpec,
    grid: int = 100,
) -> float:
    """Worst overflow (px) of densely sampled source pixels beyond the
    canvas; <= 0 means everything landed inside."""
    h = pure_rotation_homography(canvas.k, op, k_src)
    us = np.linspace(0.0, float(src_width), grid)
    vs = np.linspace(0.0, float(src_height), grid)
    uu, vv = np.meshgrid(us, vs)
    pts = np.stack([uu.ravel(), vv.ravel(), np.ones(uu.size)], axis=0)
    mapped = h @ pts
    w = mapped[2]
    if np.any(w <= 1e-12):
        return float("inf")
    mu = mapped[0] / w
    mv = mapped[1] / w
    overflow = max(
        float(np.max(-mu)),
        float(np.max(mu - canvas.width)),
        float(np.max(-mv)),
        float(np.max(mv - canvas.height)),
    )
    return overflow


def _sample_operator(rng: np.random.Generator, cfg: AugmentConfig):
    euler = EulerAngles(
        yaw=float(rng.uniform(-cfg.yaw_range, cfg.yaw_range)),
        pitch=float(rng.uniform(-cfg.pitch_range, cfg.pitch_range)),
        roll=float(rng.uniform(-cfg.roll_range, cfg.roll_range)),
    )
    op = rotation_from_euler(euler).m
    if rng.random() < cfg.p_flip:
        op = mirror_matrix(cfg.flip_axis).m @ op
    return op


def selfcheck_report(
    seed: int = 0,
    operators: int = 25,
    trials_per_operator: int = 20_000,
    affine_samples: int = 40,
    pixel_tol: float = 1e-6,
    corner_tol: float = 1e-9,
) -> dict:
    """Synthetic end-to-end verification run; no dataset required.

    Exercises projective consistency, cuboid equivariance (rotations and
    both flip flavors), canvas containment, the affine cross-check, and
    a sensitivity canary proving the projective check can actually fail.
    """
    rng = np.random.default_rng(seed)
    cfg = AugmentConfig(seed=seed)
    k_src = Intrinsics(500.0, 500.0, 320.0, 240.0)
    width, height = 640, 480

    max_residual = 0.0
    max_overflow = -float("inf")
    for _ in range(operators):
        op = _sample_operator(rng, cfg)
        canvas = realign_principal_point(k_src, width, height, op)
        h = pure_rotation_homography(canvas.k, op, k_src)
        res = check_projective_consistency(
            h, k_src, width, height, op, canvas.k, canvas.width, canvas.height,
            trials=trials_per_operator, seed=int(rng.integers(2**63)),
        )
        max_residual = max(max_residual, res.max_residual_px)
        max_overflow = max(
            max_overflow,
            check_canvas_containment(k_src, width, height, op, canvas, grid=40),
        )

    max_corner = 0.0
    for _ in range(operators):
        pose = CuboidPose(
            random_orthogonal(rng, proper=True),
            rng.uniform(-2.0, 2.0, size=3) + np.array([0.0, 0.0, 4.0]),
            rng.uniform(0.2, 3.0, size=3),
        )
        rot = random_orthogonal(rng, proper=True)
        max_corner = max(max_corner, check_cuboid_consistency(pose, rot))
        mir = mirror_matrix("x")
        max_corner = max(
            max_corner, check_cuboid_consistency(pose, mir.m, keep_chirality=False)
        )
        max_corner = max(
            max_corner, check_cuboid_consistency(pose, mir.m, keep_chirality=True)
        )

    affine_disagreements = 0
    for i in range(affine_samples):
        if i % 2 == 0:
            a = float(rng.uniform(0.5, 4.0)) * random_orthogonal(rng)
        else:
            a = rng.normal(size=(3, 3))
            while abs(np.linalg.det(a)) < 0.1:
                a = rng.normal(size=(3, 3))
        check = brute_force_affine_check(a, samples=200, seed=int(rng.integers(2**63)))
        if not check.agrees:
            affine_disagreements += 1

    # Canary: a corrupted homography must be flagged, otherwise the
    # projective check has no teeth.
    op = _sample_operator(rng, cfg)
    canvas = realign_principal_point(k_src, width, height, op)
    h_bad = pure_rotation_homography(canvas.k, op, k_src).copy()
    h_bad[0, 0] += 1e-3
    canary = check_projective_consistency(
        h_bad, k_src, width, height, op, canvas.k, canvas.width, canvas.height,
        trials=trials_per_operator, seed=seed,
    )

    report = {
        "seed": seed,
        "operators": operators,
        "trials_per_operator": trials_per_operator,
        "max_pixel_residual": max_residual,
        "pixel_tol": pixel_tol,
        "max_canvas_overflow_px": max_overflow,
        "max_corner_residual": max_corner,
        "corner_tol": corner_tol,
        "affine_samples": affine_samples,
        "affine_disagreements": affine_disagreements,
        "canary_residual": canary.max_residual_px,
        "canary_detected": bool(canary.max_residual_px > 0.1),
    }
    report["ok"] = bool(
        max_residual <= pixel_tol
        and max_overflow <= 0.5
        and max_corner <= corner_tol
        and affine_disagreements == 0
        and report["canary_detected"]
    )
    return report


def report_asdict(check) -> dict:
    return asdict(check)
