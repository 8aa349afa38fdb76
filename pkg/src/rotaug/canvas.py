"""Output-canvas sizing so a rotated view loses no pixels.

Rotating about pitch/roll moves the image footprint off the original
rectangle.  The centered mode keeps every valid pixel AND keeps the
principal point at the canvas center:

1. map the four source corners through ``K0 @ op @ K_src^-1`` where K0
   is the source intrinsics with principal point (0, 0);
2. take ``x_max = max |u'|`` and ``y_max = max |v'|`` over the mapped
   corners (half extents of the smallest axis-aligned box centered on
   the optical axis);
3. the canvas is ``ceil(2*x_max) x ceil(2*y_max)`` with the principal
   point moved to its exact center (the sub-pixel ceil remainder is
   split evenly, so centering is exact).

The content-bounds mode (the realignment ablation) instead crops to the
axis-aligned bounding box of the mapped corners translated to positive
coordinates; it also keeps every pixel, but the principal point lands
wherever the box puts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExcessiveRotationError, GeometryError
from .geometry import Intrinsics, W_EPS, operator_matrix


@dataclass(frozen=True)
class CanvasSpec:
    """Target intrinsics plus integer canvas dimensions."""

    k: Intrinsics
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(
                f"canvas dims must be positive, got {self.width}x{self.height}"
            )


def _mapped_corners(k_src: Intrinsics, src_width, src_height, op) -> np.ndarray:
    if src_width <= 0 or src_height <= 0:
        raise GeometryError(
            f"source dims must be positive, got {src_width}x{src_height}"
        )
    w, h = float(src_width), float(src_height)
    corners = np.array([[0.0, 0.0, 1.0], [w, 0.0, 1.0], [0.0, h, 1.0], [w, h, 1.0]])
    k0 = Intrinsics(k_src.fx, k_src.fy, 0.0, 0.0)
    h0 = k0.matrix() @ operator_matrix(op) @ k_src.inverse_matrix()
    mapped = corners @ h0.T
    depths = mapped[:, 2]
    if np.any(depths <= W_EPS):
        raise ExcessiveRotationError(
            "a source corner ray rotated 90 degrees or more off-axis; "
            "keep pitch/roll below the field-of-view half-angle"
        )
    return mapped[:, :2] / depths[:, None]


def _snap_ceil(v: float) -> int:
    # Guard against float noise in the corner chain pushing an exact
    # integer extent (e.g. the 90-degree roll) one pixel up; the shaved
    # margin is ~1e-9 px, far below the 0.5 px containment slack.
    return max(1, math.ceil(v - 1e-9 * max(1.0, abs(v))))


def realign_principal_point(
    k_src: Intrinsics, src_width: int, src_height: int, op
) -> CanvasSpec:
    """Centered canvas for the rotated view (steps 1-3 above)."""
    uv = _mapped_corners(k_src, src_width, src_height, op)
    x_max = float(np.max(np.abs(uv[:, 0])))
    y_max = float(np.max(np.abs(uv[:, 1])))
    width = _snap_ceil(2.0 * x_max)
    height = _snap_ceil(2.0 * y_max)
    k_c = Intrinsics(k_src.fx, k_src.fy, width / 2.0, height / 2.0)
    return CanvasSpec(k_c, width, height)


def content_bounds_canvas(
    k_src: Intrinsics, src_width: int, src_height: int, op
) -> CanvasSpec:
    """Ablation canvas: bounding box of the content, no recentering."""
    uv = _mapped_corners(k_src, src_width, src_height, op)
    u_min, v_min = np.min(uv, axis=0)
    u_max, v_max = np.max(uv, axis=0)
    width = _snap_ceil(float(u_max - u_min))
    height = _snap_ceil(float(v_max - v_min))
    k_c = Intrinsics(k_src.fx, k_src.fy, -float(u_min), -float(v_min))
    return CanvasSpec(k_c, width, height)
