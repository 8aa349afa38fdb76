"""Wireframe overlays of projected cuboids for visual inspection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .geometry import BOX_EDGES, cuboid_corners
from .labels import Sample, object_filter_reasons

KEPT_COLOR = (255, 215, 0)
FILTERED_COLOR = (240, 70, 70)
_Z_EPS = 1e-9


@dataclass(frozen=True)
class ObjectStatus:
    id: str
    category: str
    status: str  # "kept", "filtered:<reason>" or "behind-camera"
    edges_drawn: int


def render_overlay(
    image: np.ndarray,
    sample: Sample,
    draw_legend: bool = True,
    filter_rules: tuple[str, ...] = ("depth", "center", "height"),
) -> tuple[np.ndarray, list[ObjectStatus]]:
    """Draw the 12 projected edges of every cuboid onto the image.

    Kept objects are yellow, objects the filter rules would drop are
    red.  An edge is drawn only when both endpoints are in front of the
    camera; fully behind-camera objects are flagged instead of drawn.
    """
    img = Image.fromarray(np.asarray(image, dtype=np.uint8)).convert("RGB")
    draw = ImageDraw.Draw(img)
    k = sample.intrinsics
    reasons = object_filter_reasons(sample, rules=filter_rules)

    statuses = []
    for obj, reason in zip(sample.objects, reasons):
        corners = cuboid_corners(obj.pose)
        z = corners[:, 2]
        front = z > _Z_EPS
        if not np.any(front):
            statuses.append(ObjectStatus(obj.id, obj.category, "behind-camera", 0))
            continue
        u = np.where(front, k.fx * corners[:, 0] / np.where(front, z, 1.0) + k.cx, 0.0)
        v = np.where(front, k.fy * corners[:, 1] / np.where(front, z, 1.0) + k.cy, 0.0)
        color = KEPT_COLOR if reason is None else FILTERED_COLOR
        drawn = 0
        for a, b in BOX_EDGES:
            if front[a] and front[b]:
                draw.line((u[a], v[a], u[b], v[b]), fill=color, width=2)
                drawn += 1
        status = "kept" if reason is None else f"filtered:{reason}"
        statuses.append(ObjectStatus(obj.id, obj.category, status, drawn))

    if draw_legend:
        for i, st in enumerate(statuses):
            text = f"{st.id} {st.category}: {st.status}"
            color = KEPT_COLOR if st.status == "kept" else FILTERED_COLOR
            draw.text((4, 4 + 12 * i), text, fill=color)

    return np.asarray(img), statuses
