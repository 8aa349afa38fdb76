"""Shared test helpers.

The rotation builders here are intentionally independent of the package
(plain math.cos/sin formulas) so tests can cross-check construction.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from rotaug import (
    CuboidPose,
    Extrinsics,
    Intrinsics,
    ObjectAnnotation,
    Sample,
)


def rot_x(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def compose_euler(yaw: float, pitch: float, roll: float) -> np.ndarray:
    return rot_z(roll) @ rot_x(pitch) @ rot_y(yaw)


def random_pose(rng: np.random.Generator, z_center: float = 4.0) -> CuboidPose:
    r = compose_euler(*rng.uniform(-180, 180, size=3))
    t = rng.uniform(-1.5, 1.5, size=3) + np.array([0.0, 0.0, z_center])
    size = rng.uniform(0.2, 2.5, size=3)
    return CuboidPose(r, t, size)


def sinusoid_image(width: int, height: int) -> np.ndarray:
    """Band-limited RGB test card; smooth enough to survive resampling."""
    x = np.arange(width)[None, :]
    y = np.arange(height)[:, None]
    r = 127.5 + 55.0 * np.sin(2 * np.pi * x / 64.0) + 35.0 * np.cos(2 * np.pi * y / 48.0)
    g = 127.5 + 45.0 * np.cos(2 * np.pi * (x + y) / 80.0) + 30.0 * np.sin(2 * np.pi * y / 56.0)
    b = 127.5 + 50.0 * np.sin(2 * np.pi * (x - y) / 72.0)
    img = np.stack([np.broadcast_to(c, (height, width)) for c in (r, g, b)], axis=2)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


@pytest.fixture
def k_vga() -> Intrinsics:
    return Intrinsics(500.0, 500.0, 320.0, 240.0)


def make_sample(
    n_objects: int = 3, seed: int = 0, width: int = 640, height: int = 480
) -> Sample:
    rng = np.random.default_rng(seed)
    objects = tuple(
        ObjectAnnotation(f"obj{i}", "chair", random_pose(rng))
        for i in range(n_objects)
    )
    return Sample(
        image_path="img.png",
        intrinsics=Intrinsics(500.0, 500.0, width / 2.0, height / 2.0),
        extrinsics=Extrinsics.identity(),
        width=width,
        height=height,
        objects=objects,
    )
