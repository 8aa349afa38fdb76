"""Augmentation configuration.

Defaults follow the recipe that works well for indoor monocular 3D
detection: rotate with probability 0.8 inside yaw +-10 / pitch +-5 /
roll +-5 degrees, horizontally flip with probability 0.5, compose both
when both fire, keep chirality, and recenter the principal point.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 fallback
    import tomli as tomllib

from .errors import DataError

# Hard cap on pitch/roll ranges; beyond the field-of-view half-angle a
# corner ray can rotate behind the image plane.
FOV_GUARD_DEG = 45.0


@dataclass(frozen=True)
class AugmentConfig:
    p_rotation: float = 0.8
    yaw_range: float = 10.0
    pitch_range: float = 5.0
    roll_range: float = 5.0
    p_flip: float = 0.5
    flip_axis: str = "x"
    keep_chirality: bool = True
    center_realign: bool = True
    small_object_filter: bool = True
    small_object_ratio: float = 0.0625
    small_object_stage: str = "post"  # measure height before or after the transform
    min_corner_overlap: float = 0.0  # 0 disables the stricter overlap rule
    depth_eps: float = 0.01
    seed: int = 0
    variants_per_sample: int = 1

    def __post_init__(self):
        for name in ("p_rotation", "p_flip"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DataError(f"{name} must be in [0, 1], got {p}")
        for name, cap in (("yaw_range", 180.0), ("pitch_range", FOV_GUARD_DEG),
                          ("roll_range", FOV_GUARD_DEG)):
            r = getattr(self, name)
            if not 0.0 <= r <= cap:
                raise DataError(f"{name} must be in [0, {cap}], got {r}")
        if self.flip_axis not in ("x", "y", "z"):
            raise DataError(f"flip_axis must be x/y/z, got {self.flip_axis!r}")
        if self.small_object_stage not in ("pre", "post"):
            raise DataError(
                f"small_object_stage must be pre/post, got {self.small_object_stage!r}"
            )
        if not 0.0 < self.small_object_ratio < 1.0:
            raise DataError(
                f"small_object_ratio must be in (0, 1), got {self.small_object_ratio}"
            )
        if not 0.0 <= self.min_corner_overlap <= 1.0:
            raise DataError(
                f"min_corner_overlap must be in [0, 1], got {self.min_corner_overlap}"
            )
        if self.variants_per_sample < 1:
            raise DataError(
                f"variants_per_sample must be >= 1, got {self.variants_per_sample}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, overrides: dict) -> "AugmentConfig":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise DataError(f"unknown config fields: {sorted(unknown)}")
        return replace(self, **overrides)


def load_config_file(path) -> dict:
    """Read a TOML or JSON config file into a plain dict of overrides."""
    p = Path(path)
    raw = p.read_bytes()
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataError(f"{p}: invalid JSON ({exc})") from exc
    else:
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise DataError(f"{p}: invalid TOML ({exc})") from exc
    if not isinstance(data, dict):
        raise DataError(f"{p}: config must be a table/object")
    return data
