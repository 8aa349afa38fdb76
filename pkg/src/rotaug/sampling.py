"""Deterministic per-sample transform sampling.

Each (seed, sample_index, variant_index) triple opens its own Philox
stream: the seed is the key and the two indices sit in the high counter
words, so streams never overlap and the draw for one sample is
independent of processing order and worker count.

Draw order within a stream is fixed: rotation Bernoulli, then (if it
fired) yaw/pitch/roll uniforms, then the flip Bernoulli.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .config import AugmentConfig
from .geometry import EulerAngles, mirror_matrix, rotation_from_euler
from .labels import Sample, TransformRecord, canvas_for

_MASK64 = (1 << 64) - 1


def rng_for(seed: int, sample_index: int, variant_index: int) -> np.random.Generator:
    if sample_index < 0 or variant_index < 0:
        raise ValueError("sample/variant indices must be non-negative")
    bitgen = np.random.Philox(
        key=np.uint64(seed & _MASK64),
        counter=[0, 0, sample_index, variant_index],
    )
    return np.random.Generator(bitgen)


def sample_transform(
    cfg: AugmentConfig, sample_index: int, variant_index: int
) -> TransformRecord:
    """Draw one transform; the canvas field is attached later, once the
    record is paired with a concrete sample."""
    rng = rng_for(cfg.seed, sample_index, variant_index)
    rotate = bool(rng.random() < cfg.p_rotation)
    if rotate:
        euler = EulerAngles(
            yaw=float(rng.uniform(-cfg.yaw_range, cfg.yaw_range)),
            pitch=float(rng.uniform(-cfg.pitch_range, cfg.pitch_range)),
            roll=float(rng.uniform(-cfg.roll_range, cfg.roll_range)),
        )
    else:
        euler = EulerAngles(0.0, 0.0, 0.0)
    flip = bool(rng.random() < cfg.p_flip)

    rotation = rotation_from_euler(euler)
    if flip:
        operator = mirror_matrix(cfg.flip_axis).m @ rotation.m
    else:
        operator = rotation.m
    return TransformRecord(
        operator=operator,
        is_reflection=flip,
        euler=euler,
        flip_axis=cfg.flip_axis if flip else None,
        canvas=None,
        seed_path=f"philox:{cfg.seed}:{sample_index}:{variant_index}",
    )


def attach_canvas(
    rec: TransformRecord, sample: Sample, center_realign: bool = True
) -> TransformRecord:
    canvas = canvas_for(sample, rec, center_realign)
    return replace(rec, canvas=canvas)
