"""In-process augmentation adapter for ML data-loader code.

One entry point, :func:`augment_in_memory`, takes plain data (a uint8
image array, a 3x3 intrinsics matrix, objects as dicts shaped exactly
like the rotaug JSONL schema) and returns the augmented triple plus the
transform record.  It drives the same pipeline function the rotaug CLI
uses, with the same (seed, sample_index, variant_index) stream
derivation, so outputs are byte-identical to CLI artifacts.

Everything is marshalled by copy; callers keep ownership of their
arrays.  Thread-safe: no module state.

Example::

    from rotaug_binding import augment_in_memory

    out = augment_in_memory(
        image, K, objects,
        seed=42, p_rotation=0.8, yaw_range=10.0,
        indices=(sample_idx, epoch),
    )
    train_on(out.image, out.intrinsics, out.objects)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rotaug import (
    AugmentConfig,
    CuboidPose,
    Extrinsics,
    Intrinsics,
    ObjectAnnotation,
    Sample,
    augment_sample_arrays,
    record_to_dict,
)

__version__ = "0.1.0"


@dataclass(frozen=True)
class AugmentResult:
    """Augmented sample: arrays and dicts only, no rotaug types."""

    image: np.ndarray
    intrinsics: list  # 3x3 row-major, same shape as the JSONL "K" field
    objects: list  # dicts with id/category/R/t/size
    record: dict  # transform audit record, sidecar-shaped
    validity: np.ndarray  # bool mask of pixels carrying scene content


def _check_image(image) -> np.ndarray:
    if not isinstance(image, np.ndarray):
        raise TypeError(f"image must be a numpy array, got {type(image).__name__}")
    if image.dtype != np.uint8:
        raise TypeError(f"image must be uint8, got dtype {image.dtype}")
    if image.ndim not in (2, 3) or (image.ndim == 3 and not 1 <= image.shape[2] <= 4):
        raise ValueError(
            f"image must be HxW or HxWxC with 1..4 channels, got shape {image.shape}"
        )
    if not image.flags["C_CONTIGUOUS"]:
        raise ValueError("image must be C-contiguous")
    return image.copy()


def _parse_objects(objects) -> tuple[ObjectAnnotation, ...]:
    parsed = []
    for i, obj in enumerate(objects):
        try:
            parsed.append(
                ObjectAnnotation(
                    id=str(obj["id"]),
                    category=str(obj["category"]),
                    pose=CuboidPose(
                        np.array(obj["R"], dtype=np.float64),
                        np.array(obj["t"], dtype=np.float64),
                        np.array(obj["size"], dtype=np.float64),
                    ),
                )
            )
        except KeyError as exc:
            raise ValueError(f"objects[{i}] is missing field {exc}") from None
    return tuple(parsed)


def _emit_objects(sample: Sample) -> list:
    return [
        {
            "id": o.id,
            "category": o.category,
            "R": o.pose.r.tolist(),
            "t": o.pose.t.tolist(),
            "size": o.pose.size.tolist(),
        }
        for o in sample.objects
    ]


def augment_in_memory(
    image: np.ndarray,
    intrinsics,
    objects,
    cfg: AugmentConfig | dict | None = None,
    indices: tuple[int, int] = (0, 0),
    **config_fields,
) -> AugmentResult:
    """Augment one in-memory sample.

    Parameters mirror the rotaug JSONL schema and AugmentConfig:

    image
        uint8 array, HxW or HxWxC (C <= 4), C-contiguous.
    intrinsics
        3x3 row-major matrix ``[[fx,0,cx],[0,fy,cy],[0,0,1]]``.
    objects
        iterable of ``{"id", "category", "R", "t", "size"}`` dicts.
    cfg, **config_fields
        an AugmentConfig, a dict of its fields, or keyword overrides
        (``seed=...``, ``p_rotation=...``, ...); keywords win.
    indices
        (sample_index, variant_index) selecting the deterministic RNG
        stream; equal indices and seed reproduce the CLI output exactly.
    """
    arr = _check_image(image)
    if isinstance(cfg, AugmentConfig):
        config = cfg
        if config_fields:
            config = config.with_overrides(config_fields)
    else:
        merged = dict(cfg or {})
        merged.update(config_fields)
        config = AugmentConfig().with_overrides(merged)

    k = Intrinsics.from_matrix(np.array(intrinsics, dtype=np.float64))
    height, width = arr.shape[:2]
    sample = Sample(
        image_path="<memory>",
        intrinsics=k,
        extrinsics=Extrinsics.identity(),
        width=width,
        height=height,
        objects=_parse_objects(objects),
    )

    sample_index, variant_index = (int(indices[0]), int(indices[1]))
    out_sample, warped, validity, rec = augment_sample_arrays(
        sample, arr, config, sample_index, variant_index
    )
    record = record_to_dict(
        rec,
        sample_index=sample_index,
        variant_index=variant_index,
        objects_in=len(sample.objects),
        objects_kept=len(out_sample.objects),
    )
    return AugmentResult(
        image=warped,
        intrinsics=out_sample.intrinsics.matrix().tolist(),
        objects=_emit_objects(out_sample),
        record=record,
        validity=validity,
    )
