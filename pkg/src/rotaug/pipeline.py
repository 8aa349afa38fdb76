"""Dataset-level augmentation, verification and rendering runs.

``augment_sample_arrays`` is the single augmentation code path: the CLI
feeds it decoded PNGs, in-process callers feed it arrays directly, and
both get byte-identical results for the same (seed, sample_index,
variant_index).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import AugmentConfig
from .dataset import emit_record, emit_sample, load_dataset, record_to_dict
from .errors import DataError
from .geometry import mirror_matrix, pure_rotation_homography
from .labels import (
    Sample,
    filter_objects,
    object_filter_reasons,
    transform_sample,
)
from .render import render_overlay
from .oracle import (
    check_canvas_containment,
    check_cuboid_consistency,
    check_projective_consistency,
)
from .sampling import attach_canvas, sample_transform
from .warp import encode_png, load_png, save_png, warp_image

log = logging.getLogger(__name__)

PIXEL_TOL = 1e-6
CORNER_TOL = 1e-9
SO3_TOL = 1e-9


def _filter_rules(cfg: AugmentConfig, stage: str) -> tuple[str, ...]:
    rules = []
    if stage == "post":
        rules += ["depth", "center"]
    if cfg.small_object_filter and cfg.small_object_stage == stage:
        rules.append("height")
    return tuple(rules)


def augment_sample_arrays(
    sample: Sample,
    image: np.ndarray,
    cfg: AugmentConfig,
    sample_index: int,
    variant_index: int,
):
    """Augment one sample given its decoded image.

    Returns (augmented sample, warped image, validity mask, completed
    transform record).
    """
    if image.shape[0] != sample.height or image.shape[1] != sample.width:
        raise DataError(
            f"image is {image.shape[1]}x{image.shape[0]} but the record says "
            f"{sample.width}x{sample.height}"
        )
    rec = sample_transform(cfg, sample_index, variant_index)

    work = sample
    pre_rules = _filter_rules(cfg, "pre")
    if pre_rules:
        work = filter_objects(
            work, rules=pre_rules,
            height_ratio=cfg.small_object_ratio, depth_eps=cfg.depth_eps,
        )

    rec = attach_canvas(rec, work, cfg.center_realign)
    out_sample = transform_sample(work, rec, cfg.keep_chirality, cfg.center_realign)
    out_sample = filter_objects(
        out_sample,
        rules=_filter_rules(cfg, "post"),
        height_ratio=cfg.small_object_ratio,
        depth_eps=cfg.depth_eps,
        min_corner_overlap=cfg.min_corner_overlap,
    )

    h = pure_rotation_homography(rec.canvas.k, rec.operator, sample.intrinsics)
    warped, validity = warp_image(image, h, rec.canvas, interpolation="bilinear")
    return out_sample, warped, validity, rec


def _out_image_name(sample: Sample, sample_index: int, variant_index: int) -> str:
    stem = Path(sample.image_path).stem or "sample"
    return f"{sample_index:06d}_{stem}_v{variant_index:02d}.png"


def run_augment(
    dataset_path,
    images_dir,
    cfg: AugmentConfig,
    out_dir,
    workers: int = 1,
) -> dict:
    """Augment a JSONL dataset; returns a summary dict.

    Per-sample failures are logged and skipped.  Output order always
    follows input order regardless of the worker count.
    """
    samples = load_dataset(dataset_path)
    images_dir = Path(images_dir)
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)

    tasks = [
        (si, vi, sample)
        for si, sample in enumerate(samples)
        for vi in range(cfg.variants_per_sample)
    ]

    def run_one(task):
        si, vi, sample = task
        try:
            image = load_png(images_dir / sample.image_path)
            out_sample, warped, _validity, rec = augment_sample_arrays(
                sample, image, cfg, si, vi
            )
            name = _out_image_name(sample, si, vi)
            png = encode_png(warped)
            record = record_to_dict(
                rec,
                sample_index=si,
                variant_index=vi,
                image=name,
                objects_in=len(sample.objects),
                objects_kept=len(out_sample.objects),
            )
            line = emit_sample(replace(out_sample, image_path=f"images/{name}"))
            return si, vi, name, png, line, emit_record(record), len(sample.objects), len(out_sample.objects), None
        except Exception as exc:  # noqa: BLE001 - per-sample isolation
            log.error("sample %d variant %d failed: %s", si, vi, exc)
            return si, vi, None, None, None, None, len(sample.objects), 0, str(exc)

    if workers <= 1:
        results = [run_one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, tasks))

    dataset_lines = []
    record_lines = []
    objects_in = objects_kept = failures = 0
    for si, vi, name, png, line, rec_line, n_in, n_kept, error in results:
        if error is not None:
            failures += 1
            continue
        objects_in += n_in
        objects_kept += n_kept
        (out_dir / "images" / name).write_bytes(png)
        dataset_lines.append(line)
        record_lines.append(rec_line)

    (out_dir / "augmented.jsonl").write_text(
        "".join(line + "\n" for line in dataset_lines), encoding="utf-8"
    )
    (out_dir / "records.jsonl").write_text(
        "".join(line + "\n" for line in record_lines), encoding="utf-8"
    )

    return {
        "samples_in": len(samples),
        "variants_requested": len(tasks),
        "variants_written": len(dataset_lines),
        "objects_in": objects_in,
        "objects_kept": objects_kept,
        "objects_filtered": objects_in - objects_kept,
        "failures": failures,
        "out_dir": str(out_dir),
    }


def run_verify(
    dataset_path,
    cfg: AugmentConfig | None = None,
    trials_per_sample: int = 2000,
    operators_per_sample: int = 3,
    seed: int = 0,
) -> dict:
    """Check every dataset sample against the brute-force oracles.

    For each sample a few transforms are drawn from the config ranges;
    the report aggregates the worst pixel residual, worst corner
    residual, orthogonality violations and filter statistics.
    """
    cfg = cfg or AugmentConfig(seed=seed)
    samples = load_dataset(dataset_path)
    if not samples:
        raise DataError(f"dataset {dataset_path} contains no samples")

    max_residual = 0.0
    max_corner = 0.0
    max_overflow = -float("inf")
    so3_violations = 0
    filter_counts = {"depth": 0, "center": 0, "height": 0, "overlap": 0}
    objects_total = 0

    for si, sample in enumerate(samples):
        for oi in range(operators_per_sample):
            rec = sample_transform(cfg, si, oi)
            rec = attach_canvas(rec, sample, cfg.center_realign)
            out = transform_sample(sample, rec, cfg.keep_chirality, cfg.center_realign)

            ext = out.extrinsics
            if np.max(np.abs(ext.r.T @ ext.r - np.eye(3))) > SO3_TOL:
                so3_violations += 1
            expected_det = -1.0 if rec.is_reflection else 1.0
            if abs(np.linalg.det(ext.r) - expected_det * np.linalg.det(sample.extrinsics.r)) > SO3_TOL * 10:
                so3_violations += 1
            for obj in out.objects:
                if np.max(np.abs(obj.pose.r.T @ obj.pose.r - np.eye(3))) > SO3_TOL:
                    so3_violations += 1

            h = pure_rotation_homography(rec.canvas.k, rec.operator, sample.intrinsics)
            res = check_projective_consistency(
                h, sample.intrinsics, sample.width, sample.height,
                rec.operator, rec.canvas.k, rec.canvas.width, rec.canvas.height,
                trials=trials_per_sample, seed=seed + 7919 * si + oi,
            )
            if res.accepted:
                max_residual = max(max_residual, res.max_residual_px)
            max_overflow = max(
                max_overflow,
                check_canvas_containment(
                    sample.intrinsics, sample.width, sample.height,
                    rec.operator, rec.canvas, grid=30,
                ),
            )

            mirror = mirror_matrix(rec.flip_axis).m if rec.is_reflection else None
            for obj in sample.objects:
                max_corner = max(
                    max_corner,
                    check_cuboid_consistency(
                        obj.pose, rec.operator, cfg.keep_chirality, mirror=mirror
                    ),
                )

            reasons = object_filter_reasons(
                out,
                rules=("depth", "center", "height") if cfg.small_object_filter else ("depth", "center"),
                height_ratio=cfg.small_object_ratio,
                depth_eps=cfg.depth_eps,
                min_corner_overlap=cfg.min_corner_overlap,
            )
            objects_total += len(reasons)
            for r in reasons:
                if r is not None:
                    filter_counts[r] += 1

    report = {
        "samples": len(samples),
        "operators_per_sample": operators_per_sample,
        "trials_per_sample": trials_per_sample,
        "seed": seed,
        "max_pixel_residual": max_residual,
        "pixel_tol": PIXEL_TOL,
        "max_corner_residual": max_corner,
        "corner_tol": CORNER_TOL,
        "max_canvas_overflow_px": max_overflow,
        "so3_violations": so3_violations,
        "objects_checked": objects_total,
        "filtered": filter_counts,
    }
    report["ok"] = bool(
        max_residual <= PIXEL_TOL
        and max_corner <= CORNER_TOL
        and max_overflow <= 0.5
        and so3_violations == 0
    )
    return report


def run_render(dataset_path, images_dir, index: int, out_png, cfg: AugmentConfig | None = None) -> list:
    """Render the wireframe overlay for one dataset sample."""
    samples = load_dataset(dataset_path)
    if not 0 <= index < len(samples):
        raise DataError(f"sample index {index} out of range (dataset has {len(samples)})")
    sample = samples[index]
    image = load_png(Path(images_dir) / sample.image_path)
    rendered, statuses = render_overlay(image, sample)
    save_png(out_png, rendered)
    return statuses
