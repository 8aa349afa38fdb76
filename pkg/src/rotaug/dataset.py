"""JSONL dataset format, one sample per line:

    {"image": str, "width": int, "height": int,
     "K": [[fx,0,cx],[0,fy,cy],[0,0,1]],
     "extrinsics": {"R": [[3x3]], "t": [3]},        # optional, identity default
     "objects": [{"id": str, "category": str,
                  "R": [[3x3]], "t": [3], "size": [W,H,L]}]}

Matrices are row-major.  Emission is hand-rolled with fixed key order
and floats printed with 17 significant digits, which makes output bytes
reproducible and the parse(emit(x)) round trip exact for every finite
double.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .errors import DataError
from .geometry import CuboidPose, Extrinsics, Intrinsics, orthogonality_defect
from .labels import ObjectAnnotation, Sample, TransformRecord, audit_gravity_alignment

log = logging.getLogger(__name__)


def fmt_float(x) -> str:
    """17 significant digits: enough to reproduce any double exactly."""
    v = float(x)
    if not np.isfinite(v):
        raise DataError(f"cannot serialize non-finite value {v!r}")
    return format(v, ".17g")


def _fmt_vec(v) -> str:
    return "[" + ",".join(fmt_float(x) for x in v) + "]"


def _fmt_mat(m) -> str:
    return "[" + ",".join(_fmt_vec(row) for row in np.asarray(m)) + "]"


def _require(record: dict, key: str, context: str):
    if key not in record:
        raise DataError(f"{context}: missing required field {key!r}")
    return record[key]


def _as_float_array(value, shape, context: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{context}: not numeric ({exc})") from exc
    if arr.shape != shape:
        raise DataError(f"{context}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{context}: contains non-finite values")
    return arr


def parse_sample(record, context: str = "sample") -> Sample:
    """Validate one decoded JSONL record into a Sample."""
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise DataError(f"{context}: invalid JSON ({exc})") from exc
    if not isinstance(record, dict):
        raise DataError(f"{context}: record must be an object")

    image = _require(record, "image", context)
    if not isinstance(image, str):
        raise DataError(f"{context}: image must be a string path")
    width = _require(record, "width", context)
    height = _require(record, "height", context)
    if not isinstance(width, int) or not isinstance(height, int) or width <= 0 or height <= 0:
        raise DataError(f"{context}: width/height must be positive integers")

    k_mat = _as_float_array(_require(record, "K", context), (3, 3), f"{context}.K")
    try:
        intrinsics = Intrinsics.from_matrix(k_mat)
    except ValueError as exc:
        raise DataError(f"{context}.K: {exc}") from exc

    if "extrinsics" in record and record["extrinsics"] is not None:
        ext_rec = record["extrinsics"]
        if not isinstance(ext_rec, dict):
            raise DataError(f"{context}.extrinsics: must be an object")
        r = _as_float_array(_require(ext_rec, "R", context), (3, 3), f"{context}.extrinsics.R")
        t = _as_float_array(_require(ext_rec, "t", context), (3,), f"{context}.extrinsics.t")
        _check_orthogonal_data(r, f"{context}.extrinsics.R")
        extrinsics = Extrinsics(r, t)
    else:
        extrinsics = Extrinsics.identity()

    objects = []
    raw_objects = record.get("objects", [])
    if not isinstance(raw_objects, list):
        raise DataError(f"{context}.objects: must be a list")
    for i, obj in enumerate(raw_objects):
        octx = f"{context}.objects[{i}]"
        if not isinstance(obj, dict):
            raise DataError(f"{octx}: must be an object")
        oid = _require(obj, "id", octx)
        category = _require(obj, "category", octx)
        if not isinstance(oid, str) or not isinstance(category, str) or not category:
            raise DataError(f"{octx}: id/category must be strings, category non-empty")
        r = _as_float_array(_require(obj, "R", octx), (3, 3), f"{octx}.R")
        t = _as_float_array(_require(obj, "t", octx), (3,), f"{octx}.t")
        size = _as_float_array(_require(obj, "size", octx), (3,), f"{octx}.size")
        _check_orthogonal_data(r, f"{octx}.R")
        if np.any(size <= 0):
            raise DataError(f"{octx}.size: components must be positive")
        objects.append(ObjectAnnotation(oid, category, CuboidPose(r, t, size)))

    return Sample(image, intrinsics, extrinsics, width, height, tuple(objects))


def _check_orthogonal_data(r: np.ndarray, context: str) -> None:
    defect = orthogonality_defect(r)
    if defect > 1e-6:
        raise DataError(f"{context}: rotation not orthogonal (defect {defect:.3e})")


def _is_identity_ext(ext: Extrinsics) -> bool:
    return np.array_equal(ext.r, np.eye(3)) and np.array_equal(ext.t, np.zeros(3))


def emit_sample(sample: Sample) -> str:
    parts = [
        f'"image":{json.dumps(sample.image_path)}',
        f'"width":{sample.width}',
        f'"height":{sample.height}',
        f'"K":{_fmt_mat(sample.intrinsics.matrix())}',
    ]
    if not _is_identity_ext(sample.extrinsics):
        parts.append(
            '"extrinsics":{"R":%s,"t":%s}'
            % (_fmt_mat(sample.extrinsics.r), _fmt_vec(sample.extrinsics.t))
        )
    objs = []
    for obj in sample.objects:
        objs.append(
            '{"id":%s,"category":%s,"R":%s,"t":%s,"size":%s}'
            % (
                json.dumps(obj.id),
                json.dumps(obj.category),
                _fmt_mat(obj.pose.r),
                _fmt_vec(obj.pose.t),
                _fmt_vec(obj.pose.size),
            )
        )
    parts.append('"objects":[%s]' % ",".join(objs))
    return "{%s}" % ",".join(parts)


def load_dataset(path, audit: bool = True) -> list[Sample]:
    samples = []
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read dataset {p}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        sample = parse_sample(line, context=f"{p.name}:{lineno}")
        if audit:
            for msg in audit_gravity_alignment(sample):
                log.warning("%s:%d: %s", p.name, lineno, msg)
        samples.append(sample)
    return samples


def write_dataset(path, samples) -> None:
    text = "".join(emit_sample(s) + "\n" for s in samples)
    Path(path).write_text(text, encoding="utf-8")


def record_to_dict(rec: TransformRecord, **extra) -> dict:
    """Sidecar form of a transform record (plain JSON types)."""
    out = {
        "operator": np.asarray(rec.operator).tolist(),
        "is_reflection": rec.is_reflection,
        "euler": {"yaw": rec.euler.yaw, "pitch": rec.euler.pitch, "roll": rec.euler.roll},
        "flip_axis": rec.flip_axis,
        "canvas": None,
        "seed_path": rec.seed_path,
    }
    if rec.canvas is not None:
        out["canvas"] = {
            "width": rec.canvas.width,
            "height": rec.canvas.height,
            "fx": rec.canvas.k.fx,
            "fy": rec.canvas.k.fy,
            "cx": rec.canvas.k.cx,
            "cy": rec.canvas.k.cy,
        }
    out.update(extra)
    return out


def emit_record(rec_dict: dict) -> str:
    """Serialize a sidecar record with the same float discipline as the
    dataset emitter (17 significant digits, fixed traversal order)."""

    def emit_value(v):
        if isinstance(v, bool) or v is None:
            return json.dumps(v)
        if isinstance(v, int):
            return str(v)
        if isinstance(v, float):
            return fmt_float(v)
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, (list, tuple)):
            return "[" + ",".join(emit_value(x) for x in v) + "]"
        if isinstance(v, dict):
            return "{" + ",".join(
                f"{json.dumps(k)}:{emit_value(val)}" for k, val in v.items()
            ) + "}"
        raise DataError(f"cannot serialize {type(v).__name__} in record")

    return emit_value(rec_dict)
