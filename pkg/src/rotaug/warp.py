"""Homography image remap with inverse mapping.

Images are uint8 numpy arrays, (H, W) or (H, W, C) with 1-4 channels.
Every output pixel (i, j) is sampled at the continuous source location
``normalize(h^-1 @ [i + 0.5, j + 0.5, 1])``; pull-style mapping keeps
the output hole-free.  A pixel is valid when that location lies inside
``[0, src_w] x [0, src_h]`` (and its homogeneous w is positive); invalid
pixels take the fill value, and the returned mask is the only truthful
record of which pixels carry scene content.

Sampling accumulates in float64 and writes back with round-half-away-
from-zero.  Each output pixel depends only on its own inverse mapping,
so results are bit-identical for any worker count or tiling.  Two
interchangeable kernels exist: a numba-compiled loop (default when
numba is importable; nogil, so row bands parallelize) and a pure numpy
fallback with the exact same arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

from .canvas import CanvasSpec
from .errors import CanvasTooLargeError, GeometryError, InvalidHomographyError
from .geometry import W_EPS, _as_mat3

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    _HAS_NUMBA = False

MAX_CANVAS_SIDE = 16384
_BAND_ROWS = 64  # fixed tiling, independent of the worker count


def _check_source(src: np.ndarray, name: str, max_channels: int = 4) -> np.ndarray:
    arr = np.asarray(src)
    if arr.dtype != np.uint8:
        raise GeometryError(f"{name} must be uint8, got {arr.dtype}")
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and 1 <= arr.shape[2] <= max_channels:
        return arr
    raise GeometryError(
        f"{name} must be (H, W) or (H, W, 1..{max_channels}), got shape {arr.shape}"
    )


def _fill_vector(fill, channels: int) -> np.ndarray:
    vec = np.asarray(fill, dtype=np.float64).reshape(-1)
    if vec.size == 1:
        vec = np.repeat(vec, channels)
    if vec.size != channels:
        raise GeometryError(f"fill needs 1 or {channels} values, got {vec.size}")
    if np.any(vec < 0) or np.any(vec > 255):
        raise GeometryError("fill values must be within 0..255")
    return vec.astype(np.uint8)


def _source_positions(h_inv, y0, y1, out_w, src_w, src_h):
    xs = np.arange(out_w, dtype=np.float64) + 0.5
    ys = np.arange(y0, y1, dtype=np.float64) + 0.5
    x = xs[None, :]
    y = ys[:, None]
    u = h_inv[0, 0] * x + h_inv[0, 1] * y + h_inv[0, 2]
    v = h_inv[1, 0] * x + h_inv[1, 1] * y + h_inv[1, 2]
    w = h_inv[2, 0] * x + h_inv[2, 1] * y + h_inv[2, 2]
    w_ok = w > W_EPS
    w_safe = np.where(w_ok, w, 1.0)
    sx = u / w_safe
    sy = v / w_safe
    valid = w_ok & (sx >= 0.0) & (sx <= src_w) & (sy >= 0.0) & (sy <= src_h)
    # Neutralize garbage coordinates before they reach indexing math.
    sx = np.where(valid, sx, 0.0)
    sy = np.where(valid, sy, 0.0)
    return sx, sy, valid


def _warp_band_numpy(src, h_inv, y0, y1, out, valid_out, fill_vec, nearest):
    src_h, src_w = src.shape[:2]
    sx, sy, valid = _source_positions(h_inv, y0, y1, out.shape[1], src_w, src_h)
    if nearest:
        ix = np.clip(np.floor(sx), 0, src_w - 1).astype(np.intp)
        iy = np.clip(np.floor(sy), 0, src_h - 1).astype(np.intp)
        band = src[iy, ix]
    else:
        gx = sx - 0.5
        gy = sy - 0.5
        x0 = np.floor(gx)
        y0f = np.floor(gy)
        fx = (gx - x0)[..., None]
        fy = (gy - y0f)[..., None]
        x0i = np.clip(x0, 0, src_w - 1).astype(np.intp)
        x1i = np.clip(x0 + 1.0, 0, src_w - 1).astype(np.intp)
        y0i = np.clip(y0f, 0, src_h - 1).astype(np.intp)
        y1i = np.clip(y0f + 1.0, 0, src_h - 1).astype(np.intp)
        p00 = src[y0i, x0i].astype(np.float64)
        p01 = src[y0i, x1i].astype(np.float64)
        p10 = src[y1i, x0i].astype(np.float64)
        p11 = src[y1i, x1i].astype(np.float64)
        value = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) + fy * (
            (1.0 - fx) * p10 + fx * p11
        )
        # Convex combination of uint8 samples stays in [0, 255].
        band = np.floor(value + 0.5).astype(np.uint8)
    band[~valid] = fill_vec
    out[:] = band
    valid_out[:] = valid


if _HAS_NUMBA:

    # Same arithmetic, same evaluation order as the numpy band above, so
    # both backends produce identical bytes.  nogil lets band threads
    # actually run in parallel.
    @njit(cache=True, nogil=True)
    def _warp_band_jit(src, h_inv, y0, y1, out, valid_out, fill_vec, nearest):
        src_h, src_w = src.shape[:2]
        channels = src.shape[2]
        width = out.shape[1]
        for r in range(y1 - y0):
            yc = y0 + r + 0.5
            for i in range(width):
                xc = i + 0.5
                u = h_inv[0, 0] * xc + h_inv[0, 1] * yc + h_inv[0, 2]
                v = h_inv[1, 0] * xc + h_inv[1, 1] * yc + h_inv[1, 2]
                w = h_inv[2, 0] * xc + h_inv[2, 1] * yc + h_inv[2, 2]
                ok = w > W_EPS
                sx = u / w if ok else 0.0
                sy = v / w if ok else 0.0
                ok = ok and 0.0 <= sx <= src_w and 0.0 <= sy <= src_h
                if not ok:
                    valid_out[r, i] = False
                    for c in range(channels):
                        out[r, i, c] = fill_vec[c]
                    continue
                valid_out[r, i] = True
                if nearest:
                    ix = int(min(max(math.floor(sx), 0.0), src_w - 1.0))
                    iy = int(min(max(math.floor(sy), 0.0), src_h - 1.0))
                    for c in range(channels):
                        out[r, i, c] = src[iy, ix, c]
                else:
                    gx = sx - 0.5
                    gy = sy - 0.5
                    x0f = math.floor(gx)
                    y0f = math.floor(gy)
                    fx = gx - x0f
                    fy = gy - y0f
                    x0i = int(min(max(x0f, 0.0), src_w - 1.0))
                    x1i = int(min(max(x0f + 1.0, 0.0), src_w - 1.0))
                    y0i = int(min(max(y0f, 0.0), src_h - 1.0))
                    y1i = int(min(max(y0f + 1.0, 0.0), src_h - 1.0))
                    for c in range(channels):
                        p00 = np.float64(src[y0i, x0i, c])
                        p01 = np.float64(src[y0i, x1i, c])
                        p10 = np.float64(src[y1i, x0i, c])
                        p11 = np.float64(src[y1i, x1i, c])
                        value = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) + fy * (
                            (1.0 - fx) * p10 + fx * p11
                        )
                        out[r, i, c] = np.uint8(math.floor(value + 0.5))


def warp_image(
    src,
    h,
    canvas: CanvasSpec,
    interpolation: str = "bilinear",
    fill=0,
    workers: int = 1,
    max_side: int = MAX_CANVAS_SIDE,
    backend: str = "auto",
):
    """Warp an image onto ``canvas`` through homography ``h``.

    Returns ``(warped, validity)`` where validity is a (H, W) bool mask.
    Bilinear suits RGB content; nearest is mandatory for masks and other
    label rasters (use :func:`warp_mask`).  ``backend`` selects the
    compiled kernel ("numba", the default when available) or the pure
    numpy fallback; both produce identical bytes.
    """
    arr = _check_source(src, "image")
    if interpolation not in ("bilinear", "nearest"):
        raise GeometryError(f"unknown interpolation {interpolation!r}")
    if backend not in ("auto", "numba", "numpy"):
        raise GeometryError(f"unknown backend {backend!r}")
    if backend == "numba" and not _HAS_NUMBA:
        raise GeometryError("numba backend requested but numba is not installed")
    if canvas.width > max_side or canvas.height > max_side:
        raise CanvasTooLargeError(
            f"canvas {canvas.width}x{canvas.height} exceeds limit {max_side}"
        )
    m = _as_mat3(h, "homography")
    det = float(np.linalg.det(m))
    if abs(det) <= 1e-12:
        raise InvalidHomographyError(f"homography is singular (det {det!r})")
    h_inv = np.linalg.inv(m)

    flat = arr.ndim == 2
    work = np.ascontiguousarray(arr[:, :, None] if flat else arr)
    channels = work.shape[2]
    fill_vec = _fill_vector(fill, channels)
    nearest = interpolation == "nearest"
    use_jit = _HAS_NUMBA if backend == "auto" else backend == "numba"
    band_fn = _warp_band_jit if use_jit else _warp_band_numpy

    out = np.empty((canvas.height, canvas.width, channels), dtype=np.uint8)
    validity = np.empty((canvas.height, canvas.width), dtype=bool)
    bands = [
        (y, min(y + _BAND_ROWS, canvas.height))
        for y in range(0, canvas.height, _BAND_ROWS)
    ]

    def run(band):
        y0, y1 = band
        band_fn(work, h_inv, y0, y1, out[y0:y1], validity[y0:y1], fill_vec, nearest)

    if workers <= 1 or len(bands) == 1:
        for band in bands:
            run(band)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, bands))

    return (out[:, :, 0] if flat else out), validity


def warp_mask(src, h, canvas: CanvasSpec, fill=0, workers: int = 1):
    """Warp a single-channel label raster; interpolation is forced to
    nearest so the output contains only values present in the source."""
    arr = _check_source(src, "mask", max_channels=1)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    return warp_image(arr, h, canvas, interpolation="nearest", fill=fill, workers=workers)


def load_png(path) -> np.ndarray:
    """Read a PNG as uint8, RGB (H, W, 3) or grayscale (H, W)."""
    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.uint8)
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def save_png(path, arr) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(path, format="PNG")


def encode_png(arr) -> bytes:
    """PNG bytes for an array; used to keep file writes order-independent."""
    buf = BytesIO()
    Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def write_bytes(path, data: bytes) -> None:
    Path(path).write_bytes(data)
