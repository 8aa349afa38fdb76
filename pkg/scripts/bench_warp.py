#!/usr/bin/env python3
"""Warp throughput sweep; prints the same CSV as `rotaug bench`.

Usage:
    python scripts/bench_warp.py --sizes 1280x720 1920x1080 4096x2160 \
        --threads 1 2 4 8 --repeats 5 --out bench.csv
"""

import argparse
import sys
import time

import numpy as np

from rotaug import Intrinsics, pure_rotation_homography, realign_principal_point, warp_image
from rotaug.geometry import EulerAngles, rotation_from_euler


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", nargs="+", default=["1280x720", "1920x1080"])
    parser.add_argument("--threads", nargs="+", type=int, default=[1, 2, 4, 8])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--roll", type=float, default=10.0)
    parser.add_argument("--out", default=None, help="CSV path (default stdout)")
    args = parser.parse_args()

    sink = open(args.out, "w") if args.out else sys.stdout
    print("width,height,interp,threads,megapixels_per_second", file=sink)

    rng = np.random.default_rng(0)
    op = rotation_from_euler(EulerAngles(0.0, 0.0, args.roll)).m
    for size in args.sizes:
        w, h = (int(v) for v in size.lower().split("x"))
        src = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        k = Intrinsics(w * 0.8, w * 0.8, w / 2.0, h / 2.0)
        canvas = realign_principal_point(k, w, h, op)
        hom = pure_rotation_homography(canvas.k, op, k)
        for interp in ("bilinear", "nearest"):
            for threads in args.threads:
                warp_image(src, hom, canvas, interp, workers=threads)  # warm-up
                start = time.perf_counter()
                for _ in range(args.repeats):
                    warp_image(src, hom, canvas, interp, workers=threads)
                elapsed = time.perf_counter() - start
                mps = w * h * args.repeats / elapsed / 1e6
                print(f"{w},{h},{interp},{threads},{mps:.1f}", file=sink)
                sink.flush()

    if args.out:
        sink.close()


if __name__ == "__main__":
    main()
