"""Command line interface.

Subcommands: augment, verify, render, selfcheck, bench.  Exit codes:
0 ok, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import fields

import numpy as np

from . import __version__
from .canvas import CanvasSpec
from .config import AugmentConfig, load_config_file
from .errors import DataError, GeometryError
from .geometry import Intrinsics
from .oracle import selfcheck_report
from .pipeline import run_augment, run_render, run_verify
from .warp import warp_image

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

_CONFIG_FLOATS = {
    "p_rotation", "yaw_range", "pitch_range", "roll_range", "p_flip",
    "small_object_ratio", "min_corner_overlap", "depth_eps",
}
_CONFIG_INTS = {"seed", "variants_per_sample"}
_CONFIG_BOOLS = {"keep_chirality", "center_realign", "small_object_filter"}
_CONFIG_STRS = {"flip_axis", "small_object_stage"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2
    # for data errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON file of config overrides")
    for f in fields(AugmentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _CONFIG_BOOLS:
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=None)
        elif f.name in _CONFIG_INTS:
            p.add_argument(flag, type=int, default=None)
        elif f.name in _CONFIG_FLOATS:
            p.add_argument(flag, type=float, default=None)
        elif f.name in _CONFIG_STRS:
            p.add_argument(flag, type=str, default=None)


def _build_config(args) -> AugmentConfig:
    cfg = AugmentConfig()
    if args.config:
        cfg = cfg.with_overrides(load_config_file(args.config))
    overrides = {}
    for f in fields(AugmentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return cfg.with_overrides(overrides)


def _cmd_augment(args) -> int:
    cfg = _build_config(args)
    summary = run_augment(args.dataset, args.images_dir, cfg, args.out_dir, args.workers)
    print(json.dumps(summary, indent=2))
    if summary["variants_written"] == 0 and summary["variants_requested"] > 0:
        return EXIT_DATA
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = _build_config(args)
    report = run_verify(
        args.dataset,
        cfg,
        trials_per_sample=args.trials_per_sample,
        operators_per_sample=args.operators_per_sample,
        seed=args.oracle_seed,
    )
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _cmd_render(args) -> int:
    statuses = run_render(args.dataset, args.images_dir, args.index, args.out)
    for st in statuses:
        print(f"{st.id}\t{st.category}\t{st.status}\t{st.edges_drawn} edges")
    return EXIT_OK


def _cmd_selfcheck(args) -> int:
    report = selfcheck_report(
        seed=args.oracle_seed,
        operators=args.operators,
        trials_per_operator=args.trials,
    )
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(7)
    print("width,height,interp,threads,megapixels_per_second")
    for size in args.sizes:
        try:
            w, h = (int(v) for v in size.lower().split("x"))
        except ValueError:
            raise DataError(f"size must look like 1920x1080, got {size!r}") from None
        src = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        canvas = CanvasSpec(Intrinsics(w / 2.0, w / 2.0, w / 2.0, h / 2.0), w, h)
        hmg = np.array([[1.0, 0.0, 3.5], [0.0, 1.0, -2.5], [0.0, 0.0, 1.0]])
        for interp in ("bilinear", "nearest"):
            for threads in args.threads:
                warp_image(src, hmg, canvas, interp, workers=threads)  # warm-up
                start = time.perf_counter()
                for _ in range(args.repeats):
                    warp_image(src, hmg, canvas, interp, workers=threads)
                elapsed = time.perf_counter() - start
                mps = (w * h * args.repeats) / elapsed / 1e6
                print(f"{w},{h},{interp},{threads},{mps:.1f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rotaug",
        description=(
            "Geometry-consistent rotation/reflection augmentation for RGB "
            "samples with 3D cuboid labels"
        ),
    )
    parser.add_argument("--version", action="version", version=f"rotaug {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="augment a JSONL dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--images-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("verify", help="run the consistency oracles on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--trials-per-sample", type=int, default=2000)
    p.add_argument("--operators-per-sample", type=int, default=3)
    p.add_argument("--oracle-seed", type=int, default=0)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("render", help="draw projected cuboid wireframes")
    p.add_argument("--dataset", required=True)
    p.add_argument("--images-dir", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("selfcheck", help="synthetic oracle run, no dataset needed")
    p.add_argument("--operators", type=int, default=25)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--oracle-seed", type=int, default=0)
    p.set_defaults(func=_cmd_selfcheck)

    p = sub.add_parser("bench", help="warp throughput benchmark (CSV to stdout)")
    p.add_argument("--sizes", nargs="+", default=["1920x1080"])
    p.add_argument("--threads", nargs="+", type=int, default=[1, 2, 4, 8])
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse --help exits 0; our error() path exits 1.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"rotaug: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except GeometryError as exc:
        print(f"rotaug: geometry error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
