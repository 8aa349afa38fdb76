#!/usr/bin/env python3
"""Generate a small synthetic dataset for demos and smoke tests.

Creates N samples with gradient test-card images, draws each sample's
cuboids into its image (so warps are visually checkable), and writes
the JSONL next to an images/ directory.

Usage:
    python scripts/make_demo_dataset.py --out demo_data --samples 4
"""

import argparse
from pathlib import Path

import numpy as np

from rotaug import (
    CuboidPose,
    EulerAngles,
    Extrinsics,
    Intrinsics,
    ObjectAnnotation,
    Sample,
    render_overlay,
    rotation_from_euler,
    save_png,
    write_dataset,
)

# Box local z mapped to camera down (+y): upright furniture whose third
# orientation column is gravity-aligned, which keeps the loader audit quiet.
UPRIGHT = rotation_from_euler(EulerAngles(0.0, -90.0, 0.0)).m


def test_card(width, height, seed):
    rng = np.random.default_rng(seed)
    x = np.arange(width)[None, :]
    y = np.arange(height)[:, None]
    phase = rng.uniform(0, 2 * np.pi, size=3)
    img = np.stack(
        [
            127.5 + 60 * np.sin(2 * np.pi * x / rng.uniform(40, 90) + phase[0])
            + 40 * np.cos(2 * np.pi * y / rng.uniform(30, 70) + phase[1]),
            127.5 + 50 * np.cos(2 * np.pi * (x + y) / rng.uniform(50, 110) + phase[2]),
            127.5 + 55 * np.sin(2 * np.pi * (x - y) / rng.uniform(45, 100)),
        ],
        axis=2,
    )
    img = np.broadcast_to(img, (height, width, 3))
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def random_sample(index, rng, width=640, height=480):
    k = Intrinsics(500.0, 500.0, width / 2.0, height / 2.0)
    categories = ["chair", "table", "sofa", "bed", "desk"]
    objects = []
    for j in range(int(rng.integers(2, 5))):
        yaw = float(rng.uniform(-180, 180))
        r = rotation_from_euler(EulerAngles(yaw, 0.0, 0.0)).m @ UPRIGHT
        t = np.array([rng.uniform(-1.2, 1.2), rng.uniform(-0.3, 0.6), rng.uniform(2.5, 6.0)])
        size = rng.uniform([0.4, 0.4, 0.4], [1.4, 1.1, 1.4])
        objects.append(
            ObjectAnnotation(f"{index}-{j}", str(rng.choice(categories)),
                             CuboidPose(r, t, size))
        )
    return Sample(
        image_path=f"sample{index:03d}.png",
        intrinsics=k,
        extrinsics=Extrinsics.identity(),
        width=width,
        height=height,
        objects=tuple(objects),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--samples", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--width", type=int, default=640)
    parser.add_argument("--height", type=int, default=480)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    samples = []
    for i in range(args.samples):
        sample = random_sample(i, rng, args.width, args.height)
        card = test_card(args.width, args.height, seed=args.seed * 1000 + i)
        # Bake the wireframes into the photo stand-in so augmented images
        # show whether labels still sit on the right pixels.
        baked, _ = render_overlay(card, sample, draw_legend=False)
        save_png(out / "images" / sample.image_path, baked)
        samples.append(sample)

    write_dataset(out / "dataset.jsonl", samples)
    print(f"wrote {len(samples)} samples under {out}")


if __name__ == "__main__":
    main()
