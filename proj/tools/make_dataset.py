#!/usr/bin/env python3
"""Cut 256x256 natural-image tiles from the scikit-image sample images.

Writes data/natural/{train,test}/*.png. Every fifth tile (in sorted order)
goes to the held-out split.
"""
import argparse
import os

import numpy as np
import skimage.data
import skimage.io

SOURCES = [
    "astronaut.png", "brick.png", "camera.png", "cell.png", "chelsea.png",
    "clock_motion.png", "coffee.png", "coins.png", "grass.png", "gravel.png",
    "hubble_deep_field.jpg", "ihc.png", "moon.png", "motorcycle_left.png",
    "retina.jpg", "rocket.jpg",
]
TILE = 256
MAX_PER_SOURCE = 4


def tiles(img):
    h, w = img.shape[:2]
    out = []
    for y in range(0, h - TILE + 1, TILE):
        for x in range(0, w - TILE + 1, TILE):
            out.append(img[y:y + TILE, x:x + TILE])
    return out[:MAX_PER_SOURCE]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "natural"))
    args = ap.parse_args()
    root = os.path.dirname(skimage.data.__file__)
    names = []
    for src in SOURCES:
        img = skimage.io.imread(os.path.join(root, src))
        if img.ndim == 3:
            img = img[..., :3]
        stem = os.path.splitext(src)[0]
        for i, t in enumerate(tiles(img)):
            names.append((f"{stem}_{i}.png", np.ascontiguousarray(t)))
    names.sort(key=lambda p: p[0])
    for split in ("train", "test"):
        os.makedirs(os.path.join(args.out, split), exist_ok=True)
    for i, (name, t) in enumerate(names):
        split = "test" if i % 5 == 4 else "train"
        skimage.io.imsave(os.path.join(args.out, split, name), t, check_contrast=False)
    print(f"{len(names)} tiles written to {args.out}")


if __name__ == "__main__":
    main()
