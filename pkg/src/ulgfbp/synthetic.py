"""Synthetic oriented-grating corpus for desk-scale end-to-end runs.

    python -m ulgfbp.synthetic OUT_DIR [--per-class 60] [--size 64] [--seed 0]
"""

import argparse
import math
from pathlib import Path

import numpy as np

ORIENTATIONS_DEG = (0, 60, 120)


def grating(size, angle, freq, phase, noise_sigma, rng):
    """8-bit sinusoidal grating; ``freq`` in cycles per pixel."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    t = x * math.cos(angle) + y * math.sin(angle)
    img = 128.0 + 80.0 * np.sin(2 * math.pi * freq * t + phase)
    img += rng.normal(0.0, noise_sigma, img.shape)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def grating_corpus(per_class=60, size=64, orientations_deg=ORIENTATIONS_DEG,
                   base_freq=0.125, freq_jitter=0.15, noise_sigma=12.0, seed=0):
    """Return ``(images, labels, class_names)``; fully determined by ``seed``."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    names = [f"orient{int(d):03d}" for d in orientations_deg]
    for label, deg in enumerate(orientations_deg):
        for _ in range(per_class):
            freq = base_freq * (1.0 + rng.uniform(-freq_jitter, freq_jitter))
            phase = rng.uniform(0, 2 * math.pi)
            images.append(grating(size, math.radians(deg), freq, phase, noise_sigma, rng))
            labels.append(label)
    return images, np.array(labels, dtype=np.int64), names


def write_corpus(root, **kwargs):
    """Write the corpus as ``root/<class>/img_NNN.png``; returns the root."""
    from .imageio import write_png
    root = Path(root)
    images, labels, names = grating_corpus(**kwargs)
    counters = [0] * len(names)
    for img, lab in zip(images, labels):
        write_png(root / names[lab] / f"img_{counters[lab]:03d}.png", img)
        counters[lab] += 1
    return root


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m ulgfbp.synthetic", description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--per-class", type=int, default=60)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--noise", type=float, default=12.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    write_corpus(args.out, per_class=args.per_class, size=args.size,
                 noise_sigma=args.noise, seed=args.seed)
    print(args.out)


if __name__ == "__main__":
    main()
