#!/usr/bin/env python3
"""
Script to write a small seed data set: flame frame sequences and backgrounds.

The frames stand in for rendered flame simulations so the pipeline in
data/pipeline.yaml can run end to end without external assets.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

# Add the repository root to path to import the package
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.services.compositor import procedural_background
from src.utils.raster import save_png
from src.utils.rng import seeded_rng


SEQUENCES = {
    'flame_small_windy': {'size': (96, 160), 'sway': 0.12},
    'flame_large_calm': {'size': (160, 256), 'sway': 0.04},
}


def flame_frame(width: int, height: int, phase: float, sway: float) -> np.ndarray:
    """One RGBA flame frame with transparent margins around a flickering teardrop."""
    xs = (np.arange(width) + 0.5) / width
    ys = (np.arange(height) + 0.5) / height
    xx, yy = np.meshgrid(xs, ys)

    half_width = 0.32 * np.sqrt(np.clip((yy - 0.1) / 0.8, 0.0, 1.0)) * (1.0 + 0.15 * np.sin(phase + 6.0 * yy))
    centre = 0.5 + sway * np.sin(phase + 3.0 * yy) * (1.0 - yy)
    distance = np.abs(xx - centre)
    inside = (distance < half_width) & (yy > 0.1) & (yy < 0.9)

    intensity = np.where(inside, 1.0 - distance / np.maximum(half_width, 1e-9), 0.0)
    rgba = np.zeros((height, width, 4), dtype=np.float64)
    rgba[..., 0] = 255.0
    rgba[..., 1] = 60.0 + 180.0 * intensity * yy
    rgba[..., 2] = 40.0 * intensity
    rgba[..., 3] = 255.0 * np.clip(1.5 * intensity, 0.0, 1.0)
    rgba[~inside] = 0.0
    return np.rint(rgba).astype(np.uint8)


def write_seed_data(out_dir: Path, frames: int, backgrounds: int, image_size: tuple, seed: int) -> None:
    rng = seeded_rng(seed)
    for name, spec in SEQUENCES.items():
        width, height = spec['size']
        directory = out_dir / 'sprites' / name
        for index in range(frames):
            phase = 2.0 * np.pi * index / frames + float(rng.uniform(0.0, 0.3))
            save_png(directory / f"frame_{index}.png", flame_frame(width, height, phase, spec['sway']))
        print(f"✅ Wrote {frames} frames to {directory}")

    directory = out_dir / 'backgrounds'
    for index in range(backgrounds):
        save_png(directory / f"background_{index:03d}.png", procedural_background(image_size, rng))
    print(f"✅ Wrote {backgrounds} backgrounds to {directory}")


def main():
    """Write seed data and display what was produced."""
    parser = argparse.ArgumentParser(description='Write seed flame sequences and backgrounds')
    parser.add_argument('--out', default='data/seed', help='Output directory')
    parser.add_argument('--frames', type=int, default=96, help='Frames per flame sequence')
    parser.add_argument('--backgrounds', type=int, default=8, help='Number of backgrounds')
    parser.add_argument('--size', type=int, nargs=2, default=(640, 480), metavar=('W', 'H'), help='Background size')
    parser.add_argument('--seed', type=int, default=0, help='Random seed')
    args = parser.parse_args()

    try:
        write_seed_data(Path(args.out), args.frames, args.backgrounds, tuple(args.size), args.seed)
        print("\n✅ Seed data complete!")
    except Exception as e:
        print(f"❌ Error writing seed data: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
