"""Synthetic gesture silhouettes for training and regression runs.

Ten parametric shape families stand in for the ten hand poses. Each draw
jitters translation, rotation, and scale, so a trained model has to key on
shape rather than exact pixel positions. Rendering is analytic (predicates
over a transformed coordinate grid), which keeps the generator free of any
image dependencies and byte-reproducible for a given seed.
"""

from __future__ import annotations

import math
import os
import re

import numpy as np

from .imaging import Frame, decode_netpbm, encode_netpbm

GRID = 50
CLASS_NAMES = {
    1: "disk",
    2: "ring",
    3: "bar_horizontal",
    4: "bar_vertical",
    5: "plus",
    6: "cross_diagonal",
    7: "fan_two",
    8: "fan_three",
    9: "fan_four",
    10: "square_hollow",
}

# jitter envelope per draw
_SHIFT = 4.0        # pixels, each axis
_TILT = 15.0        # degrees
_SCALE_SPREAD = 0.1


def _finger_mask(u, v, angles_deg, palm_r=9.0, length=21.0, width=3.2):
    """Palm disk plus capsule fingers radiating upward at the given angles."""
    mask = (u ** 2 + (v - 10.0) ** 2) <= palm_r ** 2
    base_y = 4.0
    for deg in angles_deg:
        phi = math.radians(deg)
        ex, ey = math.sin(phi), -math.cos(phi)
        # distance from the segment base -> base + length*(ex, ey)
        t = np.clip((u * ex + (v - base_y) * ey) / length, 0.0, 1.0) * length
        du = u - t * ex
        dv = (v - base_y) - t * ey
        mask |= (du ** 2 + dv ** 2) <= width ** 2
    return mask


def _shape_predicate(cls: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    r = np.hypot(u, v)
    if cls == 1:
        return r <= 16.0
    if cls == 2:
        return (r >= 9.0) & (r <= 16.0)
    if cls == 3:
        return (np.abs(v) <= 5.0) & (np.abs(u) <= 20.0)
    if cls == 4:
        return (np.abs(u) <= 5.0) & (np.abs(v) <= 20.0)
    if cls == 5:
        along_x = (np.abs(v) <= 4.5) & (np.abs(u) <= 19.0)
        along_y = (np.abs(u) <= 4.5) & (np.abs(v) <= 19.0)
        return along_x | along_y
    if cls == 6:
        near = np.maximum(np.abs(u), np.abs(v)) <= 19.0
        return near & ((np.abs(u - v) <= 6.4) | (np.abs(u + v) <= 6.4))
    if cls == 7:
        return _finger_mask(u, v, (-22.0, 22.0))
    if cls == 8:
        return _finger_mask(u, v, (-32.0, 0.0, 32.0))
    if cls == 9:
        return _finger_mask(u, v, (-39.0, -13.0, 13.0, 39.0))
    if cls == 10:
        box = np.maximum(np.abs(u), np.abs(v))
        return (box >= 10.0) & (box <= 16.0)
    raise ValueError(f"class must be 1..10, got {cls}")


def render_sample(cls: int, rng: np.random.Generator) -> np.ndarray:
    """One jittered GRID x GRID sample of a class, values 0/255 uint8."""
    dx = rng.uniform(-_SHIFT, _SHIFT)
    dy = rng.uniform(-_SHIFT, _SHIFT)
    theta = math.radians(rng.uniform(-_TILT, _TILT))
    scale = rng.uniform(1.0 - _SCALE_SPREAD, 1.0 + _SCALE_SPREAD)

    yy, xx = np.mgrid[0:GRID, 0:GRID].astype(np.float64)
    c = (GRID - 1) / 2.0
    x = (xx - c - dx) / scale
    y = (yy - c - dy) / scale
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    u = cos_t * x + sin_t * y
    v = -sin_t * x + cos_t * y
    return np.where(_shape_predicate(cls, u, v), 255, 0).astype(np.uint8)


def generate_dataset(per_class: int, seed: int = 0):
    """Draw per_class samples for each of the 10 classes.

    Returns (samples, labels): samples is (10 * per_class, GRID * GRID)
    float64 in {0.0, 1.0}, labels is the matching int array of 1..10.
    Sample order is class-major and fully determined by the seed.
    """
    rng = np.random.default_rng(seed)
    samples = np.empty((10 * per_class, GRID * GRID))
    labels = np.empty(10 * per_class, dtype=np.int64)
    row = 0
    for cls in range(1, 11):
        for _ in range(per_class):
            samples[row] = (render_sample(cls, rng) == 255).astype(np.float64).ravel()
            labels[row] = cls
            row += 1
    return samples, labels


def save_dataset(root: str, per_class: int, seed: int = 0) -> int:
    """Write the dataset as PGM files: root/class_01/sample_0001.pgm etc."""
    rng = np.random.default_rng(seed)
    written = 0
    for cls in range(1, 11):
        folder = os.path.join(root, f"class_{cls:02d}")
        os.makedirs(folder, exist_ok=True)
        for idx in range(1, per_class + 1):
            data = encode_netpbm(Frame(render_sample(cls, rng)))
            path = os.path.join(folder, f"sample_{idx:04d}.pgm")
            tmp = f"{path}.tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
            written += 1
    return written


def load_dataset(root: str):
    """Read a dataset tree back into (samples, labels), sorted per class."""
    samples = []
    labels = []
    for entry in sorted(os.listdir(root)):
        match = re.fullmatch(r"class_(\d{2})", entry)
        if not match:
            continue
        cls = int(match.group(1))
        folder = os.path.join(root, entry)
        for name in sorted(os.listdir(folder)):
            if not name.endswith(".pgm"):
                continue
            with open(os.path.join(folder, name), "rb") as fh:
                frame = decode_netpbm(fh.read())
            if frame.channels != 1 or frame.pixels.shape != (GRID, GRID):
                raise ValueError(f"{name}: expected {GRID}x{GRID} grayscale sample")
            samples.append((frame.pixels == 255).astype(np.float64).ravel())
            labels.append(cls)
    if not samples:
        raise ValueError(f"no samples found under {root}")
    return np.array(samples), np.array(labels, dtype=np.int64)
