"""Synthetic colored-shape frames standing in for a camera object dataset.

Frames hold one red-family shape (box, circle, triangle, or an irregular
polygon) on a dark background, with seeded hue jitter and additive pixel
noise.  Feeding them through the segmentation pipeline yields binary
patches, which is how the bundled 4-class benchmark dataset is built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .imaging import ImageFrame, SegmentParams, extract_patch, hsv_to_rgb_units, segment_object
from .numerics import Rng

SHAPE_KINDS = ("box", "circle", "triangle", "irregular")

# the renderer works in reds; segmentation selects this wraparound band
HUE_BAND = (330.0, 30.0)


@dataclass(frozen=True)
class ShapePose:
    scale: float  # circumscribed radius in pixels
    rotation: float  # radians
    offset: tuple[int, int]  # (row, col) center


def _polygon_vertices(kind: str, pose: ShapePose, gen) -> np.ndarray:
    if kind == "box":
        angles = pose.rotation + np.deg2rad([45.0, 135.0, 225.0, 315.0])
        radii = np.full(4, pose.scale)
    elif kind == "triangle":
        angles = pose.rotation + np.deg2rad([90.0, 210.0, 330.0])
        radii = np.full(3, pose.scale)
    elif kind == "irregular":
        n = 11
        angles = pose.rotation + np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        angles = angles + gen.uniform(-0.15, 0.15, n)
        radii = pose.scale * gen.uniform(0.55, 1.0, n)
    else:
        raise ValueError(f"unknown shape kind {kind!r}")
    rows = pose.offset[0] - radii * np.sin(angles)
    cols = pose.offset[1] + radii * np.cos(angles)
    return np.stack([rows, cols], axis=1)


def _fill_polygon(vertices: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Even-odd rasterization by horizontal-ray crossing counts."""
    h, w = shape
    rr, cc = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    inside = np.zeros(shape, dtype=bool)
    n = len(vertices)
    for i in range(n):
        r1, c1 = vertices[i]
        r2, c2 = vertices[(i + 1) % n]
        if r1 == r2:
            continue
        straddles = (rr >= min(r1, r2)) & (rr < max(r1, r2))
        cross_col = c1 + (rr - r1) * (c2 - c1) / (r2 - r1)
        inside ^= straddles & (cc < cross_col)
    return inside


def synth_shape(kind: str, pose: ShapePose, noise_level: float, rng: Rng, frame_shape=(120, 120)):
    """Render one frame; returns (ImageFrame, class index).

    The same (kind, pose, noise_level, rng, frame_shape) always produces an
    identical frame.  ``noise_level`` in [0, 1] scales the additive pixel
    noise and widens the hue jitter.
    """
    if kind not in SHAPE_KINDS:
        raise ValueError(f"unknown shape kind {kind!r}; expected one of {SHAPE_KINDS}")
    if not pose.scale > 0.0:
        raise ValueError("degenerate pose: scale must be positive")
    h, w = int(frame_shape[0]), int(frame_shape[1])
    r0, c0 = pose.offset
    if not (0 <= r0 < h and 0 <= c0 < w):
        raise ValueError(f"pose offset {pose.offset} is outside the {h}x{w} frame")
    if not 0.0 <= noise_level <= 1.0:
        raise ValueError("noise_level must be in [0, 1]")
    gen = rng.generator()
    if kind == "circle":
        rr, cc = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
        inside = (rr - r0) ** 2 + (cc - c0) ** 2 <= pose.scale**2
    else:
        inside = _fill_polygon(_polygon_vertices(kind, pose, gen), (h, w))
    hue = gen.uniform(-4.0, 4.0) + noise_level * gen.uniform(-14.0, 14.0)
    sat = 0.88 + gen.uniform(-0.06, 0.06)
    val = 0.82 + gen.uniform(-0.08, 0.08)
    r, g, b = hsv_to_rgb_units(hue % 360.0, sat, val)
    frame = np.empty((h, w, 3), dtype=np.float64)
    frame[..., :] = 18.0  # uniform dark background
    frame[inside, 0] = r * 255.0
    frame[inside, 1] = g * 255.0
    frame[inside, 2] = b * 255.0
    if noise_level > 0.0:
        frame += gen.normal(0.0, 55.0 * noise_level, frame.shape)
    pixels = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    return ImageFrame(pixels, "rgb8"), SHAPE_KINDS.index(kind)


def synth_shape_dataset(
    n_per_class: int,
    noise_level: float,
    rng: Rng,
    frame_shape=(120, 120),
    side: int = 52,
    params: SegmentParams = SegmentParams(),
    keep_frames: int = 0,
):
    """Generate frames for every shape kind and push them through segmentation.

    Returns (dataset, sample_frames): a LabeledDataset of flattened binary
    patches plus up to ``keep_frames`` rendered frames per class for
    inspection.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    h, w = int(frame_shape[0]), int(frame_shape[1])
    scale_hi = min(h, w) / 4.0
    scale_lo = max(8.0, scale_hi * 0.55)
    margin = int(np.ceil(scale_hi)) + 6
    if 2 * margin >= min(h, w):
        raise ValueError(f"frame {h}x{w} is too small for the pose margins")
    gen = Rng(rng.seed, rng.stream).split(0).generator()
    rows, labels, samples = [], [], []
    frame_idx = 0
    for class_idx, kind in enumerate(SHAPE_KINDS):
        for i in range(n_per_class):
            pose = ShapePose(
                scale=float(gen.uniform(scale_lo, scale_hi)),
                rotation=float(gen.uniform(0.0, 2.0 * np.pi)),
                offset=(
                    int(gen.integers(margin, h - margin)),
                    int(gen.integers(margin, w - margin)),
                ),
            )
            frame, label = synth_shape(kind, pose, noise_level, rng.split(1 + frame_idx), frame_shape)
            frame_idx += 1
            mask, centroid = segment_object(frame, *HUE_BAND, params)
            rows.append(extract_patch(mask, centroid, side))
            labels.append(label)
            if i < keep_frames:
                samples.append(frame)
    return LabeledDataset(np.array(rows), np.array(labels), SHAPE_KINDS), samples
