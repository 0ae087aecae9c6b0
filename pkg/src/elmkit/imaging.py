"""Raster frames, HSV conversion, PPM I/O, and the object segmentation pipeline.

Segmentation runs hue-band masking, a small box blur, a binary threshold,
a larger box blur, a second threshold, and largest-component selection,
then reports the component's integer centroid.  Border handling is
zero-padded throughout, which keeps the pipeline translation equivariant
away from the frame edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

CHANNEL_KINDS = ("rgb8", "gray8", "binary", "hsv8")


@dataclass(frozen=True)
class ImageFrame:
    pixels: np.ndarray  # rgb8/hsv8: (h, w, 3) uint8; gray8: (h, w) uint8; binary: (h, w) in {0, 1}
    channels: str

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if self.channels not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.channels!r}")
        if self.channels in ("rgb8", "hsv8"):
            if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
                raise ValueError(f"{self.channels} frames need (h, w, 3) uint8 pixels")
        else:
            if px.ndim != 2 or px.dtype != np.uint8:
                raise ValueError(f"{self.channels} frames need (h, w) uint8 pixels")
            if self.channels == "binary" and px.size and px.max() > 1:
                raise ValueError("binary frames only hold 0/1 values")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("frames need at least one pixel")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def rgb_to_hsv(img: ImageFrame) -> ImageFrame:
    """Hexcone HSV: hue in [0, 360) and saturation/value in [0, 1], all scaled to 8 bits."""
    if img.channels != "rgb8":
        raise ValueError(f"expected an rgb8 frame, got {img.channels}")
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=2)
    minc = rgb.min(axis=2)
    delta = maxc - minc
    hue = np.zeros_like(maxc)
    live = delta > 0
    rmax = live & (maxc == r)
    gmax = live & ~rmax & (maxc == g)
    bmax = live & ~rmax & ~gmax
    hue[rmax] = np.mod((g - b)[rmax] / delta[rmax], 6.0)
    hue[gmax] = (b - r)[gmax] / delta[gmax] + 2.0
    hue[bmax] = (r - g)[bmax] / delta[bmax] + 4.0
    hue *= 60.0  # degrees in [0, 360)
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    out = np.stack(
        [
            np.rint(hue / 360.0 * 255.0),
            np.rint(sat * 255.0),
            np.rint(maxc * 255.0),
        ],
        axis=2,
    ).astype(np.uint8)
    return ImageFrame(out, "hsv8")


def hsv_to_rgb_units(h_deg, s, v):
    """Scalar/array HSV (degrees, unit s and v) to unit RGB; used by the renderer."""
    h = (np.asarray(h_deg, dtype=np.float64) % 360.0) / 60.0
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return r, g, b


def read_ppm(path) -> ImageFrame:
    """Read a binary P6 PPM (maxval 255)."""
    with open(path, "rb") as f:
        data = f.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PPM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a P6 PPM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported")
    need = width * height * 3
    raw = data[pos : pos + need]
    if len(raw) != need:
        raise ValueError(f"{path}: truncated PPM payload")
    return ImageFrame(np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3), "rgb8")


def write_ppm(img: ImageFrame, path) -> None:
    """Write as binary P6; gray and binary frames are expanded to gray RGB."""
    if img.channels in ("rgb8", "hsv8"):
        px = img.pixels
    elif img.channels == "gray8":
        px = np.repeat(img.pixels[:, :, None], 3, axis=2)
    else:
        px = np.repeat((img.pixels * 255).astype(np.uint8)[:, :, None], 3, axis=2)
    with open(path, "wb") as f:
        f.write(f"P6\n{img.width} {img.height}\n255\n".encode())
        f.write(np.ascontiguousarray(px).tobytes())


@dataclass(frozen=True)
class SegmentParams:
    blur1: int = 3
    blur2: int = 7
    threshold: float = 0.5  # fraction of the post-blur maximum
    sat_min: float = 0.15  # drops dark/washed-out pixels whose hue is meaningless
    val_min: float = 0.15


def _box_blur(mask: np.ndarray, size: int) -> np.ndarray:
    return ndimage.uniform_filter(mask, size=size, mode="constant")


def segment_object(img: ImageFrame, hue_lo: float, hue_hi: float, params: SegmentParams = SegmentParams()):
    """Isolate the largest in-band object; returns (binary mask, (row, col) centroid).

    ``hue_lo`` and ``hue_hi`` are degrees; a range with hue_lo > hue_hi wraps
    around 0/360 (e.g. 330..30 selects reds).
    """
    if img.channels != "rgb8":
        raise ValueError(f"expected an rgb8 frame, got {img.channels}")
    hsv = rgb_to_hsv(img).pixels.astype(np.float64)
    hue = hsv[..., 0] / 255.0 * 360.0
    sat = hsv[..., 1] / 255.0
    val = hsv[..., 2] / 255.0
    if hue_lo <= hue_hi:
        in_band = (hue >= hue_lo) & (hue <= hue_hi)
    else:
        in_band = (hue >= hue_lo) | (hue <= hue_hi)
    mask = (in_band & (sat >= params.sat_min) & (val >= params.val_min)).astype(np.float64)
    if not mask.any():
        raise ValueError("no object in hue band")
    for size in (params.blur1, params.blur2):
        mask = _box_blur(mask, size)
        peak = mask.max()
        if peak <= 0.0:
            raise ValueError("no object in hue band")
        mask = (mask >= params.threshold * peak).astype(np.float64)
    labeled, n_components = ndimage.label(mask)
    if n_components == 0:
        raise ValueError("no object in hue band")
    sizes = ndimage.sum_labels(np.ones_like(mask), labeled, index=np.arange(1, n_components + 1))
    keep = int(np.argmax(sizes)) + 1
    component = labeled == keep
    rows, cols = np.nonzero(component)
    # round half up: commutes with integer shifts, keeping the pipeline
    # translation equivariant (half-even rounding would not)
    centroid = (int(np.floor(rows.mean() + 0.5)), int(np.floor(cols.mean() + 0.5)))
    return ImageFrame(component.astype(np.uint8), "binary"), centroid


def extract_patch(img: ImageFrame, centroid, side: int = 52) -> np.ndarray:
    """Flattened side x side crop of a mask centered on the centroid.

    The crop is zero-padded at the borders and binarized, so the result is
    always a length side*side vector of 0/1 values.
    """
    if img.channels not in ("binary", "gray8"):
        raise ValueError(f"expected a mask frame, got {img.channels}")
    r, c = int(centroid[0]), int(centroid[1])
    if not (0 <= r < img.height and 0 <= c < img.width):
        raise ValueError(f"centroid {centroid} is outside the frame")
    half = side // 2
    out = np.zeros((side, side), dtype=np.float64)
    r0, c0 = r - half, c - half
    src_r0, src_c0 = max(r0, 0), max(c0, 0)
    src_r1, src_c1 = min(r0 + side, img.height), min(c0 + side, img.width)
    window = img.pixels[src_r0:src_r1, src_c0:src_c1]
    out[src_r0 - r0 : src_r1 - r0, src_c0 - c0 : src_c1 - c0] = (window > 0).astype(np.float64)
    return out.reshape(-1)
