"""Deterministic synthetic frames with exact ground truth.

Three generators stand in for treadmill footage: a two-tone split frame, a
moving-blob sequence for the tracker, and a textured rodent silhouette with
per-pixel class masks (0 background, 1 paw, 2 body, 3 ear-nose-tail).  Class
colors are chosen so gray, hue and R/G/B-mean intensities all separate by a
comfortable margin over the merge thresholds, while texture is multiplicative
luminance noise that leaves hue untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .imgio import LabelMap, Layout, RasterImage, save_image, save_labelmap

__all__ = [
    "FIXTURE_KINDS",
    "CLASS_COLORS",
    "PAW_AREA_RANGE",
    "BlobSequence",
    "two_tone",
    "blob_sequence",
    "textured_silhouette",
    "make_fixture",
]

FIXTURE_KINDS = ("two-tone", "blob-sequence", "textured-rodent-silhouette")

# base RGB per class id (0 bg, 1 paw, 2 body, 3 ear-nose-tail)
CLASS_COLORS = {
    0: (168, 188, 205),
    1: (150, 24, 60),
    2: (142, 96, 48),
    3: (110, 190, 100),
}

PAW_AREA_RANGE = (100, 3500)  # pixels, the plausible paw footprint span

_BLOB_COLOR = (150, 24, 60)
_BLOB_BG = (200, 206, 214)


@dataclass
class BlobSequence:
    """A moving-ellipse sequence with analytic truth."""

    frames: list          # RGB8 RasterImages
    gt_masks: list        # LabelMaps, blob = 1
    centers: list         # analytic (x, y) ellipse centers per frame
    area: float           # requested ellipse area


def _ellipse(h, w, cx, cy, ax, ay):
    ys, xs = np.mgrid[0:h, 0:w]
    return ((xs - cx) / ax) ** 2 + ((ys - cy) / ay) ** 2 <= 1.0


def _paint(class_map: np.ndarray, colors, rng, noise: float) -> np.ndarray:
    """Render a class map to RGB with multiplicative luminance noise."""
    h, w = class_map.shape
    base = np.zeros((h, w, 3), dtype=np.float64)
    for cls, rgb in colors.items():
        base[class_map == cls] = rgb
    xs = np.arange(w)
    banding = 1.0 + 0.03 * np.sin(2.0 * np.pi * xs / 23.0)
    factor = (1.0 + noise * (2.0 * rng.random((h, w)) - 1.0)) * banding[None, :]
    out = np.clip(np.floor(base * factor[:, :, None] + 0.5), 0, 255)
    return out.astype(np.uint8)


def two_tone(width: int = 64, height: int = 64, left: int = 0, right: int = 255):
    """Split frame: constant left half / right half, with the split as truth."""
    half = width // 2
    img = np.full((height, width, 3), left, dtype=np.uint8)
    img[:, half:] = right
    gt = np.zeros((height, width), dtype=np.int32)
    gt[:, half:] = 1
    return RasterImage(Layout.RGB8, img), LabelMap(gt, 2)


def blob_sequence(seed: int, n_frames: int = 100, width: int = 320, height: int = 240,
                  velocity=(5.0, 0.0), area_range=PAW_AREA_RANGE, noise: float = 0.04,
                  jump_at: int = None, jump=(60.0, 0.0)) -> BlobSequence:
    """Dark paw-scale ellipse moving over a light textured background.

    The center follows ``p0 + t * velocity`` reflected at the borders, so the
    per-frame displacement never exceeds |velocity|.  ``jump_at`` teleports
    the blob by ``jump`` pixels on that frame (for loss-of-track tests).
    """
    rng = np.random.default_rng(seed)
    area = float(rng.uniform(*area_range))
    aspect = 1.3
    ax = np.sqrt(area * aspect / np.pi)
    ay = ax / aspect

    margin_x = ax + 4.0
    margin_y = ay + 4.0
    span_x = width - 2.0 * margin_x
    span_y = height - 2.0 * margin_y
    if span_x <= 0 or span_y <= 0:
        raise ParameterError("frame too small for the drawn blob")

    def reflect(p, margin, span):
        t = (p - margin) % (2.0 * span)
        return margin + (span - abs(t - span))

    x0 = margin_x + rng.uniform(0, span_x)
    y0 = margin_y + rng.uniform(0, span_y)

    frames, gts, centers = [], [], []
    ox = oy = 0.0
    colors = {0: _BLOB_BG, 1: _BLOB_COLOR}
    for t in range(n_frames):
        if jump_at is not None and t == jump_at:
            ox += jump[0]
            oy += jump[1]
        cx = reflect(x0 + velocity[0] * t + ox, margin_x, span_x)
        cy = reflect(y0 + velocity[1] * t + oy, margin_y, span_y)
        blob = _ellipse(height, width, cx, cy, ax, ay)
        class_map = blob.astype(np.int32)
        frames.append(RasterImage(Layout.RGB8, _paint(class_map, colors, rng, noise)))
        gts.append(LabelMap(class_map, 2))
        centers.append((cx, cy))
    return BlobSequence(frames=frames, gt_masks=gts, centers=centers, area=area)


def textured_silhouette(seed: int, width: int = 768, height: int = 448,
                        noise: float = 0.03):
    """One rodent-like frame: body, four paws, tail / ear / nose over a belt.

    Returns:
        (RGB8 frame, ground-truth LabelMap with classes 0..3)
    """
    rng = np.random.default_rng(seed)
    gt = np.zeros((height, width), dtype=np.int32)

    def put(cls, cx, cy, ax, ay):
        gt[_ellipse(height, width, cx, cy, ax, ay)] = cls

    # body plus head
    put(2, 0.44 * width, 0.50 * height, 0.24 * width, 0.16 * height)
    put(2, 0.66 * width, 0.44 * height, 0.07 * width, 0.09 * height)
    # tail, ear, nose (one class)
    put(3, 0.14 * width, 0.48 * height, 0.10 * width, 0.012 * height)
    put(3, 0.66 * width, 0.33 * height, 0.022 * width, 0.030 * height)
    put(3, 0.745 * width, 0.455 * height, 0.018 * width, 0.022 * height)
    # four paws along the belt line, paw-scale areas
    belt_y = 0.70 * height
    for fx in (0.30, 0.41, 0.52, 0.62):
        hi = max(PAW_AREA_RANGE[0], min(PAW_AREA_RANGE[1], 0.004 * width * height))
        area = rng.uniform(PAW_AREA_RANGE[0], hi)
        pax = np.sqrt(area * 1.4 / np.pi)
        pay = pax / 1.4
        put(1, fx * width, belt_y, pax, pay)

    frame = RasterImage(Layout.RGB8, _paint(gt, CLASS_COLORS, rng, noise))
    return frame, LabelMap(gt, 4)


def make_fixture(kind: str, seed: int, out_dir=None, **params):
    """Generate a fixture, optionally writing frames/ and gt/ PNGs plus meta.json.

    Returns the in-memory objects: (frame, gt) for single-frame kinds or a
    BlobSequence for blob-sequence.
    """
    if kind == "two-tone":
        result = two_tone(**params)
        frames, gts, meta = [result[0]], [result[1]], {}
    elif kind == "blob-sequence":
        result = blob_sequence(seed, **params)
        frames, gts = result.frames, result.gt_masks
        meta = {"centers": [[x, y] for x, y in result.centers], "area": result.area}
    elif kind == "textured-rodent-silhouette":
        result = textured_silhouette(seed, **params)
        frames, gts, meta = [result[0]], [result[1]], {}
    else:
        raise ParameterError(f"unknown fixture kind {kind!r}; expected one of {FIXTURE_KINDS}")

    if out_dir is not None:
        out_dir = Path(out_dir)
        for i, (frame, gt) in enumerate(zip(frames, gts)):
            save_image(out_dir / "frames" / f"frame_{i:04d}.png", frame)
            save_labelmap(out_dir / "gt" / f"frame_{i:04d}.png", gt)
        meta.update({"kind": kind, "seed": seed, "n_frames": len(frames)})
        (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return result
