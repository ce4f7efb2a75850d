"""Frame ingestion, color-space conversion and mask / overlay I/O.

Raster data is kept in plain numpy arrays wrapped by :class:`RasterImage`
(pixel layout tag) and :class:`LabelMap` (per-pixel region ids).  All
conversions are pure functions; the coordinate convention everywhere is
``x = column, y = row``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import convolve

from .errors import DimensionError, IngestError, LayoutError

HUE_MAX = 180  # hue stored in half-degree units, samples in [0, 179]
INTENSITY_MAX = 255

# Luma weights for the grayscale conversion.
_LUMA = (0.299, 0.587, 0.114)

# Boundary palette for overlays, indexed by region class
# (0 unassigned/background, 1 paw, 2 body, 3 ear-nose-tail).
CLASS_PALETTE = {
    0: (235, 220, 80),
    1: (230, 60, 60),
    2: (80, 200, 100),
    3: (90, 120, 235),
}


class Layout(enum.Enum):
    """Channel layout of a :class:`RasterImage` buffer."""

    BAYER_RGGB8 = "bayer_rggb8"
    RGB8 = "rgb8"
    GRAY8 = "gray8"
    HUE8 = "hue8"
    SAT8 = "sat8"


_SAMPLES_PER_PIXEL = {
    Layout.BAYER_RGGB8: 1,
    Layout.RGB8: 3,
    Layout.GRAY8: 1,
    Layout.HUE8: 1,
    Layout.SAT8: 1,
}


@dataclass
class RasterImage:
    """A width x height pixel grid with a channel-layout tag.

    ``data`` is a row-major uint8 array, shape ``(h, w)`` for single-sample
    layouts and ``(h, w, 3)`` for RGB8.  Hue samples are half-degrees in
    [0, 179]; every other layout uses the full [0, 255] range.
    """

    layout: Layout
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise LayoutError(f"raster buffer must be uint8, got {data.dtype}")
        spp = _SAMPLES_PER_PIXEL[self.layout]
        if spp == 1 and data.ndim != 2:
            raise DimensionError(f"{self.layout.value} expects a 2-D buffer, got shape {data.shape}")
        if spp == 3 and (data.ndim != 3 or data.shape[2] != 3):
            raise DimensionError(f"{self.layout.value} expects (h, w, 3), got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionError("empty image")
        if self.layout is Layout.HUE8 and data.max(initial=0) >= HUE_MAX:
            raise LayoutError("hue samples must lie in [0, 179]")
        self.data = data

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class LabelMap:
    """Per-pixel region identifiers plus the number of distinct ids.

    Ids live in ``[0, cluster_count)``.  Superpixel segmenters emit compact
    0-based ids where every id occurs; merged-region masks and ground-truth
    masks reserve id 0 for background, which therefore may be absent.
    """

    labels: np.ndarray
    cluster_count: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise DimensionError(f"label map must be 2-D, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            raise LayoutError("label map must be integer typed")
        self.labels = labels.astype(np.int32, copy=False)
        if labels.size and (labels.min() < 0 or labels.max() >= self.cluster_count):
            raise DimensionError("label id outside [0, cluster_count)")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


# ---------------------------------------------------------------------------
# color-space conversions
# ---------------------------------------------------------------------------

def _round_half_up(x):
    return np.floor(x + 0.5)


def debayer(raw: RasterImage) -> RasterImage:
    """Demosaic an RGGB Bayer frame to RGB by bilinear interpolation.

    Each missing color sample is the average of the in-bounds neighbors of
    that color inside the 3x3 neighborhood (the classic bilinear kernels;
    at borders the average runs over the neighbors that exist).

    Args:
        raw: frame with layout BAYER_RGGB8 and even width/height.

    Returns:
        RGB8 frame with the same dimensions.
    """
    if raw.layout is not Layout.BAYER_RGGB8:
        raise LayoutError(f"debayer expects BAYER_RGGB8, got {raw.layout.value}")
    h, w = raw.data.shape
    if h % 2 or w % 2:
        raise DimensionError(f"Bayer frame dimensions must be even, got {w}x{h}")

    data = raw.data.astype(np.float64)
    ys, xs = np.mgrid[0:h, 0:w]
    mask_r = ((ys % 2 == 0) & (xs % 2 == 0)).astype(np.float64)
    mask_g = ((ys + xs) % 2 == 1).astype(np.float64)
    mask_b = ((ys % 2 == 1) & (xs % 2 == 1)).astype(np.float64)

    ring = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.float64)
    out = np.empty((h, w, 3), dtype=np.uint8)
    for c, mask in enumerate((mask_r, mask_g, mask_b)):
        num = convolve(data * mask, ring, mode="constant", cval=0.0)
        den = convolve(mask, ring, mode="constant", cval=0.0)
        est = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        plane = np.where(mask > 0, data, _round_half_up(est))
        out[:, :, c] = np.clip(plane, 0, 255).astype(np.uint8)
    return RasterImage(Layout.RGB8, out)


def to_gray(img: RasterImage) -> RasterImage:
    """Convert RGB to grayscale with the 0.299 / 0.587 / 0.114 luma weights."""
    if img.layout is not Layout.RGB8:
        raise LayoutError(f"to_gray expects RGB8, got {img.layout.value}")
    rgb = img.data.astype(np.float64)
    gray = rgb[:, :, 0] * _LUMA[0] + rgb[:, :, 1] * _LUMA[1] + rgb[:, :, 2] * _LUMA[2]
    gray = np.clip(_round_half_up(gray), 0, 255).astype(np.uint8)
    return RasterImage(Layout.GRAY8, gray)


def to_hue_sat(img: RasterImage) -> tuple[RasterImage, RasterImage]:
    """Extract the HSV hue and saturation channels of an RGB image.

    Hue is scaled to half-degrees in [0, 179], saturation to [0, 255].
    Achromatic pixels (max == min) get hue 0 and saturation 0; ties for the
    maximum channel resolve in R, G, B priority order.
    """
    if img.layout is not Layout.RGB8:
        raise LayoutError(f"to_hue_sat expects RGB8, got {img.layout.value}")
    rgb = img.data.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    d = mx - mn

    safe_d = np.where(d > 0, d, 1.0)
    hue_deg = np.zeros_like(mx)
    is_r = (mx == r)
    is_g = (mx == g) & ~is_r
    is_b = ~(is_r | is_g)
    hue_deg = np.where(is_r, np.mod(60.0 * (g - b) / safe_d, 360.0), hue_deg)
    hue_deg = np.where(is_g, 60.0 * (b - r) / safe_d + 120.0, hue_deg)
    hue_deg = np.where(is_b, 60.0 * (r - g) / safe_d + 240.0, hue_deg)
    hue_deg = np.where(d > 0, hue_deg, 0.0)
    hue = (_round_half_up(hue_deg / 2.0) % HUE_MAX).astype(np.uint8)

    safe_mx = np.where(mx > 0, mx, 1.0)
    sat = np.where(mx > 0, _round_half_up(d / safe_mx * 255.0), 0.0).astype(np.uint8)
    return RasterImage(Layout.HUE8, hue), RasterImage(Layout.SAT8, sat)


def rgb_mean_channel(img: RasterImage) -> np.ndarray:
    """Per-pixel mean of the R, G, B samples as float64 (merge intensity source)."""
    if img.layout is not Layout.RGB8:
        raise LayoutError(f"rgb_mean_channel expects RGB8, got {img.layout.value}")
    return img.data.astype(np.float64).mean(axis=2)


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def load_frame(path) -> RasterImage:
    """Load a frame from an 8-bit PNG (RGB or gray) or a raw Bayer binary.

    Raw frames (``*.raw``) need a sidecar JSON next to them with the same
    stem, holding ``{"width": W, "height": H, "layout": "bayer_rggb8"}``.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such frame: {path}")
    if path.suffix.lower() == ".raw":
        sidecar = path.with_suffix(".json")
        if not sidecar.exists():
            raise IngestError(f"raw frame {path} is missing its sidecar {sidecar.name}")
        meta = json.loads(sidecar.read_text())
        w, h = int(meta["width"]), int(meta["height"])
        layout = Layout(meta.get("layout", "bayer_rggb8"))
        buf = np.fromfile(path, dtype=np.uint8)
        spp = _SAMPLES_PER_PIXEL[layout]
        if buf.size != w * h * spp:
            raise IngestError(f"raw frame {path} holds {buf.size} samples, expected {w * h * spp}")
        shape = (h, w) if spp == 1 else (h, w, spp)
        return RasterImage(layout, buf.reshape(shape))

    with Image.open(path) as im:
        if im.mode == "RGB":
            return RasterImage(Layout.RGB8, np.asarray(im))
        if im.mode == "RGBA":
            return RasterImage(Layout.RGB8, np.asarray(im.convert("RGB")))
        if im.mode == "L":
            return RasterImage(Layout.GRAY8, np.asarray(im))
        raise IngestError(f"unsupported image mode {im.mode!r} in {path}")


def save_image(path, img: RasterImage) -> None:
    """Write a RasterImage as an 8-bit PNG (RGB or single channel)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.data).save(path)


def load_mask(path, expected_shape=None) -> LabelMap:
    """Load a 16-bit single-channel PNG as a LabelMap.

    Args:
        path: mask file path.
        expected_shape: optional (height, width) of the companion frame;
            a mismatch raises IngestError.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such mask: {path}")
    with Image.open(path) as im:
        if im.mode not in ("I;16", "I;16B", "I"):
            raise IngestError(f"mask {path} must be a 16-bit single-channel image, got mode {im.mode!r}")
        arr = np.asarray(im).astype(np.int32)
    if arr.ndim != 2:
        raise IngestError(f"mask {path} is not single-channel")
    if expected_shape is not None and tuple(arr.shape) != tuple(expected_shape):
        raise IngestError(
            f"mask {path} is {arr.shape[1]}x{arr.shape[0]}, companion frame is "
            f"{expected_shape[1]}x{expected_shape[0]}"
        )
    return LabelMap(arr, int(arr.max()) + 1)


def save_labelmap(path, labelmap: LabelMap) -> None:
    """Write a LabelMap as a 16-bit grayscale PNG (id 0 reserved for background)."""
    if labelmap.cluster_count > 65536:
        raise IngestError("label ids exceed the 16-bit mask range")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(labelmap.labels.astype(np.uint16)).save(path)


def save_overlay(path, frame: RasterImage, regions: LabelMap, region_classes=None) -> None:
    """Write the frame with region boundaries drawn in the per-class palette.

    Args:
        frame: RGB8 frame to draw on.
        regions: region id map (matching dimensions).
        region_classes: optional array mapping region id -> class id; without
            it every boundary uses the class-0 color.
    """
    if frame.layout is not Layout.RGB8:
        raise LayoutError("overlay needs an RGB8 frame")
    if frame.data.shape[:2] != regions.labels.shape:
        raise DimensionError("overlay frame and region mask dimensions differ")
    lab = regions.labels
    boundary = np.zeros(lab.shape, dtype=bool)
    boundary[:, 1:] |= lab[:, 1:] != lab[:, :-1]
    boundary[:, :-1] |= lab[:, 1:] != lab[:, :-1]
    boundary[1:, :] |= lab[1:, :] != lab[:-1, :]
    boundary[:-1, :] |= lab[1:, :] != lab[:-1, :]

    out = frame.data.copy()
    if region_classes is None:
        out[boundary] = CLASS_PALETTE[0]
    else:
        region_classes = np.asarray(region_classes, dtype=np.int64)
        classes = region_classes[lab]
        for cls, color in CLASS_PALETTE.items():
            sel = boundary & (classes == cls)
            out[sel] = color
    save_image(path, RasterImage(Layout.RGB8, out))
