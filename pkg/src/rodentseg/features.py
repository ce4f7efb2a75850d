"""Region feature extraction: four color means plus 24 co-occurrence statistics.

The texture half quantizes the grayscale crop of a region to ``levels`` bins,
builds one symmetric, normalized co-occurrence matrix per displacement angle
(0, 45, 90, 135 degrees at distance 1, pairs restricted to the region mask)
and summarizes each matrix with six scalar statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .imgio import LabelMap, Layout, RasterImage, to_gray, to_hue_sat

__all__ = [
    "GLCM_ANGLES",
    "FEATURE_NAMES",
    "GlcmMatrix",
    "quantize",
    "glcm",
    "haralick",
    "color_means",
    "feature_vector",
    "region_feature_table",
]

GLCM_ANGLES = (0, 45, 90, 135)

# unit displacement (row, col) per angle; rows grow downward
_ANGLE_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}

_HARALICK_NAMES = ("contrast", "dissimilarity", "homogeneity", "asm", "energy", "correlation")

FEATURE_NAMES = tuple(
    ["gray_mean", "green_mean", "sat_mean", "hue_mean"]
    + [f"{stat}_a{angle}" for angle in GLCM_ANGLES for stat in _HARALICK_NAMES]
)


@dataclass
class GlcmMatrix:
    """Normalized, symmetrized co-occurrence probabilities for one angle."""

    levels: int
    probs: np.ndarray  # (levels, levels), sums to 1 unless degenerate
    degenerate: bool   # True when the region had no valid pair at this angle


def quantize(gray: np.ndarray, levels: int) -> np.ndarray:
    """Uniformly bin [0, 255] samples into ``levels`` gray levels."""
    return (gray.astype(np.int64) * levels) // 256


def glcm(crop: np.ndarray, mask: np.ndarray, angle: int, levels: int = 32) -> GlcmMatrix:
    """Co-occurrence matrix of a masked gray crop at one displacement angle.

    Both pixels of a pair must lie inside the mask; each pair is counted in
    both directions and the matrix is normalized to sum 1.  A region with no
    valid pair yields an all-zero matrix flagged degenerate.
    """
    if angle not in _ANGLE_OFFSETS:
        raise ParameterError(f"unsupported GLCM angle {angle}")
    if levels < 2:
        raise ParameterError("need at least 2 gray levels")
    crop = np.asarray(crop)
    mask = np.asarray(mask, dtype=bool)
    if crop.shape != mask.shape or crop.ndim != 2:
        raise DimensionError("crop and mask must be matching 2-D arrays")

    q = quantize(crop, levels)
    dr, dc = _ANGLE_OFFSETS[angle]
    h, w = q.shape
    src = (slice(max(0, -dr), h - max(0, dr)), slice(max(0, -dc), w - max(0, dc)))
    dst = (slice(max(0, dr), h + min(0, dr)), slice(max(0, dc), w + min(0, dc)))
    valid = mask[src] & mask[dst]
    i = q[src][valid]
    j = q[dst][valid]
    if i.size == 0:
        return GlcmMatrix(levels, np.zeros((levels, levels)), True)
    counts = np.bincount(i * levels + j, minlength=levels * levels).reshape(levels, levels)
    counts = counts + counts.T
    return GlcmMatrix(levels, counts / counts.sum(), False)


def haralick(m: GlcmMatrix) -> np.ndarray:
    """Six co-occurrence statistics: contrast, dissimilarity, homogeneity,
    angular second moment, energy, correlation.

    Correlation is defined as 0 when either marginal deviation vanishes;
    a degenerate matrix maps to six zeros.
    """
    if m.degenerate:
        return np.zeros(6)
    p = m.probs
    idx = np.arange(m.levels, dtype=np.float64)
    di = idx[:, None] - idx[None, :]
    contrast = float((p * di ** 2).sum())
    dissimilarity = float((p * np.abs(di)).sum())
    homogeneity = float((p / (1.0 + di ** 2)).sum())
    asm = float((p * p).sum())
    energy = float(np.sqrt(asm))

    pi = p.sum(axis=1)
    pj = p.sum(axis=0)
    mu_i = float((idx * pi).sum())
    mu_j = float((idx * pj).sum())
    var_i = float(((idx - mu_i) ** 2 * pi).sum())
    var_j = float(((idx - mu_j) ** 2 * pj).sum())
    if var_i <= 0 or var_j <= 0:
        correlation = 0.0
    else:
        correlation = float(
            (p * (idx[:, None] - mu_i) * (idx[None, :] - mu_j)).sum()
            / np.sqrt(var_i * var_j)
        )
    return np.array([contrast, dissimilarity, homogeneity, asm, energy, correlation])


def color_means(mask: np.ndarray, gray: np.ndarray, green: np.ndarray,
                sat: np.ndarray, hue: np.ndarray) -> np.ndarray:
    """Mean gray, green, saturation and hue over the region pixels."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ParameterError("region is empty")
    return np.array([
        float(np.asarray(c, dtype=np.float64)[mask].mean())
        for c in (gray, green, sat, hue)
    ])


def feature_vector(mask: np.ndarray, gray: np.ndarray, green: np.ndarray,
                   sat: np.ndarray, hue: np.ndarray, levels: int = 32) -> np.ndarray:
    """The 28-value region descriptor: 4 color means + 6 statistics x 4 angles.

    Texture runs on the bounding-box crop of the gray channel with pairs
    restricted to the region mask, so the vector is translation invariant.
    """
    mask = np.asarray(mask, dtype=bool)
    colors = color_means(mask, gray, green, sat, hue)
    ys, xs = np.nonzero(mask)
    box = (slice(ys.min(), ys.max() + 1), slice(xs.min(), xs.max() + 1))
    crop = np.asarray(gray)[box]
    crop_mask = mask[box]
    texture = np.concatenate([haralick(glcm(crop, crop_mask, a, levels)) for a in GLCM_ANGLES])
    return np.concatenate([colors, texture])


def region_feature_table(region_mask: LabelMap, frame: RasterImage, levels: int = 32):
    """Feature vectors for every region of a mask (ids >= 1).

    Returns:
        (region ids, (n, 28) feature matrix)
    """
    if frame.layout is not Layout.RGB8:
        raise ParameterError("feature extraction needs the RGB frame")
    if frame.data.shape[:2] != region_mask.labels.shape:
        raise DimensionError("frame and region mask dimensions differ")
    gray = to_gray(frame).data
    green = frame.data[:, :, 1]
    hue_img, sat_img = to_hue_sat(frame)
    ids = [i for i in np.unique(region_mask.labels) if i > 0]
    rows = [
        feature_vector(region_mask.labels == i, gray, green, sat_img.data, hue_img.data, levels)
        for i in ids
    ]
    table = np.vstack(rows) if rows else np.empty((0, len(FEATURE_NAMES)))
    return np.array(ids, dtype=np.int64), table
