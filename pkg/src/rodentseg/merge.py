"""Per-superpixel statistics and intensity-based region merging.

Adjacent superpixels whose mean intensities differ by less than ten percent
of either side's mean, and by less than five percent of the channel maximum,
are linked; merged regions are the connected components of that relation,
iterated until no adjacent pair links any more (so re-running the merge on
its own output is the identity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .imgio import LabelMap, Layout, RasterImage

__all__ = [
    "SuperpixelStats",
    "AdjacencyGraph",
    "MergedRegions",
    "compute_stats",
    "build_adjacency",
    "merge_regions",
    "regions_to_mask",
    "merge_labelmap",
    "intensity_channel",
    "intensity_max",
]


@dataclass
class SuperpixelStats:
    """Centroid, mean intensity and size per superpixel.

    ``intensity_sum`` keeps the exact per-superpixel pixel sums so that
    merged groups can report the pixel-weighted mean without accumulating
    rounding error.
    """

    centroids: np.ndarray       # (n, 2) float64, columns (x, y)
    mean_intensity: np.ndarray  # (n,) float64
    intensity_sum: np.ndarray   # (n,) float64
    sizes: np.ndarray           # (n,) int64
    bboxes: np.ndarray          # (n, 4) int64, (x0, y0, x1, y1), exclusive max

    def __len__(self):
        return self.sizes.shape[0]


@dataclass
class AdjacencyGraph:
    """Symmetric, irreflexive neighbor sets over superpixel ids."""

    neighbors: list

    def __len__(self):
        return len(self.neighbors)

    def pairs(self):
        """All adjacent (i, j) pairs with i < j, in ascending order."""
        for i, nbrs in enumerate(self.neighbors):
            for j in nbrs:
                if j > i:
                    yield i, int(j)


@dataclass
class MergedRegions:
    """Partition of superpixels into merged groups."""

    members: list               # per group: ascending superpixel ids
    sizes: np.ndarray           # (g,) int64 total pixels
    mean_intensity: np.ndarray  # (g,) float64 pixel-weighted means
    bboxes: np.ndarray          # (g, 4) int64
    superpixel_group: np.ndarray  # (n,) int32, group index per superpixel

    @property
    def group_count(self) -> int:
        return len(self.members)


def intensity_channel(img: RasterImage) -> np.ndarray:
    """The merge intensity of an image: raw samples, or the R/G/B mean for RGB."""
    if img.layout is Layout.RGB8:
        return img.data.astype(np.float64).mean(axis=2)
    return img.data.astype(np.float64)


def intensity_max(img: RasterImage) -> float:
    """Channel maximum used for the merge cap (180 for hue, 255 otherwise)."""
    return 180.0 if img.layout is Layout.HUE8 else 255.0


def compute_stats(labels: LabelMap, channel: RasterImage) -> SuperpixelStats:
    """Centroid (coordinate mean), mean intensity and size per superpixel.

    For an RGB channel image the per-pixel intensity is the mean of the
    three samples; single-channel images contribute their raw samples.
    """
    lab = labels.labels
    if channel.data.shape[:2] != lab.shape:
        raise DimensionError("label map and channel image dimensions differ")
    intensity = intensity_channel(channel)

    n = labels.cluster_count
    flat = lab.ravel()
    sizes = np.bincount(flat, minlength=n).astype(np.int64)
    if np.any(sizes == 0):
        raise ParameterError("label map has empty superpixel ids")

    h, w = lab.shape
    xgrid, ygrid = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    cx = np.bincount(flat, weights=xgrid.ravel(), minlength=n) / sizes
    cy = np.bincount(flat, weights=ygrid.ravel(), minlength=n) / sizes
    isum = np.bincount(flat, weights=intensity.ravel(), minlength=n)

    x0 = np.full(n, w, dtype=np.int64)
    x1 = np.zeros(n, dtype=np.int64)
    y0 = np.full(n, h, dtype=np.int64)
    y1 = np.zeros(n, dtype=np.int64)
    np.minimum.at(x0, flat, xgrid.ravel().astype(np.int64))
    np.maximum.at(x1, flat, xgrid.ravel().astype(np.int64))
    np.minimum.at(y0, flat, ygrid.ravel().astype(np.int64))
    np.maximum.at(y1, flat, ygrid.ravel().astype(np.int64))
    bboxes = np.stack([x0, y0, x1 + 1, y1 + 1], axis=1)

    return SuperpixelStats(
        centroids=np.stack([cx, cy], axis=1),
        mean_intensity=isum / sizes,
        intensity_sum=isum,
        sizes=sizes,
        bboxes=bboxes,
    )


def build_adjacency(labels: LabelMap) -> AdjacencyGraph:
    """Neighbor sets: i and j are adjacent iff some pixel of i 4-touches a pixel of j."""
    lab = labels.labels
    n = labels.cluster_count
    a = []
    b = []
    right = lab[:, 1:] != lab[:, :-1]
    a.append(lab[:, :-1][right])
    b.append(lab[:, 1:][right])
    down = lab[1:, :] != lab[:-1, :]
    a.append(lab[:-1, :][down])
    b.append(lab[1:, :][down])
    a = np.concatenate(a)
    b = np.concatenate(b)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    uniq = np.unique(lo.astype(np.int64) * n + hi)
    neighbors = [[] for _ in range(n)]
    for code in uniq:
        i, j = divmod(int(code), n)
        neighbors[i].append(j)
        neighbors[j].append(i)
    return AdjacencyGraph([np.array(sorted(nb), dtype=np.int64) for nb in neighbors])


def _links(gmean: np.ndarray, pairs, ratio: float, cap: float):
    """Adjacent group pairs satisfying the intensity-link condition either way."""
    out = []
    for a, b in pairs:
        d = abs(gmean[a] - gmean[b])
        if (d < ratio * gmean[b] and d < cap) or (d < ratio * gmean[a] and d < cap):
            out.append((a, b))
    return out


def merge_regions(stats: SuperpixelStats, graph: AdjacencyGraph, i_max: float,
                  *, ratio: float = 0.10, cap_fraction: float = 0.05) -> MergedRegions:
    """Group adjacent superpixels of similar mean intensity.

    A pair links when the absolute difference of mean intensities is below
    ``ratio`` times either mean and below ``cap_fraction * i_max``.  Linking
    repeats on the grouped regions (pixel-weighted means, lifted adjacency)
    until a fixpoint, so the output re-merges to itself.

    Args:
        stats: per-superpixel statistics.
        graph: superpixel adjacency over the same id range.
        i_max: channel intensity maximum (180 hue, 255 otherwise).
    """
    n = len(stats)
    if n == 0:
        raise ParameterError("cannot merge empty statistics")
    if len(graph) != n:
        raise DimensionError("stats and adjacency cover different id ranges")
    cap = cap_fraction * i_max

    base_pairs = list(graph.pairs())
    group = np.arange(n, dtype=np.int64)  # current group root per superpixel

    while True:
        roots, inv = np.unique(group, return_inverse=True)
        g = roots.size
        gsize = np.bincount(inv, weights=stats.sizes.astype(np.float64), minlength=g)
        gsum = np.bincount(inv, weights=stats.intensity_sum, minlength=g)
        gmean = gsum / gsize

        lifted = sorted({(min(inv[i], inv[j]), max(inv[i], inv[j]))
                         for i, j in base_pairs if inv[i] != inv[j]})
        linked = _links(gmean, lifted, ratio, cap)
        if not linked:
            break

        parent = list(range(g))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in linked:
            ra, rb = find(a), find(b)
            if ra != rb:
                if ra > rb:
                    ra, rb = rb, ra
                parent[rb] = ra
        group = np.array([roots[find(inv[i])] for i in range(n)], dtype=np.int64)

    roots, inv = np.unique(group, return_inverse=True)
    g = roots.size
    members = [[] for _ in range(g)]
    for sp in range(n):
        members[inv[sp]].append(sp)
    sizes = np.bincount(inv, weights=stats.sizes.astype(np.float64), minlength=g).astype(np.int64)
    gsum = np.bincount(inv, weights=stats.intensity_sum, minlength=g)
    bboxes = np.empty((g, 4), dtype=np.int64)
    for gi, mem in enumerate(members):
        bb = stats.bboxes[mem]
        bboxes[gi] = (bb[:, 0].min(), bb[:, 1].min(), bb[:, 2].max(), bb[:, 3].max())
    return MergedRegions(
        members=members,
        sizes=sizes,
        mean_intensity=gsum / sizes,
        bboxes=bboxes,
        superpixel_group=inv.astype(np.int32),
    )


def regions_to_mask(regions: MergedRegions, labels: LabelMap) -> LabelMap:
    """Per-pixel group id map; group ids run from 1, id 0 stays unused."""
    if regions.superpixel_group.shape[0] != labels.cluster_count:
        raise DimensionError("regions and label map cover different superpixel ranges")
    mask = regions.superpixel_group[labels.labels].astype(np.int32) + 1
    return LabelMap(mask, regions.group_count + 1)


def merge_labelmap(labels: LabelMap, channel: RasterImage,
                   *, ratio: float = 0.10, cap_fraction: float = 0.05):
    """Convenience: stats + adjacency + merge + mask in one call.

    Returns:
        (MergedRegions, region mask LabelMap)
    """
    stats = compute_stats(labels, channel)
    graph = build_adjacency(labels)
    regions = merge_regions(stats, graph, intensity_max(channel),
                            ratio=ratio, cap_fraction=cap_fraction)
    return regions, regions_to_mask(regions, labels)
