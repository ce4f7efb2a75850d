"""Superpixel segmenters: SLIC (primary), graph-based (Gb) and quick shift (QS).

All three return a :class:`~rodentseg.imgio.LabelMap` whose ids form a
contiguous 0-based range with every id present.  Segmentation is fully
deterministic: every tie (equal distances, equal densities, equal edge
weights) resolves toward the lowest cluster id / pixel index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.ndimage import gaussian_filter
from scipy.sparse.csgraph import connected_components

from .errors import LayoutError, ParameterError
from .imgio import LabelMap, Layout, RasterImage

__all__ = [
    "SlicParams",
    "GbParams",
    "QsParams",
    "LabelMap",
    "slic_segment",
    "slic_energy_trace",
    "gb_segment",
    "qs_segment",
]

_SEGMENTABLE = (Layout.RGB8, Layout.GRAY8, Layout.HUE8)


@dataclass
class SlicParams:
    """SLIC configuration.

    ``segment_count`` is the requested cluster count (the realized count can
    differ slightly because seeds sit on a regular grid).  ``compactness``
    weighs the spatial term against the color term; the joint distance is
    ``sqrt(Dc^2 + (Dp / S)^2 * m^2)`` with ``S = sqrt(pixels / N)``.
    """

    segment_count: int = 1500
    compactness: float = 10.0
    iterations: int = 10
    enforce_min_size: bool = True

    def __post_init__(self):
        if self.segment_count < 1:
            raise ParameterError("segment_count must be >= 1")
        if self.compactness <= 0:
            raise ParameterError("compactness must be > 0")
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")


@dataclass
class GbParams:
    """Graph-based (minimum-spanning-tree) segmenter configuration."""

    scale: float = 300.0
    sigma: float = 0.8
    min_size: int = 50

    def __post_init__(self):
        if self.scale <= 0 or self.sigma < 0 or self.min_size <= 0:
            raise ParameterError("Gb parameters must be strictly positive")


@dataclass
class QsParams:
    """Quick-shift configuration (kernel bandwidth, link reach, color weight)."""

    kernel_size: float = 3.0
    max_dist: float = 8.0
    ratio: float = 1.0

    def __post_init__(self):
        if self.kernel_size <= 0 or self.max_dist <= 0 or self.ratio <= 0:
            raise ParameterError("QS parameters must be strictly positive")


def _channel_stack(img: RasterImage) -> np.ndarray:
    """Image as (h, w, C) float64; C is 3 for RGB and 1 for gray/hue."""
    if img.layout not in _SEGMENTABLE:
        raise LayoutError(f"cannot segment layout {img.layout.value}")
    data = img.data.astype(np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    return data


# ---------------------------------------------------------------------------
# SLIC
# ---------------------------------------------------------------------------

# 3x3 seed-adjustment offsets; (0, 0) first so the grid position wins ties.
_SEED_OFFSETS = [(0, 0), (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def _gradient_image(chans: np.ndarray) -> np.ndarray:
    """Per-pixel gradient: sum over channels of |I(x+1,y)-I(x-1,y)| + |I(x,y+1)-I(x,y-1)|.

    Border neighbors are clamped to the image.
    """
    h, w, _ = chans.shape
    xp = np.minimum(np.arange(w) + 1, w - 1)
    xm = np.maximum(np.arange(w) - 1, 0)
    yp = np.minimum(np.arange(h) + 1, h - 1)
    ym = np.maximum(np.arange(h) - 1, 0)
    gx = np.abs(chans[:, xp, :] - chans[:, xm, :]).sum(axis=2)
    gy = np.abs(chans[yp, :, :] - chans[ym, :, :]).sum(axis=2)
    return gx + gy


def _seed_grid(h: int, w: int, n: int) -> tuple[list[int], list[int]]:
    """Regular seed grid whose cell count approximates the requested n."""
    ny = max(1, round(math.sqrt(n * h / w)))
    nx = max(1, round(n / ny))
    gxs = [int((i + 0.5) * w / nx) for i in range(nx)]
    gys = [int((j + 0.5) * h / ny) for j in range(ny)]
    return gxs, gys


def _slic_core(img: RasterImage, params: SlicParams, with_energy: bool = False):
    """Converged SLIC assignment (before connectivity enforcement).

    Returns:
        (labels, n_centers, energies) where ``labels`` is the raw (h, w)
        assignment to seed ids and ``energies`` (only filled when requested)
        is the total joint distance after each assignment pass.
    """
    chans = _channel_stack(img)
    h, w, nchan = chans.shape
    n = params.segment_count
    if n > h * w:
        raise ParameterError(f"requested {n} segments for {h * w} pixels")

    s = math.sqrt(h * w / n)
    k2 = (params.compactness * params.compactness) / (s * s)
    gxs, gys = _seed_grid(h, w, n)
    nx, ny = len(gxs), len(gys)

    grad = _gradient_image(chans)
    centers_xy = np.empty((nx * ny, 2), dtype=np.float64)
    centers_col = np.empty((nx * ny, nchan), dtype=np.float64)
    k = 0
    for gy in gys:
        for gx in gxs:
            best = None
            bx, by = gx, gy
            for dy, dx in _SEED_OFFSETS:
                x, y = gx + dx, gy + dy
                if 0 <= x < w and 0 <= y < h and (best is None or grad[y, x] < best):
                    best = grad[y, x]
                    bx, by = x, y
            centers_xy[k] = (bx, by)
            centers_col[k] = chans[by, bx]
            k += 1

    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    xgrid, ygrid = np.meshgrid(xs, ys)

    # start from the seed-grid cell of each pixel so uncovered pixels keep a label
    cell_x = np.minimum((np.arange(w) * nx) // w, nx - 1)
    cell_y = np.minimum((np.arange(h) * ny) // h, ny - 1)
    labels = (cell_y[:, None] * nx + cell_x[None, :]).astype(np.int32)

    energies = []
    for _ in range(params.iterations):
        dist2 = np.full((h, w), np.inf)
        new_labels = labels.copy()
        for ci in range(nx * ny):
            cx, cy = centers_xy[ci]
            x0 = max(0, math.ceil(cx - s))
            x1 = min(w - 1, math.floor(cx + s))
            y0 = max(0, math.ceil(cy - s))
            y1 = min(h - 1, math.floor(cy + s))
            if x0 > x1 or y0 > y1:
                continue
            win = chans[y0:y1 + 1, x0:x1 + 1, :]
            dc2 = (win[:, :, 0] - centers_col[ci, 0]) ** 2
            for c in range(1, nchan):
                dc2 = dc2 + (win[:, :, c] - centers_col[ci, c]) ** 2
            dp2 = (xs[None, x0:x1 + 1] - cx) ** 2 + (ys[y0:y1 + 1, None] - cy) ** 2
            d2 = dc2 + dp2 * k2
            sub_d = dist2[y0:y1 + 1, x0:x1 + 1]
            sub_l = new_labels[y0:y1 + 1, x0:x1 + 1]
            better = d2 < sub_d
            sub_d[better] = d2[better]
            sub_l[better] = ci

        changed = bool(np.any(new_labels != labels))
        labels = new_labels

        if with_energy:
            dc2_all = (chans[:, :, 0] - centers_col[labels, 0]) ** 2
            for c in range(1, nchan):
                dc2_all = dc2_all + (chans[:, :, c] - centers_col[labels, c]) ** 2
            dp2_all = (xgrid - centers_xy[labels, 0]) ** 2 + (ygrid - centers_xy[labels, 1]) ** 2
            energies.append(float(np.sqrt(dc2_all + dp2_all * k2).sum()))

        if not changed:
            break

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=nx * ny)
        occupied = counts > 0
        safe = np.where(occupied, counts, 1)
        mean_x = np.bincount(flat, weights=xgrid.ravel(), minlength=nx * ny) / safe
        mean_y = np.bincount(flat, weights=ygrid.ravel(), minlength=nx * ny) / safe
        centers_xy[occupied, 0] = mean_x[occupied]
        centers_xy[occupied, 1] = mean_y[occupied]
        for c in range(nchan):
            mean_c = np.bincount(flat, weights=chans[:, :, c].ravel(), minlength=nx * ny) / safe
            centers_col[occupied, c] = mean_c[occupied]

    return labels, nx * ny, energies


def _grid_components(labels: np.ndarray):
    """4-connected components of equal-label pixels.

    Returns (component id per pixel, component count).
    """
    h, w = labels.shape
    npix = h * w
    idx = np.arange(npix, dtype=np.int64).reshape(h, w)
    right = labels[:, 1:] == labels[:, :-1]
    down = labels[1:, :] == labels[:-1, :]
    rows = np.concatenate([idx[:, :-1][right], idx[:-1, :][down]])
    cols = np.concatenate([idx[:, 1:][right], idx[1:, :][down]])
    graph = sparse.coo_matrix(
        (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(npix, npix)
    )
    ncomp, comp = connected_components(graph, directed=False)
    return comp.reshape(h, w), ncomp


def _compact_labels(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel to a contiguous 0-based range, preserving ascending id order."""
    uniq, inv = np.unique(labels, return_inverse=True)
    return inv.reshape(labels.shape).astype(np.int32), int(uniq.size)


def _enforce_connectivity(labels: np.ndarray, min_size: float) -> np.ndarray:
    """Reassign orphan fragments to the largest adjacent cluster.

    A fragment is any 4-connected component that is not the largest component
    of its label, or whose size falls below ``min_size``.  Fragments are
    absorbed in raster order of their first pixel and only ever join a
    cluster that is already resolved (a keeper, or a fragment attached
    earlier), which keeps every final label 4-connected.  Adjacent-cluster
    sizes grow as fragments attach, ties resolve to the lowest label id.
    """
    comp, ncomp = _grid_components(labels)
    comp_flat = comp.ravel()
    lab_flat = labels.ravel()

    sizes = np.bincount(comp_flat, minlength=ncomp).astype(np.int64)
    uniq, first_occurrence = np.unique(comp_flat, return_index=True)
    first_idx = np.empty(ncomp, dtype=np.int64)
    first_idx[uniq] = first_occurrence
    comp_label = lab_flat[first_idx].astype(np.int64)

    # keeper of a label = its largest component (ties: earliest first pixel)
    order = np.lexsort((first_idx, -sizes, comp_label))
    keeper = np.zeros(ncomp, dtype=bool)
    seen = set()
    for c in order:
        lbl = int(comp_label[c])
        if lbl not in seen:
            keeper[c] = True
            seen.add(lbl)

    resolved = keeper & (sizes >= min_size)
    if np.all(resolved):
        return labels.copy()
    if not np.any(resolved):  # every component undersized: keep the largest
        promote = int(np.lexsort((first_idx, -sizes))[0])
        resolved[promote] = True

    # component adjacency (4-connected, both directions)
    right = comp[:, 1:] != comp[:, :-1]
    down = comp[1:, :] != comp[:-1, :]
    ra, rb = comp[:, :-1][right], comp[:, 1:][right]
    da, db = comp[:-1, :][down], comp[1:, :][down]
    a = np.concatenate([ra, rb, da, db])
    b = np.concatenate([rb, ra, db, da])
    codes = np.unique(a.astype(np.int64) * ncomp + b)
    nbr_src, nbr_dst = np.divmod(codes, ncomp)
    starts = np.searchsorted(nbr_src, np.arange(ncomp))
    ends = np.append(starts[1:], codes.size)

    label_sizes = np.zeros(int(comp_label.max()) + 1, dtype=np.int64)
    np.add.at(label_sizes, comp_label[resolved], sizes[resolved])

    pending = [int(c) for c in np.argsort(first_idx) if not resolved[c]]
    label_of_comp = comp_label.copy()
    while pending:
        deferred = []
        progressed = False
        for c in pending:
            nbrs = nbr_dst[starts[c]:ends[c]]
            cand = np.unique(label_of_comp[nbrs[resolved[nbrs]]])
            if cand.size == 0:
                deferred.append(c)
                continue
            target = int(cand[np.lexsort((cand, -label_sizes[cand]))[0]])
            label_of_comp[c] = target
            resolved[c] = True
            label_sizes[target] += sizes[c]
            progressed = True
        if deferred and not progressed:
            promote = max(deferred, key=lambda c: (sizes[c], -first_idx[c]))
            resolved[promote] = True
            label_sizes[label_of_comp[promote]] += sizes[promote]
            deferred.remove(promote)
        pending = deferred

    return label_of_comp[comp].astype(np.int32)


def slic_segment(img: RasterImage, params: SlicParams) -> LabelMap:
    """Segment an image into superpixels with SLIC.

    Seeds start on a regular grid, shifted to the lowest-gradient position in
    their 3x3 neighborhood, then localized k-means runs in the joint
    (x, y, color) space: each seed claims pixels inside its 2S x 2S window
    under the compactness-weighted distance, and centers move to their member
    means.  With ``enforce_min_size`` the converged assignment gets a
    connectivity post-pass (orphan threshold ``S^2 / 4``).
    """
    labels, _, _ = _slic_core(img, params)
    if params.enforce_min_size:
        s2 = img.data.shape[0] * img.data.shape[1] / params.segment_count
        labels = _enforce_connectivity(labels, s2 / 4.0)
    labels, count = _compact_labels(labels)
    return LabelMap(labels, count)


def slic_energy_trace(img: RasterImage, params: SlicParams) -> list[float]:
    """Total joint distance after each SLIC assignment pass.

    The sequence descends to convergence; once only boundary pixels keep
    flapping, the center update (which minimizes the squared distance) can
    lift the plain sum by a fraction of a percent.
    """
    _, _, energies = _slic_core(img, params, with_energy=True)
    return energies


# ---------------------------------------------------------------------------
# graph-based (minimum-spanning-tree) segmentation
# ---------------------------------------------------------------------------

def gb_segment(img: RasterImage, params: GbParams) -> LabelMap:
    """Felzenszwalb-Huttenlocher segmentation on the 8-connected pixel grid.

    Edge weight is the Euclidean color distance after Gaussian smoothing.
    Components are merged greedily in ascending (weight, u, v) edge order
    under the adaptive threshold ``internal + scale / size``; a final pass
    absorbs components smaller than ``min_size``.
    """
    chans = _channel_stack(img)
    if params.sigma > 0:
        chans = np.stack(
            [gaussian_filter(chans[:, :, c], params.sigma, mode="nearest")
             for c in range(chans.shape[2])],
            axis=2,
        )
    h, w, _ = chans.shape
    npix = h * w
    idx = np.arange(npix, dtype=np.int64).reshape(h, w)

    pairs = []
    for (dy, dx) in ((0, 1), (1, 0), (1, 1), (1, -1)):
        ys0 = slice(max(0, -dy), h - max(0, dy))
        xs0 = slice(max(0, -dx), w - max(0, dx))
        ys1 = slice(max(0, dy), h + min(0, dy))
        xs1 = slice(max(0, dx), w + min(0, dx))
        u = idx[ys0, xs0].ravel()
        v = idx[ys1, xs1].ravel()
        diff = chans[ys0, xs0, :] - chans[ys1, xs1, :]
        wt = np.sqrt((diff * diff).sum(axis=2)).ravel()
        pairs.append((u, v, wt))
    u_all = np.concatenate([p[0] for p in pairs])
    v_all = np.concatenate([p[1] for p in pairs])
    w_all = np.concatenate([p[2] for p in pairs])
    lo = np.minimum(u_all, v_all)
    hi = np.maximum(u_all, v_all)
    order = np.lexsort((hi, lo, w_all))

    us = lo[order].tolist()
    vs = hi[order].tolist()
    ws = w_all[order].tolist()

    parent = list(range(npix))
    size = [1] * npix
    internal = [0.0] * npix
    scale = params.scale

    for u, v, wt in zip(us, vs, ws):
        ru = u
        while parent[ru] != ru:
            parent[ru] = parent[parent[ru]]
            ru = parent[ru]
        rv = v
        while parent[rv] != rv:
            parent[rv] = parent[parent[rv]]
            rv = parent[rv]
        if ru == rv:
            continue
        if wt <= internal[ru] + scale / size[ru] and wt <= internal[rv] + scale / size[rv]:
            if ru > rv:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            internal[ru] = wt

    min_size = params.min_size
    for u, v, _wt in zip(us, vs, ws):
        ru = u
        while parent[ru] != ru:
            parent[ru] = parent[parent[ru]]
            ru = parent[ru]
        rv = v
        while parent[rv] != rv:
            parent[rv] = parent[parent[rv]]
            rv = parent[rv]
        if ru == rv:
            continue
        if size[ru] < min_size or size[rv] < min_size:
            if ru > rv:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]

    roots = np.empty(npix, dtype=np.int64)
    for i in range(npix):
        r = i
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        roots[i] = r
    labels, count = _compact_labels(roots.reshape(h, w))
    return LabelMap(labels, count)


# ---------------------------------------------------------------------------
# quick shift
# ---------------------------------------------------------------------------

def qs_segment(img: RasterImage, params: QsParams) -> LabelMap:
    """Quick-shift mode seeking in the joint (x, y, ratio * color) space.

    The kernel density at each pixel is a Gaussian sum over the square window
    of radius ``ceil(3 * kernel_size)``.  Each pixel then links to the
    joint-space-nearest pixel of higher density; links longer than
    ``max_dist`` in the joint space are cut, which makes those pixels density
    modes (tree roots).  Density plateaus resolve toward the lowest pixel
    index, so trees are acyclic and constant images collapse to one label.
    """
    chans = _channel_stack(img) * params.ratio
    h, w, nchan = chans.shape
    npix = h * w

    sigma2 = 2.0 * params.kernel_size * params.kernel_size
    rd = int(math.ceil(3.0 * params.kernel_size))
    density = np.zeros((h, w), dtype=np.float64)
    for dy in range(-rd, rd + 1):
        for dx in range(-rd, rd + 1):
            if (dy == 0 and dx == 0) or abs(dy) >= h or abs(dx) >= w:
                continue
            ys0 = slice(max(0, -dy), h - max(0, dy))
            xs0 = slice(max(0, -dx), w - max(0, dx))
            ys1 = slice(max(0, dy), h + min(0, dy))
            xs1 = slice(max(0, dx), w + min(0, dx))
            diff = chans[ys0, xs0, :] - chans[ys1, xs1, :]
            d2 = (diff * diff).sum(axis=2) + float(dx * dx + dy * dy)
            density[ys0, xs0] += np.exp(-d2 / sigma2)

    pix_idx = np.arange(npix, dtype=np.int64).reshape(h, w)
    parent = pix_idx.copy()
    best_d2 = np.full((h, w), np.inf)
    rp = int(math.ceil(params.max_dist))
    max_d2 = params.max_dist * params.max_dist
    for dy in range(-rp, rp + 1):
        for dx in range(-rp, rp + 1):
            if (dy == 0 and dx == 0) or dx * dx + dy * dy > max_d2:
                continue
            if abs(dy) >= h or abs(dx) >= w:
                continue
            ys0 = slice(max(0, -dy), h - max(0, dy))
            xs0 = slice(max(0, -dx), w - max(0, dx))
            ys1 = slice(max(0, dy), h + min(0, dy))
            xs1 = slice(max(0, dx), w + min(0, dx))
            diff = chans[ys0, xs0, :] - chans[ys1, xs1, :]
            d2 = (diff * diff).sum(axis=2) + float(dx * dx + dy * dy)
            p_idx = pix_idx[ys0, xs0]
            q_idx = pix_idx[ys1, xs1]
            p_den = density[ys0, xs0]
            q_den = density[ys1, xs1]
            uphill = (q_den > p_den) | ((q_den == p_den) & (q_idx < p_idx))
            sub_best = best_d2[ys0, xs0]
            sub_parent = parent[ys0, xs0]
            better = uphill & ((d2 < sub_best) | ((d2 == sub_best) & (q_idx < sub_parent)))
            sub_best[better] = d2[better]
            sub_parent[better] = q_idx[better]

    too_far = best_d2 > max_d2  # joint-space cut: long links become roots
    parent[too_far] = pix_idx[too_far]

    par = parent.ravel()
    while True:
        hop = par[par]
        if np.array_equal(hop, par):
            break
        par = hop
    labels, count = _compact_labels(par.reshape(h, w))
    return LabelMap(labels, count)
