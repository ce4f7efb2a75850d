"""Naive reference implementations the fast code is checked against.

Everything here is written as straight per-pixel / per-pair loops with no
shared code with the package internals.  Where a check requires bit-identical
floats (SLIC assignments, QS densities), the oracle evaluates the same
mathematical expressions in the same order, but through scalar loops instead
of vectorized scans.
"""

import math

import numpy as np

SEED_OFFSETS = [(0, 0), (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


# ---------------------------------------------------------------------------
# imgio
# ---------------------------------------------------------------------------

def debayer_oracle(raw: np.ndarray) -> np.ndarray:
    """Per-pixel bilinear RGGB demosaic: each missing sample is the average of
    the in-bounds 8-neighbors carrying that color."""
    h, w = raw.shape
    out = np.zeros((h, w, 3), dtype=np.uint8)

    def color_of(y, x):
        if y % 2 == 0 and x % 2 == 0:
            return 0
        if (y + x) % 2 == 1:
            return 1
        return 2

    for y in range(h):
        for x in range(w):
            for c in range(3):
                if color_of(y, x) == c:
                    out[y, x, c] = raw[y, x]
                    continue
                vals = []
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if dy == 0 and dx == 0:
                            continue
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and color_of(ny, nx) == c:
                            vals.append(float(raw[ny, nx]))
                mean = sum(vals) / len(vals)
                out[y, x, c] = int(math.floor(mean + 0.5))
    return out


# ---------------------------------------------------------------------------
# SLIC: windowed 5-D k-means, scalar loops
# ---------------------------------------------------------------------------

def slic_oracle(chans: np.ndarray, n: int, compactness: float, iterations: int) -> np.ndarray:
    """Exhaustive windowed k-means in (x, y, color) space.

    Applies the same definitions as the production segmenter (grid seeds
    adjusted to the 3x3 gradient minimum, 2S x 2S windows, lowest-id ties,
    member-mean center updates) through per-pixel scalar loops, and returns
    the converged assignment compacted to a contiguous id range.
    """
    h, w, nchan = chans.shape
    s = math.sqrt(h * w / n)
    k2 = (compactness * compactness) / (s * s)
    ny = max(1, round(math.sqrt(n * h / w)))
    nx = max(1, round(n / ny))
    gxs = [int((i + 0.5) * w / nx) for i in range(nx)]
    gys = [int((j + 0.5) * h / ny) for j in range(ny)]

    def grad_at(y, x):
        xm, xp = max(x - 1, 0), min(x + 1, w - 1)
        ym, yp = max(y - 1, 0), min(y + 1, h - 1)
        g = 0.0
        for c in range(nchan):
            g += abs(chans[y, xp, c] - chans[y, xm, c])
        for c in range(nchan):
            g += abs(chans[yp, x, c] - chans[ym, x, c])
        return g

    centers = []
    for gy in gys:
        for gx in gxs:
            best, bx, by = None, gx, gy
            for dy, dx in SEED_OFFSETS:
                x, y = gx + dx, gy + dy
                if 0 <= x < w and 0 <= y < h:
                    g = grad_at(y, x)
                    if best is None or g < best:
                        best, bx, by = g, x, y
            centers.append([float(bx), float(by)] + [chans[by, bx, c] for c in range(nchan)])

    labels = np.empty((h, w), dtype=np.int64)
    for y in range(h):
        cy = min((y * ny) // h, ny - 1)
        for x in range(w):
            cx = min((x * nx) // w, nx - 1)
            labels[y, x] = cy * nx + cx

    nk = nx * ny
    for _ in range(iterations):
        bounds = []
        for k in range(nk):
            cx, cy = centers[k][0], centers[k][1]
            bounds.append((max(0, math.ceil(cx - s)), min(w - 1, math.floor(cx + s)),
                           max(0, math.ceil(cy - s)), min(h - 1, math.floor(cy + s))))
        new_labels = labels.copy()
        for y in range(h):
            for x in range(w):
                best_d2 = None
                best_k = -1
                for k in range(nk):
                    x0, x1, y0, y1 = bounds[k]
                    if not (x0 <= x <= x1 and y0 <= y <= y1):
                        continue
                    dc2 = 0.0
                    for c in range(nchan):
                        d = chans[y, x, c] - centers[k][2 + c]
                        dc2 = dc2 + d * d
                    dx = x - centers[k][0]
                    dy = y - centers[k][1]
                    dp2 = dx * dx + dy * dy
                    d2 = dc2 + dp2 * k2
                    if best_d2 is None or d2 < best_d2:
                        best_d2 = d2
                        best_k = k
                if best_k >= 0:
                    new_labels[y, x] = best_k
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels

        sums = [[0.0] * (2 + nchan) for _ in range(nk)]
        counts = [0] * nk
        for y in range(h):
            for x in range(w):
                k = labels[y, x]
                counts[k] += 1
                sums[k][0] += x
                sums[k][1] += y
                for c in range(nchan):
                    sums[k][2 + c] += chans[y, x, c]
        for k in range(nk):
            if counts[k]:
                centers[k] = [v / counts[k] for v in sums[k]]

    uniq = sorted(set(labels.ravel().tolist()))
    remap = {v: i for i, v in enumerate(uniq)}
    return np.vectorize(remap.get)(labels).astype(np.int32)


# ---------------------------------------------------------------------------
# graph-based segmentation: dict union-find over the canonical edge order
# ---------------------------------------------------------------------------

def gb_oracle(chans: np.ndarray, scale: float, min_size: int) -> np.ndarray:
    """Brute-force minimum-spanning-tree segmentation (no smoothing)."""
    h, w, nchan = chans.shape

    edges = []
    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
                qy, qx = y + dy, x + dx
                if not (0 <= qy < h and 0 <= qx < w):
                    continue
                d2 = 0.0
                for c in range(nchan):
                    d = chans[y, x, c] - chans[qy, qx, c]
                    d2 = d2 + d * d
                u, v = y * w + x, qy * w + qx
                edges.append((math.sqrt(d2), min(u, v), max(u, v)))
    edges.sort()

    parent = {i: i for i in range(h * w)}
    size = {i: 1 for i in range(h * w)}
    internal = {i: 0.0 for i in range(h * w)}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for wt, u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        if wt <= internal[ru] + scale / size[ru] and wt <= internal[rv] + scale / size[rv]:
            if ru > rv:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            internal[ru] = wt
    for wt, u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv and (size[ru] < min_size or size[rv] < min_size):
            if ru > rv:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]

    roots = np.array([find(i) for i in range(h * w)])
    uniq = sorted(set(roots.tolist()))
    remap = {v: i for i, v in enumerate(uniq)}
    return np.array([remap[r] for r in roots], dtype=np.int32).reshape(h, w)


# ---------------------------------------------------------------------------
# quick shift: naive density + parent search
# ---------------------------------------------------------------------------

def qs_oracle(chans: np.ndarray, kernel_size: float, max_dist: float, ratio: float) -> np.ndarray:
    """Per-pixel density and uphill-parent computation with scalar loops."""
    feats = chans * ratio
    h, w, nchan = feats.shape
    sigma2 = 2.0 * kernel_size * kernel_size
    rd = int(math.ceil(3.0 * kernel_size))

    def joint_d2(y, x, qy, qx, dy, dx):
        d2 = 0.0
        for c in range(nchan):
            d = feats[y, x, c] - feats[qy, qx, c]
            d2 = d2 + d * d
        return d2 + float(dx * dx + dy * dy)

    density = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            terms = []
            for dy in range(-rd, rd + 1):
                for dx in range(-rd, rd + 1):
                    if (dy == 0 and dx == 0) or abs(dy) >= h or abs(dx) >= w:
                        continue
                    qy, qx = y + dy, x + dx
                    if 0 <= qy < h and 0 <= qx < w:
                        terms.append(joint_d2(y, x, qy, qx, dy, dx))
            den = 0.0
            for t in np.exp(-np.array(terms) / sigma2) if terms else []:
                den += t
            density[y, x] = den

    rp = int(math.ceil(max_dist))
    max_d2 = max_dist * max_dist
    parent = np.arange(h * w, dtype=np.int64).reshape(h, w)
    for y in range(h):
        for x in range(w):
            best = None
            for dy in range(-rp, rp + 1):
                for dx in range(-rp, rp + 1):
                    if (dy == 0 and dx == 0) or dx * dx + dy * dy > max_d2:
                        continue
                    if abs(dy) >= h or abs(dx) >= w:
                        continue
                    qy, qx = y + dy, x + dx
                    if not (0 <= qy < h and 0 <= qx < w):
                        continue
                    p_idx, q_idx = y * w + x, qy * w + qx
                    uphill = (density[qy, qx] > density[y, x]
                              or (density[qy, qx] == density[y, x] and q_idx < p_idx))
                    if not uphill:
                        continue
                    d2 = joint_d2(y, x, qy, qx, dy, dx)
                    if best is None or (d2, q_idx) < best:
                        best = (d2, q_idx)
            if best is not None and best[0] <= max_d2:
                parent[y, x] = best[1]

    flat = parent.ravel()
    roots = np.empty(h * w, dtype=np.int64)
    for i in range(h * w):
        r = i
        while flat[r] != r:
            r = flat[r]
        roots[i] = r
    uniq = sorted(set(roots.tolist()))
    remap = {v: i for i, v in enumerate(uniq)}
    return np.array([remap[r] for r in roots], dtype=np.int32).reshape(h, w)


# ---------------------------------------------------------------------------
# merge statistics and adjacency
# ---------------------------------------------------------------------------

def stats_oracle(labels: np.ndarray, intensity: np.ndarray):
    """Centroids, mean intensities and sizes via explicit accumulation."""
    n = int(labels.max()) + 1
    sx = [0.0] * n
    sy = [0.0] * n
    si = [0.0] * n
    cnt = [0] * n
    h, w = labels.shape
    for y in range(h):
        for x in range(w):
            k = labels[y, x]
            cnt[k] += 1
            sx[k] += x
            sy[k] += y
            si[k] += float(intensity[y, x])
    centroids = np.array([[sx[k] / cnt[k], sy[k] / cnt[k]] for k in range(n)])
    means = np.array([si[k] / cnt[k] for k in range(n)])
    return centroids, means, np.array(cnt)


def adjacency_oracle(labels: np.ndarray):
    """All-pixel-pairs adjacency: i ~ j iff some pixels 4-touch."""
    n = int(labels.max()) + 1
    neigh = [set() for _ in range(n)]
    h, w = labels.shape
    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (1, 0)):
                qy, qx = y + dy, x + dx
                if qy < h and qx < w and labels[y, x] != labels[qy, qx]:
                    a, b = int(labels[y, x]), int(labels[qy, qx])
                    neigh[a].add(b)
                    neigh[b].add(a)
    return [sorted(s) for s in neigh]


# ---------------------------------------------------------------------------
# GLCM / Haralick
# ---------------------------------------------------------------------------

def glcm_oracle(crop: np.ndarray, mask: np.ndarray, angle: int, levels: int):
    """Pair enumeration over the mask; symmetrized, normalized counts."""
    offsets = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}
    dr, dc = offsets[angle]
    h, w = crop.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    for r in range(h):
        for c in range(w):
            r2, c2 = r + dr, c + dc
            if 0 <= r2 < h and 0 <= c2 < w and mask[r, c] and mask[r2, c2]:
                i = (int(crop[r, c]) * levels) // 256
                j = (int(crop[r2, c2]) * levels) // 256
                counts[i, j] += 1
                counts[j, i] += 1
    total = counts.sum()
    if total == 0:
        return np.zeros((levels, levels)), True
    return counts / total, False


def haralick_oracle(probs: np.ndarray):
    """Definitional double sums of the six statistics."""
    levels = probs.shape[0]
    contrast = dissim = homog = asm = 0.0
    for i in range(levels):
        for j in range(levels):
            p = probs[i, j]
            contrast += p * (i - j) ** 2
            dissim += p * abs(i - j)
            homog += p / (1.0 + (i - j) ** 2)
            asm += p * p
    energy = math.sqrt(asm)
    mu_i = sum(i * probs[i, j] for i in range(levels) for j in range(levels))
    mu_j = sum(j * probs[i, j] for i in range(levels) for j in range(levels))
    var_i = sum((i - mu_i) ** 2 * probs[i, j] for i in range(levels) for j in range(levels))
    var_j = sum((j - mu_j) ** 2 * probs[i, j] for i in range(levels) for j in range(levels))
    if var_i <= 0 or var_j <= 0:
        corr = 0.0
    else:
        corr = sum((i - mu_i) * (j - mu_j) * probs[i, j]
                   for i in range(levels) for j in range(levels)) / math.sqrt(var_i * var_j)
    return np.array([contrast, dissim, homog, asm, energy, corr])


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def confusion_oracle(pred: np.ndarray, gt: np.ndarray):
    """Per-pixel fourfold count loop."""
    tp = fp = tn = fn = 0
    for p, g in zip(pred.ravel(), gt.ravel()):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn
