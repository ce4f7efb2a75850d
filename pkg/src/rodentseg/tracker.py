"""Seeded frame-to-frame tracking of one merged region inside an 80x80 ROI.

Candidates are the merged regions found in the ROI (regions covering most of
the window are treated as background and dropped).  Each candidate collects
weight bonuses for proximity, motion consistency and color similarity to the
tracked state; the heaviest candidate becomes the new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import SeedError, TrackingLost
from .imgio import LabelMap, RasterImage

__all__ = [
    "ROI_SIZE",
    "TrackState",
    "CandidateObject",
    "candidates_from_regions",
    "init_track",
    "crop_roi",
    "score_candidates",
    "step_track",
]

ROI_SIZE = 80            # window side; sized for <= 30 px/frame displacement
SEED_REACH = 40.0        # max distance from a seed click to a region centroid
BACKGROUND_FRACTION = 0.5  # regions covering more of the window are background


@dataclass
class TrackState:
    """Tracked landmark state after one frame.

    ``size`` and ``weight`` are diagnostics; selection never reads them back.
    """

    frame: int
    position: tuple        # (x, y) region centroid
    velocity: tuple        # (vx, vy) pixels/frame
    hue: float
    sat: float
    gray: float
    size: int
    weight: int = 0


@dataclass
class CandidateObject:
    """One merged region inside the ROI, with its tracker weight."""

    region_id: int
    centroid: tuple        # global coordinates
    hue: float
    sat: float
    gray: float
    size: int
    weight: int = 0


def candidates_from_regions(region_mask: LabelMap, hue: np.ndarray, sat: np.ndarray,
                            gray: np.ndarray, offset=(0, 0),
                            background_fraction: float = BACKGROUND_FRACTION):
    """Candidate objects from a merged-region mask.

    Regions covering more than ``background_fraction`` of the mask are taken
    to be background (belt / wall) and excluded.  Centroids are shifted by
    ``offset`` into frame coordinates.
    """
    lab = region_mask.labels
    total = lab.size
    ox, oy = offset
    h, w = lab.shape
    xgrid, ygrid = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))

    out = []
    flat = lab.ravel()
    counts = np.bincount(flat, minlength=region_mask.cluster_count)
    for rid in range(1, region_mask.cluster_count):
        npx = int(counts[rid])
        if npx == 0 or npx > background_fraction * total:
            continue
        sel = lab == rid
        out.append(CandidateObject(
            region_id=rid,
            centroid=(float(xgrid[sel].mean()) + ox, float(ygrid[sel].mean()) + oy),
            hue=float(np.asarray(hue, dtype=np.float64)[sel].mean()),
            sat=float(np.asarray(sat, dtype=np.float64)[sel].mean()),
            gray=float(np.asarray(gray, dtype=np.float64)[sel].mean()),
            size=npx,
        ))
    return out


def init_track(seed, candidates, region_mask: LabelMap = None, offset=(0, 0)) -> TrackState:
    """Initial state from a user click on the first frame.

    Picks the candidate region containing the seed pixel, falling back to the
    nearest candidate centroid within 40 px when the click lands on
    background.  Velocity starts at zero.
    """
    if not candidates:
        raise SeedError("no candidate regions on the first frame")
    sx, sy = float(seed[0]), float(seed[1])

    chosen = None
    if region_mask is not None:
        ix, iy = int(round(sx)) - offset[0], int(round(sy)) - offset[1]
        if 0 <= iy < region_mask.height and 0 <= ix < region_mask.width:
            rid = int(region_mask.labels[iy, ix])
            for cand in candidates:
                if cand.region_id == rid:
                    chosen = cand
                    break
    if chosen is None:
        best = min(candidates,
                   key=lambda c: (math.hypot(c.centroid[0] - sx, c.centroid[1] - sy), c.region_id))
        if math.hypot(best.centroid[0] - sx, best.centroid[1] - sy) > SEED_REACH:
            raise SeedError(f"no region within {SEED_REACH:.0f} px of seed ({sx:.0f}, {sy:.0f})")
        chosen = best

    return TrackState(frame=0, position=chosen.centroid, velocity=(0.0, 0.0),
                      hue=chosen.hue, sat=chosen.sat, gray=chosen.gray, size=chosen.size)


def crop_roi(frame: RasterImage, state: TrackState):
    """80x80 window centered on the previous position, clipped at the borders.

    Returns:
        (sub-image RasterImage, (x offset, y offset))
    """
    half = ROI_SIZE // 2
    cx = int(round(state.position[0]))
    cy = int(round(state.position[1]))
    x0 = max(0, cx - half)
    x1 = min(frame.width, cx + half)
    y0 = max(0, cy - half)
    y1 = min(frame.height, cy + half)
    return RasterImage(frame.layout, frame.data[y0:y1, x0:x1]), (x0, y0)


def _award(candidates, key):
    """Index of the minimal candidate under ``key`` (ties: lowest region id)."""
    best = min(range(len(candidates)),
               key=lambda i: (key(candidates[i]), candidates[i].region_id))
    return best


def score_candidates(state: TrackState, candidates):
    """Weigh candidates against the tracked state.

    Bonuses: +3 nearest centroid, +2 every candidate whose displacement has a
    positive dot product with the previous velocity (withheld entirely at
    zero velocity), +2 / +1 / +1 closest hue / saturation / gray mean.  Each
    minimum bonus goes to exactly one candidate.
    """
    if not candidates:
        raise TrackingLost("no candidate regions inside the ROI")
    px, py = state.position
    scored = [replace(c, weight=0) for c in candidates]

    nearest = _award(scored, lambda c: math.hypot(c.centroid[0] - px, c.centroid[1] - py))
    scored[nearest].weight += 3

    vx, vy = state.velocity
    if vx != 0.0 or vy != 0.0:
        for c in scored:
            if (c.centroid[0] - px) * vx + (c.centroid[1] - py) * vy > 0:
                c.weight += 2

    scored[_award(scored, lambda c: abs(c.hue - state.hue))].weight += 2
    scored[_award(scored, lambda c: abs(c.sat - state.sat))].weight += 1
    scored[_award(scored, lambda c: abs(c.gray - state.gray))].weight += 1
    return scored


def step_track(state: TrackState, candidates) -> TrackState:
    """Advance the track by one frame.

    Selects the maximum-weight candidate (ties: nearest centroid, then lowest
    region id) and updates position, velocity, color statistics and size.

    Raises:
        TrackingLost: when no candidate remains; the caller may re-seed.
    """
    scored = score_candidates(state, candidates)
    px, py = state.position
    winner = min(
        scored,
        key=lambda c: (-c.weight, math.hypot(c.centroid[0] - px, c.centroid[1] - py), c.region_id),
    )
    return TrackState(
        frame=state.frame + 1,
        position=winner.centroid,
        velocity=(winner.centroid[0] - px, winner.centroid[1] - py),
        hue=winner.hue,
        sat=winner.sat,
        gray=winner.gray,
        size=winner.size,
        weight=winner.weight,
    )


def track_sequence(frames, seed, *, segments=1500, channels="hue",
                   compactness=10.0, iterations=10):
    """Track a seeded landmark across a frame sequence.

    The first frame is segmented and merged whole to resolve the seed click;
    every later frame only processes the 80x80 ROI around the previous
    position, with the superpixel count scaled to the window area so the
    superpixel size matches the full-frame setting.

    Args:
        frames: iterable of RGB8 RasterImages.
        seed: (x, y) click on the first frame.
        segments: full-frame SLIC segment count.
        channels: segmentation channel mode, one of rgb / hue / gray.

    Returns:
        One dict per frame with keys frame, x, y, region_size, hue, sat,
        gray, weight and lost.  After a loss the state freezes until a
        candidate reappears inside the ROI.
    """
    from .imgio import to_gray, to_hue_sat
    from .merge import merge_labelmap
    from .superpixel import SlicParams, slic_segment

    def channel_images(rgb):
        hue_img, sat_img = to_hue_sat(rgb)
        gray_img = to_gray(rgb)
        seg_img = {"rgb": rgb, "hue": hue_img, "gray": gray_img}[channels]
        merge_img = {"rgb": rgb, "hue": hue_img, "gray": gray_img}[channels]
        return seg_img, merge_img, hue_img.data, sat_img.data, gray_img.data

    def segment_and_extract(rgb, n, offset):
        seg_img, merge_img, hue, sat, gray = channel_images(rgb)
        n = min(n, rgb.width * rgb.height)
        labels = slic_segment(seg_img, SlicParams(n, compactness, iterations))
        _, region_mask = merge_labelmap(labels, merge_img)
        cands = candidates_from_regions(region_mask, hue, sat, gray, offset)
        return cands, region_mask

    frames = list(frames)
    if not frames:
        raise SeedError("empty frame sequence")
    frame_area = frames[0].width * frames[0].height

    def row(state, lost):
        return {
            "frame": state.frame, "x": state.position[0], "y": state.position[1],
            "region_size": state.size, "hue": state.hue, "sat": state.sat,
            "gray": state.gray, "weight": state.weight, "lost": lost,
        }

    cands, region_mask = segment_and_extract(frames[0], segments, (0, 0))
    state = init_track(seed, cands, region_mask)
    rows = [row(state, False)]

    for i, frame in enumerate(frames[1:], start=1):
        roi, offset = crop_roi(frame, state)
        roi_segments = max(4, round(segments * roi.width * roi.height / frame_area))
        cands, _ = segment_and_extract(roi, roi_segments, offset)
        try:
            state = step_track(state, cands)
            rows.append(row(state, False))
        except TrackingLost:
            state = replace(state, frame=i)
            rows.append(row(state, True))
    return rows
