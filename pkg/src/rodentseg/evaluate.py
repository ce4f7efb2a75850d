"""Pixel-level evaluation against ground truth, config sweeps and benchmarks."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .imgio import LabelMap, Layout, RasterImage, to_gray, to_hue_sat
from .merge import merge_labelmap
from .superpixel import GbParams, QsParams, SlicParams, gb_segment, qs_segment, slic_segment

__all__ = [
    "CLASS_NAMES",
    "ConfusionCounts",
    "MetricValues",
    "MetricRecord",
    "TimingRecord",
    "confusion",
    "metrics",
    "assign_classes",
    "class_mask",
    "roc_sweep",
    "bench",
]

log = logging.getLogger(__name__)

# ground-truth class ids: 0 background, then the three reported classes
CLASS_NAMES = {1: "paw", 2: "body", 3: "tail"}


@dataclass
class ConfusionCounts:
    """Pixel-level fourfold counts of a binary prediction."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class MetricValues:
    """The four ratio metrics; 0/0 ratios collapse to 0 and set the flag."""

    sensitivity: float
    specificity: float
    precision: float
    accuracy: float
    degenerate: bool = False


@dataclass
class MetricRecord:
    """One sweep operating point, averaged over frames."""

    class_name: str
    channels: str
    segments: int
    sensitivity: float
    specificity: float
    precision: float
    accuracy: float


@dataclass
class TimingRecord:
    """Steady-state per-frame runtime of one segmenter."""

    method: str
    mean_seconds: float
    width: int
    height: int
    params: str


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Fourfold pixel counts of a binary prediction against a binary truth."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionError("prediction and ground truth dimensions differ")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = pred.size - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int):
    if den == 0:
        return 0.0, True
    return num / den, False


def metrics(c: ConfusionCounts) -> MetricValues:
    """Sensitivity, specificity, precision and accuracy of fourfold counts."""
    if c.total == 0:
        raise ParameterError("confusion counts are all zero")
    sens, d1 = _ratio(c.tp, c.tp + c.fn)
    spec, d2 = _ratio(c.tn, c.tn + c.fp)
    prec, d3 = _ratio(c.tp, c.tp + c.fp)
    acc = (c.tp + c.tn) / c.total
    return MetricValues(sens, spec, prec, acc, degenerate=d1 or d2 or d3)


def assign_classes(region_mask: LabelMap, gt: LabelMap) -> np.ndarray:
    """Ground-truth class of each merged region by pixel majority.

    Returns an array indexed by region id (entry 0 unused and 0); a tie for
    the majority resolves to background (class 0).
    """
    if region_mask.labels.shape != gt.labels.shape:
        raise DimensionError("region mask and ground truth dimensions differ")
    n_regions = region_mask.cluster_count
    n_classes = gt.cluster_count
    codes = region_mask.labels.astype(np.int64).ravel() * n_classes + gt.labels.ravel()
    counts = np.bincount(codes, minlength=n_regions * n_classes).reshape(n_regions, n_classes)

    out = np.zeros(n_regions, dtype=np.int64)
    for rid in range(1, n_regions):
        row = counts[rid]
        best = int(row.max(initial=0))
        if best == 0:
            continue
        winners = np.nonzero(row == best)[0]
        out[rid] = int(winners[0]) if winners.size == 1 else 0
    return out


def class_mask(region_mask: LabelMap, region_classes: np.ndarray) -> np.ndarray:
    """Per-pixel class id map from a region mask and its class assignment."""
    return np.asarray(region_classes, dtype=np.int64)[region_mask.labels]


def _sweep_channel(frame: RasterImage, mode: str) -> RasterImage:
    if mode == "rgb":
        return frame
    if mode == "hue":
        return to_hue_sat(frame)[0]
    if mode == "gray":
        return to_gray(frame)
    raise ParameterError(f"unknown channel mode {mode!r}")


def roc_sweep(frames_gt, channel_modes, segment_counts, *, compactness: float = 10.0,
              iterations: int = 10, classes=(1, 2, 3)):
    """Metric operating points over channel modes x segment counts.

    Each frame is SLIC-segmented on the requested channel, merged on the same
    channel, regions get their majority ground-truth class, and one-vs-rest
    pixel metrics per class are averaged over frames.

    Args:
        frames_gt: iterable of (RGB8 frame, ground-truth LabelMap or None);
            frames without ground truth are skipped with a warning.

    Returns:
        list of MetricRecord, ordered by (channel mode, segment count, class).
    """
    usable = []
    for i, (frame, gt) in enumerate(frames_gt):
        if gt is None:
            log.warning("skipping frame %d: no ground truth", i)
            continue
        usable.append((frame, gt))
    if not usable:
        raise ParameterError("no frame with ground truth")

    records = []
    for mode in channel_modes:
        for count in segment_counts:
            sums = {c: np.zeros(4) for c in classes}
            for frame, gt in usable:
                seg_img = _sweep_channel(frame, mode)
                labels = slic_segment(seg_img, SlicParams(count, compactness, iterations))
                _, region_mask = merge_labelmap(labels, seg_img)
                assigned = assign_classes(region_mask, gt)
                pixel_classes = class_mask(region_mask, assigned)
                for c in classes:
                    m = metrics(confusion(pixel_classes == c, gt.labels == c))
                    sums[c] += (m.sensitivity, m.specificity, m.precision, m.accuracy)
            for c in classes:
                mean = sums[c] / len(usable)
                records.append(MetricRecord(
                    class_name=CLASS_NAMES.get(c, str(c)), channels=mode, segments=count,
                    sensitivity=float(mean[0]), specificity=float(mean[1]),
                    precision=float(mean[2]), accuracy=float(mean[3]),
                ))
    return records


def bench(frame: RasterImage, methods=("slic", "gb", "qs"), repetitions: int = 3,
          slic_params: SlicParams = None, gb_params: GbParams = None,
          qs_params: QsParams = None):
    """Wall-clock mean per segmenter on one frame, after a warm-up run.

    Only the segmentation call is timed (no file I/O or decode); methods run
    serially so they do not contend.

    Args:
        repetitions: timed runs per method after the discarded warm-up; >= 3.
    """
    if repetitions < 3:
        raise ParameterError("bench needs at least 3 repetitions")
    slic_params = slic_params or SlicParams()
    gb_params = gb_params or GbParams()
    qs_params = qs_params or QsParams()
    runners = {
        "slic": (lambda: slic_segment(frame, slic_params), str(slic_params)),
        "gb": (lambda: gb_segment(frame, gb_params), str(gb_params)),
        "qs": (lambda: qs_segment(frame, qs_params), str(qs_params)),
    }
    records = []
    for method in methods:
        if method not in runners:
            raise ParameterError(f"unknown method {method!r}")
        run, desc = runners[method]
        run()  # warm-up, discarded
        elapsed = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            run()
            elapsed.append(time.perf_counter() - t0)
        records.append(TimingRecord(
            method=method, mean_seconds=sum(elapsed) / len(elapsed),
            width=frame.width, height=frame.height, params=desc,
        ))
        log.info("bench %s: %.3f s/frame over %d reps", method, records[-1].mean_seconds, repetitions)
    return records
