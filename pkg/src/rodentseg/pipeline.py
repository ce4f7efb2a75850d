"""End-to-end orchestration: segment, merge, features / embedding, track, eval.

A single JSON config drives every stage; outputs land under one directory and
are byte-reproducible for identical (config, inputs, seed).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestError, ParameterError
from .evaluate import CLASS_NAMES, assign_classes, class_mask, confusion, metrics
from .features import FEATURE_NAMES, region_feature_table
from .imgio import (LabelMap, Layout, RasterImage, debayer, load_frame, load_mask,
                    save_image, save_labelmap, save_overlay, to_gray, to_hue_sat)
from .merge import compute_stats, merge_labelmap
from .superpixel import GbParams, QsParams, SlicParams, gb_segment, qs_segment, slic_segment
from .tracker import track_sequence
from .tsne import tsne

log = logging.getLogger(__name__)

CHANNEL_MODES = ("rgb", "hue", "gray")


@dataclass
class PipelineConfig:
    """Declarative pipeline run description (flags override JSON fields)."""

    input: str
    out_dir: str
    channels: str = "rgb"
    segmenter: dict = field(default_factory=lambda: {"method": "slic"})
    merge_channel: str = None      # defaults to the segmentation channel mode
    features: bool = False
    embed: dict = None             # {"perplexity": .., "iterations": ..}
    track: dict = None             # {"seed_xy": [x, y]}
    gt: str = None
    rng_seed: int = 0

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise IngestError(f"no such config: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParameterError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ParameterError(f"unknown config fields: {sorted(unknown)}")
        if "input" not in raw or "out_dir" not in raw:
            raise ParameterError("config needs at least 'input' and 'out_dir'")
        return cls(**raw)

    def validate(self):
        if self.channels not in CHANNEL_MODES:
            raise ParameterError(f"channels must be one of {CHANNEL_MODES}")
        if self.merge_channel is not None and self.merge_channel not in ("hue", "gray", "rgbmean"):
            raise ParameterError("merge_channel must be hue, gray or rgbmean")
        method = self.segmenter.get("method", "slic")
        if method not in ("slic", "gb", "qs"):
            raise ParameterError(f"unknown segmenter method {method!r}")
        if self.track is not None and "seed_xy" not in self.track:
            raise ParameterError("track config needs seed_xy")
        if not isinstance(self.rng_seed, int):
            raise ParameterError("rng_seed must be an integer")


def build_segmenter(spec: dict):
    """(callable image -> LabelMap, description) from a segmenter config dict."""
    spec = dict(spec)
    method = spec.pop("method", "slic")
    if method == "slic":
        params = SlicParams(
            segment_count=int(spec.pop("segments", 1500)),
            compactness=float(spec.pop("compactness", 10.0)),
            iterations=int(spec.pop("iterations", 10)),
            enforce_min_size=bool(spec.pop("enforce_min_size", True)),
        )
        runner = lambda img: slic_segment(img, params)
    elif method == "gb":
        params = GbParams(
            scale=float(spec.pop("scale", 300.0)),
            sigma=float(spec.pop("sigma", 0.8)),
            min_size=int(spec.pop("min_size", 50)),
        )
        runner = lambda img: gb_segment(img, params)
    elif method == "qs":
        params = QsParams(
            kernel_size=float(spec.pop("kernel_size", 3.0)),
            max_dist=float(spec.pop("max_dist", 8.0)),
            ratio=float(spec.pop("ratio", 1.0)),
        )
        runner = lambda img: qs_segment(img, params)
    else:
        raise ParameterError(f"unknown segmenter method {method!r}")
    if spec:
        raise ParameterError(f"unknown segmenter options: {sorted(spec)}")
    return runner, params


def list_frames(input_path) -> list:
    """Frame files for a run: one file, or the sorted PNG/raw files of a directory."""
    p = Path(input_path)
    if not p.exists():
        raise IngestError(f"no such input: {p}")
    if p.is_file():
        return [p]
    files = sorted(q for q in p.iterdir() if q.suffix.lower() in (".png", ".raw"))
    if not files:
        raise IngestError(f"no frames in {p}")
    return files


def load_rgb(path) -> RasterImage:
    """Load a frame and bring it to RGB8 (debayering raw input)."""
    img = load_frame(path)
    if img.layout is Layout.BAYER_RGGB8:
        img = debayer(img)
    if img.layout is not Layout.RGB8:
        raise IngestError(f"{path}: pipeline frames must be RGB or Bayer")
    return img


def _channel_image(frame: RasterImage, mode: str) -> RasterImage:
    if mode in ("rgb", "rgbmean"):
        return frame
    if mode == "hue":
        return to_hue_sat(frame)[0]
    if mode == "gray":
        return to_gray(frame)
    raise ParameterError(f"unknown channel mode {mode!r}")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every configured stage; returns {artifact name: path}.

    Inputs are validated before anything is written, so a missing input
    leaves no partial outputs behind.
    """
    config.validate()
    frame_paths = list_frames(config.input)
    gt_paths = None
    if config.gt is not None:
        gt_paths = list_frames(config.gt)
        if len(gt_paths) != len(frame_paths):
            raise IngestError(
                f"{len(frame_paths)} frames but {len(gt_paths)} ground-truth masks")

    segment_fn, _ = build_segmenter(config.segmenter)
    merge_mode = config.merge_channel or ("rgbmean" if config.channels == "rgb" else config.channels)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = {}

    region_rows = []
    feature_rows = []
    metric_sums = {c: np.zeros(4) for c in CLASS_NAMES}
    frames_cache = []

    for fi, path in enumerate(frame_paths):
        frame = load_rgb(path)
        frames_cache.append(frame)
        stem = path.stem

        seg_img = _channel_image(frame, config.channels)
        labels = segment_fn(seg_img)
        save_labelmap(out / "labels" / f"{stem}.png", labels)

        merge_img = _channel_image(frame, merge_mode)
        regions, region_mask = merge_labelmap(labels, merge_img)
        save_labelmap(out / "regions" / f"{stem}.png", region_mask)

        gt = None
        region_classes = None
        if gt_paths is not None:
            gt = load_mask(gt_paths[fi], expected_shape=frame.data.shape[:2])
            region_classes = assign_classes(region_mask, gt)
        save_overlay(out / "overlays" / f"{stem}.png", frame, region_mask, region_classes)

        rstats = compute_stats(region_mask, merge_img)
        for gi in range(1, region_mask.cluster_count):
            region_rows.append([
                stem, gi, int(rstats.sizes[gi]),
                _fmt(rstats.centroids[gi, 0]), _fmt(rstats.centroids[gi, 1]),
                _fmt(rstats.mean_intensity[gi]),
            ])

        if config.features or config.embed is not None:
            ids, table = region_feature_table(region_mask, frame)
            for rid, vec in zip(ids, table):
                cls = int(region_classes[rid]) if region_classes is not None else ""
                feature_rows.append([stem, int(rid), cls] + [_fmt(v) for v in vec])

        if gt is not None:
            pixel_classes = class_mask(region_mask, region_classes)
            for c in CLASS_NAMES:
                m = metrics(confusion(pixel_classes == c, gt.labels == c))
                metric_sums[c] += (m.sensitivity, m.specificity, m.precision, m.accuracy)

    write_csv(out / "regions.csv",
              ["frame", "region", "size", "centroid_x", "centroid_y", "mean_intensity"],
              region_rows)
    artifacts["regions"] = out / "regions.csv"

    if config.features or config.embed is not None:
        write_csv(out / "features.csv",
                  ["frame", "region", "class"] + list(FEATURE_NAMES), feature_rows)
        artifacts["features"] = out / "features.csv"

    if config.embed is not None:
        vectors = np.array([[float(v) for v in row[3:]] for row in feature_rows])
        if vectors.shape[0] >= 4:
            emb = tsne(vectors,
                       perplexity=float(config.embed.get("perplexity", 30.0)),
                       iterations=int(config.embed.get("iterations", 1000)),
                       seed=config.rng_seed)
            rows = [[r[0], r[1], _fmt(x), _fmt(y)]
                    for r, (x, y) in zip(feature_rows, emb)]
            write_csv(out / "embedding.csv", ["frame", "region", "x", "y"], rows)
            artifacts["embedding"] = out / "embedding.csv"
        else:
            log.warning("embedding skipped: fewer than 4 regions")

    if config.track is not None and len(frames_cache) > 1:
        seed_xy = tuple(config.track["seed_xy"])
        rows = track_sequence(
            frames_cache, seed_xy,
            segments=int(config.track.get("segments", config.segmenter.get("segments", 1500))),
            channels=config.track.get("channels", config.channels),
        )
        track_path = out / "track.jsonl"
        with open(track_path, "w") as fh:
            for row in rows:
                fh.write(json.dumps({
                    "frame": row["frame"], "x": round(row["x"], 4), "y": round(row["y"], 4),
                    "region_size": row["region_size"], "hue": round(row["hue"], 4),
                    "sat": round(row["sat"], 4), "gray": round(row["gray"], 4),
                    "weight": row["weight"], "lost": row["lost"],
                }, sort_keys=True) + "\n")
        artifacts["track"] = track_path

    if gt_paths is not None:
        rows = []
        for c, name in CLASS_NAMES.items():
            mean = metric_sums[c] / len(frame_paths)
            rows.append([name, _fmt(mean[0]), _fmt(mean[1]), _fmt(mean[2]), _fmt(mean[3])])
        write_csv(out / "metrics.csv",
                  ["class", "sensitivity", "specificity", "precision", "accuracy"], rows)
        artifacts["metrics"] = out / "metrics.csv"

    log.info("pipeline wrote %d artifacts to %s", len(artifacts), out)
    return artifacts
