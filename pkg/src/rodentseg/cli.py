"""Command-line interface.

Subcommands: segment, merge, features, embed, track, eval, bench, fixture,
pipeline.  Exit codes: 0 success, 1 internal failure, 2 missing input,
3 invalid configuration.  Set RODENTSEG_LOG=DEBUG|INFO|... for log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluate, fixtures, pipeline
from .errors import IngestError, ParameterError, RodentSegError, SeedError
from .imgio import load_mask, save_labelmap
from .merge import compute_stats, merge_labelmap
from .tracker import track_sequence
from .tsne import tsne

log = logging.getLogger("rodentseg")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MISSING_INPUT = 2
EXIT_BAD_CONFIG = 3


def _fmt(x) -> str:
    return f"{float(x):.6f}"


def cmd_segment(args) -> int:
    frame = pipeline.load_rgb(args.infile)
    seg_img = pipeline._channel_image(frame, args.channels)
    spec = {"method": args.method}
    if args.method == "slic":
        spec.update(segments=args.segments, compactness=args.compactness)
    run, params = pipeline.build_segmenter(spec)
    labels = run(seg_img)
    save_labelmap(args.out, labels)
    log.info("segmented %s into %d superpixels (%s)", args.infile, labels.cluster_count, params)
    if args.stats:
        stats = compute_stats(labels, seg_img)
        rows = [[i, int(stats.sizes[i]), _fmt(stats.centroids[i, 0]),
                 _fmt(stats.centroids[i, 1]), _fmt(stats.mean_intensity[i])]
                for i in range(labels.cluster_count)]
        pipeline.write_csv(args.stats,
                           ["label", "size", "centroid_x", "centroid_y", "mean_intensity"], rows)
    return EXIT_OK


def cmd_merge(args) -> int:
    frame = pipeline.load_rgb(args.frame)
    labels = load_mask(args.labels, expected_shape=frame.data.shape[:2])
    channel_img = pipeline._channel_image(frame, args.channel)
    regions, region_mask = merge_labelmap(labels, channel_img)
    save_labelmap(args.out, region_mask)
    log.info("merged %d superpixels into %d regions", labels.cluster_count, regions.group_count)
    if args.stats:
        rstats = compute_stats(region_mask, channel_img)
        rows = [[gi, int(rstats.sizes[gi]), _fmt(rstats.centroids[gi, 0]),
                 _fmt(rstats.centroids[gi, 1]), _fmt(rstats.mean_intensity[gi])]
                for gi in range(1, region_mask.cluster_count)]
        pipeline.write_csv(args.stats,
                           ["region", "size", "centroid_x", "centroid_y", "mean_intensity"], rows)
    return EXIT_OK


def cmd_features(args) -> int:
    from .evaluate import assign_classes
    from .features import FEATURE_NAMES, region_feature_table

    frame = pipeline.load_rgb(args.frame)
    region_mask = load_mask(args.regions, expected_shape=frame.data.shape[:2])
    classes = None
    if args.gt:
        gt = load_mask(args.gt, expected_shape=frame.data.shape[:2])
        classes = assign_classes(region_mask, gt)
    ids, table = region_feature_table(region_mask, frame)
    rows = []
    for rid, vec in zip(ids, table):
        cls = int(classes[rid]) if classes is not None else ""
        rows.append([int(rid), cls] + [_fmt(v) for v in vec])
    pipeline.write_csv(args.out, ["region", "class"] + list(FEATURE_NAMES), rows)
    return EXIT_OK


def cmd_embed(args) -> int:
    path = Path(args.infile)
    if not path.exists():
        raise IngestError(f"no such feature table: {path}")
    import csv as _csv

    with open(path) as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    n_meta = len(header) - 28
    if n_meta < 0:
        raise IngestError(f"{path} does not look like a 28-column feature table")
    vectors = np.array([[float(v) for v in row[n_meta:]] for row in rows])
    emb = tsne(vectors, perplexity=args.perplexity, iterations=args.iterations, seed=args.seed)
    out_rows = [row[:n_meta] + [_fmt(x), _fmt(y)] for row, (x, y) in zip(rows, emb)]
    pipeline.write_csv(args.out, header[:n_meta] + ["x", "y"], out_rows)
    return EXIT_OK


def cmd_track(args) -> int:
    frame_paths = pipeline.list_frames(args.frames)
    frames = [pipeline.load_rgb(p) for p in frame_paths]
    seed_xy = tuple(float(v) for v in args.seed.split(","))
    if len(seed_xy) != 2:
        raise ParameterError("--seed expects X,Y")
    rows = track_sequence(frames, seed_xy, segments=args.segments, channels=args.channels)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        for row in rows:
            fh.write(json.dumps({
                "frame": row["frame"], "x": round(row["x"], 4), "y": round(row["y"], 4),
                "region_size": row["region_size"], "hue": round(row["hue"], 4),
                "sat": round(row["sat"], 4), "gray": round(row["gray"], 4),
                "weight": row["weight"], "lost": row["lost"],
            }, sort_keys=True) + "\n")
    losses = sum(1 for r in rows if r["lost"])
    log.info("tracked %d frames, %d losses", len(rows), losses)
    return EXIT_OK


def _class_ids(names: str):
    by_name = {v: k for k, v in evaluate.CLASS_NAMES.items()}
    ids = []
    for name in names.split(","):
        if name not in by_name:
            raise ParameterError(f"unknown class {name!r}; expected {sorted(by_name)}")
        ids.append(by_name[name])
    return ids


def cmd_eval(args) -> int:
    classes = _class_ids(args.classes)
    if args.sweep:
        frame_paths = pipeline.list_frames(args.pred)
        gt_paths = pipeline.list_frames(args.gt)
        if len(frame_paths) != len(gt_paths):
            raise IngestError("frame and ground-truth counts differ")
        pairs = []
        for fp, gp in zip(frame_paths, gt_paths):
            frame = pipeline.load_rgb(fp)
            pairs.append((frame, load_mask(gp, expected_shape=frame.data.shape[:2])))
        records = evaluate.roc_sweep(
            pairs, args.channels.split(","),
            [int(s) for s in args.segments.split(",")], classes=classes)
        rows = [[r.class_name, r.channels, r.segments, _fmt(r.sensitivity),
                 _fmt(r.specificity), _fmt(r.precision), _fmt(r.accuracy)] for r in records]
        pipeline.write_csv(args.out, ["class", "channels", "segments", "sensitivity",
                                      "specificity", "precision", "accuracy"], rows)
        return EXIT_OK

    pred_paths = pipeline.list_frames(args.pred)
    gt_paths = pipeline.list_frames(args.gt)
    if len(pred_paths) != len(gt_paths):
        raise IngestError("prediction and ground-truth counts differ")
    sums = {c: np.zeros(4) for c in classes}
    for pp, gp in zip(pred_paths, gt_paths):
        pred = load_mask(pp)
        gt = load_mask(gp, expected_shape=pred.labels.shape)
        for c in classes:
            m = evaluate.metrics(evaluate.confusion(pred.labels == c, gt.labels == c))
            sums[c] += (m.sensitivity, m.specificity, m.precision, m.accuracy)
    rows = []
    for c in classes:
        mean = sums[c] / len(pred_paths)
        rows.append([evaluate.CLASS_NAMES[c]] + [_fmt(v) for v in mean])
    pipeline.write_csv(args.out, ["class", "sensitivity", "specificity", "precision", "accuracy"],
                       rows)
    return EXIT_OK


def cmd_bench(args) -> int:
    frame = pipeline.load_rgb(args.frame)
    from .superpixel import SlicParams

    records = evaluate.bench(frame, methods=args.methods.split(","), repetitions=args.reps,
                             slic_params=SlicParams(segment_count=args.segments))
    rows = [[r.method, _fmt(r.mean_seconds), r.width, r.height, r.params] for r in records]
    pipeline.write_csv(args.out, ["method", "mean_seconds", "width", "height", "params"], rows)
    for r in records:
        print(f"{r.method}: {r.mean_seconds:.3f} s/frame")
    return EXIT_OK


def cmd_fixture(args) -> int:
    params = {}
    if args.frames is not None:
        params["n_frames"] = args.frames
    if args.width is not None:
        params["width"] = args.width
    if args.height is not None:
        params["height"] = args.height
    fixtures.make_fixture(args.kind, args.seed, out_dir=args.out, **params)
    log.info("wrote %s fixture to %s", args.kind, args.out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = pipeline.PipelineConfig.from_json(args.config)
    if args.input:
        config.input = args.input
    if args.out_dir:
        config.out_dir = args.out_dir
    if args.channels:
        config.channels = args.channels
    if args.rng_seed is not None:
        config.rng_seed = args.rng_seed
    pipeline.run_pipeline(config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rodentseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="superpixel-segment one frame")
    p.add_argument("--method", choices=("slic", "gb", "qs"), default="slic")
    p.add_argument("--segments", type=int, default=1500)
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--channels", choices=pipeline.CHANNEL_MODES, default="rgb")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("merge", help="merge superpixels into regions")
    p.add_argument("--labels", required=True)
    p.add_argument("--channel", choices=("hue", "gray", "rgbmean"), default="hue")
    p.add_argument("--frame", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("features", help="28-value feature vectors per region")
    p.add_argument("--regions", required=True)
    p.add_argument("--frame", required=True)
    p.add_argument("--gt", help="optional ground truth for class labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("embed", help="2-D embedding of a feature table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("track", help="track a seeded landmark over frames")
    p.add_argument("--frames", required=True)
    p.add_argument("--seed", required=True, metavar="X,Y")
    p.add_argument("--channels", choices=pipeline.CHANNEL_MODES, default="hue")
    p.add_argument("--segments", type=int, default=1500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="pixel metrics against ground truth")
    p.add_argument("--pred", required=True, help="class masks, or frames with --sweep")
    p.add_argument("--gt", required=True)
    p.add_argument("--classes", default="paw,body,tail")
    p.add_argument("--sweep", action="store_true",
                   help="segment the frames over channel x segment-count configs")
    p.add_argument("--channels", default="rgb,hue,gray")
    p.add_argument("--segments", default="500,1500,4500")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time the segmenters on one frame")
    p.add_argument("--methods", default="slic,gb,qs")
    p.add_argument("--frame", required=True)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--segments", type=int, default=1500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fixture", help="generate a synthetic fixture")
    p.add_argument("--kind", choices=fixtures.FIXTURE_KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("pipeline", help="run the configured end-to-end pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--input")
    p.add_argument("--out-dir")
    p.add_argument("--channels", choices=pipeline.CHANNEL_MODES)
    p.add_argument("--rng-seed", type=int)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RODENTSEG_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IngestError as exc:
        log.error("%s", exc)
        return EXIT_MISSING_INPUT
    except (ParameterError, SeedError) as exc:
        log.error("%s", exc)
        return EXIT_BAD_CONFIG
    except RodentSegError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
