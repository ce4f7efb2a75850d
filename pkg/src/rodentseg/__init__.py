"""Superpixel segmentation, region merging, texture features and landmark
tracking for high-frame-rate rodent locomotion video."""

from .errors import (DimensionError, IngestError, LayoutError, ParameterError,
                     RodentSegError, SeedError, TrackingLost)
from .imgio import LabelMap, Layout, RasterImage, debayer, load_frame, load_mask, \
    save_image, save_labelmap, save_overlay, to_gray, to_hue_sat
from .superpixel import GbParams, QsParams, SlicParams, gb_segment, qs_segment, slic_segment
from .merge import (AdjacencyGraph, MergedRegions, SuperpixelStats, build_adjacency,
                    compute_stats, merge_labelmap, merge_regions, regions_to_mask)
from .features import FEATURE_NAMES, GlcmMatrix, color_means, feature_vector, glcm, haralick
from .tsne import tsne, tsne_trace
from .tracker import (CandidateObject, TrackState, candidates_from_regions, crop_roi,
                      init_track, score_candidates, step_track, track_sequence)
from .evaluate import (ConfusionCounts, MetricRecord, MetricValues, TimingRecord,
                       assign_classes, bench, confusion, metrics, roc_sweep)
from .fixtures import blob_sequence, make_fixture, textured_silhouette, two_tone
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"
