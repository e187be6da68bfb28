"""panopt3d — panoptic segmentation post-processing for 3-D point clouds.

The package turns per-point network-style predictions (semantic classes,
center offsets, confidences) into panoptic labels via confidence-ranked
center deduplication, and ships everything around that core: binary codecs,
grid projections, supervision targets and losses, panoptic-quality
evaluation, clustering baselines, a synthetic scene generator with a
calibrated prediction oracle, and a CLI.
"""

__version__ = "0.1.0"

from .baselines import DBSCANBaseline, MeanShiftBaseline, dbscan, meanshift
from .bench import BENCH_METHODS, run_bench
from .codec import (decode_labels, encode_labels, read_confidence, read_labels,
                    read_offsets, read_point_cloud, write_confidence,
                    write_labels, write_offsets, write_point_cloud)
from .data import (PanopticLabels, PointCloud, PredictionSet, Violation,
                   validate_labels)
from .dedup import (CenterDedup, KeptCenters, dedup_centers_bruteforce,
                    dedup_centers_grid, ranked_order)
from .errors import CodecError, Panopt3dError, PlacementError, TaxonomyError
from .grids import (GRID_VIEWS, GridSpec, ShiftedPoints, gather_from_grid,
                    point_to_cell, scatter_to_grid, shift_points)
from .metrics import (IOU_MATCH_THRESHOLD, ClassReport, EvalReport, MatchStats,
                      evaluate, evaluate_stats, match_scan, pq_identity_check,
                      segments)
from .pipeline import (PanopticPipeline, PipelineParams, PipelineResult,
                       assign_to_centers, majority_vote, panoptic_postprocess,
                       select_things, vote_and_compact)
from .supervision import (CONFIDENCE_WEIGHT, LOSS_WEIGHTS, MeanOffsetError,
                          OffsetLossResult, OffsetTargets, confidence_targets,
                          instance_centers, mean_offset_error, offset_loss,
                          offset_targets, total_loss, wbce_loss)
from .synth import (OracleNoise, SceneConfig, default_taxonomy, generate_scene,
                    load_scene_config, oracle_predict, save_scene_config)
from .taxonomy import ClassEntry, ClassTaxonomy

__all__ = [
    "__version__",
    # errors
    "Panopt3dError", "CodecError", "TaxonomyError", "PlacementError",
    # taxonomy & data
    "ClassEntry", "ClassTaxonomy", "PointCloud", "PanopticLabels",
    "PredictionSet", "Violation", "validate_labels",
    # codec
    "decode_labels", "encode_labels", "read_labels", "write_labels",
    "read_point_cloud", "write_point_cloud", "read_offsets", "write_offsets",
    "read_confidence", "write_confidence",
    # grids
    "GRID_VIEWS", "GridSpec", "point_to_cell", "scatter_to_grid",
    "gather_from_grid", "shift_points", "ShiftedPoints",
    # supervision
    "CONFIDENCE_WEIGHT", "LOSS_WEIGHTS", "instance_centers", "OffsetTargets",
    "offset_targets", "OffsetLossResult", "offset_loss", "confidence_targets",
    "wbce_loss", "total_loss", "MeanOffsetError", "mean_offset_error",
    # dedup & baselines
    "KeptCenters", "ranked_order", "dedup_centers_bruteforce",
    "dedup_centers_grid", "CenterDedup", "dbscan", "meanshift",
    "DBSCANBaseline", "MeanShiftBaseline",
    # pipeline
    "PipelineParams", "PipelineResult", "select_things", "assign_to_centers",
    "majority_vote", "vote_and_compact", "panoptic_postprocess",
    "PanopticPipeline",
    # metrics
    "IOU_MATCH_THRESHOLD", "segments", "MatchStats", "match_scan",
    "ClassReport", "EvalReport", "evaluate", "evaluate_stats",
    "pq_identity_check",
    # synth
    "SceneConfig", "OracleNoise", "default_taxonomy", "generate_scene",
    "oracle_predict", "save_scene_config", "load_scene_config",
    # bench
    "BENCH_METHODS", "run_bench",
]
