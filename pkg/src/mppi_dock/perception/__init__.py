from .clustering import NOISE, PerceptionError, dbscan, extract_dock_cluster, fit_gmm, segment_walls
from .lines import (
    LineFitError,
    LineModel,
    estimate_orientation,
    entry_point,
    find_parallel_pair,
    fit_line_ransac,
    to_local_frame,
    to_world_frame,
    wall_clearances,
)
from .pipeline import DockEstimate, PerceptionConfig, perceive, scan_to_points

__all__ = [
    "NOISE", "PerceptionError", "dbscan", "extract_dock_cluster", "fit_gmm", "segment_walls",
    "LineFitError", "LineModel", "estimate_orientation", "entry_point", "find_parallel_pair",
    "fit_line_ransac", "to_local_frame", "to_world_frame", "wall_clearances",
    "DockEstimate", "PerceptionConfig", "perceive", "scan_to_points",
]
