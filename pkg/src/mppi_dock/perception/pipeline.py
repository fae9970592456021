"""LiDAR scan to world-frame dock estimate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import VesselParams, VesselState, normalize_angle
from ..world import LidarScan, corners_batch
from .clustering import PerceptionError, extract_dock_cluster, segment_walls
from .lines import (
    LineFitError,
    VERTICAL_SPREAD,
    LineModel,
    angle_difference,
    axis_angle,
    entry_point,
    find_parallel_pair,
    fit_line_ransac,
    mean_axis_angle,
    to_world_frame,
    wall_clearances,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerceptionConfig:
    d_max: float = 50.0
    eps: float = 0.3
    min_pts: int = 5
    n_components: int = 3
    gmm_max_iter: int = 100
    gmm_tol: float = 1e-6
    gmm_restarts: int = 5
    ransac_iters: int = 200
    ransac_tol: float = 0.08
    ransac_min_inliers: int = 10
    parallel_tol: float = float(np.radians(10.0))
    min_wall_separation: float = 1.0
    merge_radius: float = 4.5
    min_wall_length: float = 0.5
    d_entry: float = 3.5
    # "geometric": axis midline + back wall offset by half the berth depth;
    # "centroid": mean of the dock cluster points
    center_method: str = "geometric"
    berth_depth: float = 4.0
    # dock clusters thinner than this (minor-axis std, m) are one wall seen end-on to the berth
    single_wall_spread: float = 0.25
    segment_clearance: bool = True

    def __post_init__(self):
        if self.center_method not in ("geometric", "centroid"):
            raise ValueError(f"unknown center_method {self.center_method!r}")


@dataclass(frozen=True, eq=False)
class DockEstimate:
    center: np.ndarray
    orientation: float
    entry_point: np.ndarray
    wall_lines: tuple[LineModel, ...] = ()
    wall_clearances: np.ndarray = field(default_factory=lambda: np.zeros(0))
    valid: bool = True
    timestamp: float = 0.0
    reason: str = ""
    # read from a single straight wall, which cannot tell the back wall from a side wall
    ambiguous: bool = False

    @classmethod
    def invalid(cls, timestamp: float = 0.0, reason: str = "") -> "DockEstimate":
        nan2 = np.full(2, np.nan)
        return cls(nan2, float("nan"), nan2.copy(), (), np.zeros(0), False, timestamp, reason)

    @classmethod
    def from_pose(cls, center, orientation: float, d_entry: float = 3.5, wall_lines=(), timestamp: float = 0.0):
        """A valid estimate built directly from a known dock pose."""
        c = np.asarray(center, dtype=float)
        return cls(c, float(orientation), entry_point(c, orientation, d_entry), tuple(wall_lines),
                   np.zeros(len(wall_lines)), True, timestamp)


def scan_to_points(scan: LidarScan, d_max: float) -> np.ndarray:
    """Cartesian vessel-frame points for hit beams no farther than ``d_max``."""
    if d_max <= 0:
        raise ValueError("d_max must be positive")
    keep = np.asarray(scan.hits, bool) & (np.asarray(scan.ranges) <= d_max)
    r, th = np.asarray(scan.ranges)[keep], np.asarray(scan.angles)[keep]
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def _line_axis_intersection(line: LineModel, axis_point: np.ndarray, axis_dir: np.ndarray) -> float | None:
    """Signed position along the axis where ``line`` crosses it."""
    n = line.normal
    denom = n @ axis_dir
    if abs(denom) < 1e-9:
        return None
    return float(n @ (np.asarray(line.point) - axis_point) / denom)


def _single_wall_estimate(points: np.ndarray, config: PerceptionConfig):
    """The dock cluster is one straight wall: read it as the back wall seen from behind.

    From in front or from the side at least one side wall would be in view,
    so the berth is taken to open away from the sensor (the local origin).
    The lateral centre is the middle of the observed wall extent, exact only
    when the whole wall is visible.
    """
    centroid = points.mean(axis=0)
    _, vecs = np.linalg.eigh(np.cov((points - centroid).T))
    angle = axis_angle(np.arctan2(vecs[1, 1], vecs[0, 1]))
    d = np.array([np.cos(angle), np.sin(angle)])
    axis = np.array([-d[1], d[0]])
    if axis @ centroid > 0:
        axis = -axis
    proj = (points - centroid) @ d
    center = centroid + 0.5 * (proj.min() + proj.max()) * d - 0.5 * config.berth_depth * axis
    theta = normalize_angle(float(np.arctan2(axis[1], axis[0])))
    wall = LineModel.from_point_angle(centroid, angle, len(points), (float(proj.min()), float(proj.max())),
                                      representation_valid=np.ptp(points[:, 0]) >= VERTICAL_SPREAD)
    return center, theta, [wall], True


def _local_estimate(points: np.ndarray, config: PerceptionConfig, rng: np.random.Generator):
    dock_pts, centroid = extract_dock_cluster(points, config.eps, config.min_pts, config.merge_radius)
    if len(dock_pts) < config.n_components:
        raise PerceptionError("dock cluster smaller than the wall count")
    spread = np.sqrt(np.linalg.eigvalsh(np.cov((dock_pts - centroid).T)))
    if spread[0] < config.single_wall_spread:
        return _single_wall_estimate(dock_pts, config)
    subsets = segment_walls(dock_pts, config.n_components, rng, config.gmm_max_iter,
                            config.gmm_tol, config.gmm_restarts)
    lines = []
    for sub in subsets:
        if len(sub) < 2:
            continue
        try:
            line = fit_line_ransac(sub, rng, config.ransac_iters, config.ransac_tol, config.ransac_min_inliers)
        except LineFitError:
            continue
        # wall end faces are only a wall-thickness long
        if line.extent[1] - line.extent[0] >= config.min_wall_length:
            lines.append(line)
    if len(lines) < 2:
        raise PerceptionError("fewer than two wall lines fitted")

    a, b = find_parallel_pair(lines, config.parallel_tol, config.min_wall_separation)
    theta = mean_axis_angle(lines[a].angle, lines[b].angle)
    axis = np.array([np.cos(theta), np.sin(theta)])
    lateral = np.array([-axis[1], axis[0]])

    others = [k for k in range(len(lines)) if k not in (a, b)]
    back = None
    if others:
        k = max(others, key=lambda k: angle_difference(lines[k].angle, theta))
        if angle_difference(lines[k].angle, theta) > np.radians(45.0):
            back = lines[k]

    # sign: the back wall lies ahead of the centroid; without one, assume we see into the opening
    ref = np.asarray(back.point) - centroid if back is not None else centroid
    if ref @ axis < 0:
        theta, axis, lateral = theta + np.pi, -axis, -lateral
    theta = normalize_angle(theta)

    if config.center_method == "centroid":
        center = centroid
    else:
        mid_l = 0.5 * (lateral @ np.asarray(lines[a].point) + lateral @ np.asarray(lines[b].point))
        origin = mid_l * lateral
        along = _line_axis_intersection(back, origin, axis) if back is not None else None
        if along is not None:
            along -= 0.5 * config.berth_depth
        else:
            # side walls start at the opening, half a berth depth before the centre
            side = [ln for ln in lines if angle_difference(ln.angle, theta) < config.parallel_tol]
            ends = [ln.endpoints() @ axis for ln in side if ln.extent is not None]
            if ends:
                along = float(min(e.min() for e in ends)) + 0.5 * config.berth_depth
            else:
                along = float(axis @ centroid)
        center = origin + along * axis
    return center, theta, lines, False


def perceive(
    scan: LidarScan,
    vessel: VesselState,
    config: PerceptionConfig = PerceptionConfig(),
    rng: np.random.Generator | None = None,
    params: VesselParams | None = None,
) -> DockEstimate:
    """Full pipeline; any stage failure yields ``valid=False`` instead of raising."""
    rng = np.random.default_rng(0) if rng is None else rng
    points = scan_to_points(scan, config.d_max)
    try:
        center_l, theta_l, lines_l, ambiguous = _local_estimate(points, config, rng)
    except (PerceptionError, ValueError) as exc:
        log.debug("perception failed at t=%.2f: %s", scan.timestamp, exc)
        return DockEstimate.invalid(scan.timestamp, str(exc))

    pose = (vessel.x, vessel.y, vessel.psi)
    center = to_world_frame(center_l, pose)
    theta = normalize_angle(theta_l + vessel.psi)
    lines = tuple(line.transformed(vessel.psi, (vessel.x, vessel.y)) for line in lines_l)
    params = VesselParams() if params is None else params
    corners = corners_batch(vessel.as_array(), params.length, params.width)
    clear = wall_clearances(corners, lines, config.segment_clearance)
    return DockEstimate(center, theta, entry_point(center, theta, config.d_entry), lines, clear,
                        True, scan.timestamp, ambiguous=ambiguous)
