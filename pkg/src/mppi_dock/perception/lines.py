"""Robust wall-line fitting and the line geometry built on top of it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics import normalize_angle
from .clustering import PerceptionError

VERTICAL_SPREAD = 0.05


class LineFitError(PerceptionError):
    """RANSAC found too little consensus for a wall."""


def axis_angle(a):
    """Reduce a direction angle modulo pi into (-pi/2, pi/2]."""
    a = np.asarray(a, dtype=float)
    out = a - np.pi * np.ceil((a - 0.5 * np.pi) / np.pi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class LineModel:
    """A fitted wall line.

    ``slope``/``intercept`` give the ``y = m x + c`` form. When the inlier
    x-spread is below ``VERTICAL_SPREAD`` that form is ill-conditioned and
    ``representation_valid`` is False; ``angle`` (direction modulo pi) and
    ``point`` stay exact for every orientation and are what the geometry
    routines use. ``extent`` is the span of inlier projections along the
    direction, measured from ``point``.
    """

    slope: float
    intercept: float
    inlier_count: int
    representation_valid: bool
    angle: float
    point: tuple[float, float]
    extent: tuple[float, float] | None = None

    @classmethod
    def from_slope(cls, slope: float, intercept: float, inlier_count: int = 0, extent=None) -> "LineModel":
        return cls(float(slope), float(intercept), int(inlier_count), True,
                   float(np.arctan(slope)), (0.0, float(intercept)), extent)

    @classmethod
    def from_point_angle(cls, point, angle: float, inlier_count: int = 0, extent=None,
                         representation_valid: bool = True) -> "LineModel":
        ang = axis_angle(angle)
        px, py = float(point[0]), float(point[1])
        c = np.cos(ang)
        if abs(c) < 1e-15:
            m, ic = np.inf, np.nan
        else:
            m = np.tan(ang)
            ic = py - m * px
        return cls(float(m), float(ic), int(inlier_count), bool(representation_valid), ang, (px, py), extent)

    @property
    def direction(self) -> np.ndarray:
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def normal(self) -> np.ndarray:
        return np.array([-np.sin(self.angle), np.cos(self.angle)])

    def endpoints(self) -> np.ndarray | None:
        if self.extent is None:
            return None
        p, d = np.asarray(self.point), self.direction
        return np.array([p + self.extent[0] * d, p + self.extent[1] * d])

    def transformed(self, rotation: float, translation) -> "LineModel":
        """Same line under the rigid motion ``R(rotation) p + translation``."""
        c, s = np.cos(rotation), np.sin(rotation)
        px, py = self.point
        p = (c * px - s * py + translation[0], s * px + c * py + translation[1])
        # direction may flip when reduced mod pi; keep the extent attached to the same ends
        raw = self.angle + rotation
        ang = axis_angle(raw)
        ext = self.extent
        if ext is not None and abs(normalize_angle(raw - ang)) > 1.0:
            ext = (-ext[1], -ext[0])
        valid = self.representation_valid
        if ext is not None:
            valid = abs((ext[1] - ext[0]) * np.cos(ang)) >= VERTICAL_SPREAD
        return LineModel.from_point_angle(p, ang, self.inlier_count, ext, valid)

    def distance(self, points, segment: bool = True) -> np.ndarray:
        """Distance from (..., 2) points to the line, or to its extent when known."""
        pts = np.asarray(points, dtype=float)
        return self.distance_xy(pts[..., 0], pts[..., 1], segment)

    def distance_xy(self, x, y, segment: bool = True) -> np.ndarray:
        px, py = self.point
        dx, dy = np.cos(self.angle), np.sin(self.angle)
        rx, ry = x - px, y - py
        if not segment or self.extent is None:
            return np.abs(rx * dy - ry * dx)
        t = np.clip(rx * dx + ry * dy, self.extent[0], self.extent[1])
        return np.hypot(rx - t * dx, ry - t * dy)


def fit_line_ransac(
    points: np.ndarray,
    rng: np.random.Generator,
    n_iters: int = 200,
    inlier_tol: float = 0.08,
    min_inliers: int = 10,
) -> LineModel:
    """Two-point RANSAC, then an orthogonal least-squares refit on the inliers.

    The winning hypothesis has the most inliers within ``inlier_tol``
    (perpendicular distance); ties go to the lower mean inlier residual.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise ValueError("RANSAC needs at least two points")
    i = rng.integers(n, size=n_iters)
    j = (i + rng.integers(1, n, size=n_iters)) % n
    d = pts[j] - pts[i]
    length = np.hypot(d[:, 0], d[:, 1])
    good = length > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        nrm = np.stack([-d[:, 1], d[:, 0]], axis=1) / length[:, None]
    res = np.abs((pts[None, :, 0] - pts[i, 0, None]) * nrm[:, 0, None]
                 + (pts[None, :, 1] - pts[i, 1, None]) * nrm[:, 1, None])
    inl = (res <= inlier_tol) & good[:, None]
    count = inl.sum(axis=1)
    with np.errstate(invalid="ignore"):
        mean_res = np.where(count > 0, np.where(inl, res, 0.0).sum(axis=1) / np.maximum(count, 1), np.inf)
    best = int(np.lexsort((mean_res, -count))[0])
    if count[best] < min_inliers:
        raise LineFitError(f"best RANSAC consensus {count[best]} < {min_inliers}")

    inliers = pts[inl[best]]
    centroid = inliers.mean(axis=0)
    centered = inliers - centroid
    _, vecs = np.linalg.eigh(centered.T @ centered)
    direction = vecs[:, 1]
    angle = axis_angle(np.arctan2(direction[1], direction[0]))
    dvec = np.array([np.cos(angle), np.sin(angle)])
    proj = centered @ dvec
    spread = float(np.ptp(inliers[:, 0]))
    return LineModel.from_point_angle(
        centroid, angle, int(count[best]), (float(proj.min()), float(proj.max())),
        representation_valid=spread >= VERTICAL_SPREAD,
    )


def angle_difference(a: float, b: float) -> float:
    """Unsigned difference of two undirected line angles, in [0, pi/2]."""
    return abs(axis_angle(a - b))


def find_parallel_pair(lines: list[LineModel], parallel_tol: float, min_separation: float = 0.0) -> tuple[int, int]:
    """Indices of the best parallel pair.

    Candidates differ in angle by less than ``parallel_tol`` (mod pi); the
    smallest difference wins. Pairs at least ``min_separation`` apart (along
    their mean normal) are preferred over closer ones, which are usually two
    pieces of the same wall, but a close pair is still returned when it is
    the only candidate.
    """
    best, best_key = None, None
    for a in range(len(lines)):
        for b in range(a + 1, len(lines)):
            diff = angle_difference(lines[a].angle, lines[b].angle)
            if diff >= parallel_tol:
                continue
            n = LineModel.from_point_angle((0, 0), mean_axis_angle(lines[a].angle, lines[b].angle)).normal
            sep = abs(n @ (np.asarray(lines[a].point) - np.asarray(lines[b].point)))
            key = (sep < min_separation, diff)
            if best_key is None or key < best_key:
                best, best_key = (a, b), key
    if best is None:
        raise PerceptionError("no parallel wall pair")
    return best


def mean_axis_angle(a: float, b: float) -> float:
    """Average of two undirected angles, correct across the +-pi/2 branch."""
    return axis_angle(0.5 * np.arctan2(np.sin(2 * a) + np.sin(2 * b), np.cos(2 * a) + np.cos(2 * b)))


def estimate_orientation(lines: list[LineModel], parallel_tol: float = np.radians(10.0),
                         min_separation: float = 0.0) -> float:
    """Dock axis angle (mod pi) as the mean angle of the parallel wall pair."""
    if len(lines) < 2:
        raise PerceptionError("orientation needs at least two wall lines")
    a, b = find_parallel_pair(lines, parallel_tol, min_separation)
    return mean_axis_angle(lines[a].angle, lines[b].angle)


def wall_clearances(corners: np.ndarray, wall_lines: list[LineModel], segment: bool = True) -> np.ndarray:
    """Per-wall minimum corner distance; ``corners`` is (..., 4, 2), result (..., n_walls)."""
    corners = np.asarray(corners, dtype=float)
    # corner-major contiguous copies: the per-corner minimum becomes 3 flat ops
    x = np.ascontiguousarray(np.moveaxis(corners[..., 0], -1, 0))
    y = np.ascontiguousarray(np.moveaxis(corners[..., 1], -1, 0))
    out = np.empty(corners.shape[:-2] + (len(wall_lines),))
    for k, line in enumerate(wall_lines):
        d = line.distance_xy(x, y, segment)
        out[..., k] = np.minimum(np.minimum(d[0], d[1]), np.minimum(d[2], d[3]))
    return out


def entry_point(center, orientation: float, d_entry: float) -> np.ndarray:
    if d_entry <= 0:
        raise ValueError("d_entry must be positive")
    c = np.asarray(center, dtype=float)
    return c + d_entry * np.array([np.cos(orientation + np.pi), np.sin(orientation + np.pi)])


def to_world_frame(local, pose) -> np.ndarray:
    """Map (..., 2) vessel-frame points to the world with pose ``(x, y, psi)``."""
    x, y, psi = float(pose[0]), float(pose[1]), float(pose[2])
    c, s = np.cos(psi), np.sin(psi)
    p = np.asarray(local, dtype=float)
    out = np.empty(p.shape)
    out[..., 0] = c * p[..., 0] - s * p[..., 1] + x
    out[..., 1] = s * p[..., 0] + c * p[..., 1] + y
    return out


def to_local_frame(world, pose) -> np.ndarray:
    x, y, psi = float(pose[0]), float(pose[1]), float(pose[2])
    c, s = np.cos(psi), np.sin(psi)
    p = np.asarray(world, dtype=float)
    dx, dy = p[..., 0] - x, p[..., 1] - y
    out = np.empty(p.shape)
    out[..., 0] = c * dx + s * dy
    out[..., 1] = -s * dx + c * dy
    return out
