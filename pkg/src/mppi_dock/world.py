"""Static dock geometry, 2D LiDAR raycasting and ground-truth collision checks."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import ConfigurationError, VesselParams, VesselState

N_BEAMS = 3600
MAX_RANGE = 50.0
MIN_RANGE = 0.01
D_CRIT = 0.25
D_WARN = 0.5


@dataclass(frozen=True)
class WallSegment:
    """A wall as a centreline segment thickened symmetrically."""

    p1: tuple[float, float]
    p2: tuple[float, float]
    thickness: float

    def __post_init__(self):
        if np.allclose(self.p1, self.p2):
            raise ConfigurationError("wall endpoints must differ")

    def rectangle(self) -> np.ndarray:
        """Four corners (counter-clockwise) of the wall's solid rectangle."""
        a, b = np.asarray(self.p1, float), np.asarray(self.p2, float)
        d = (b - a) / np.linalg.norm(b - a)
        n = np.array([-d[1], d[0]]) * (0.5 * self.thickness)
        return np.array([a - n, b - n, b + n, a + n])

    def edges(self) -> np.ndarray:
        """(4, 2, 2) boundary edges of the rectangle."""
        c = self.rectangle()
        return np.stack([c, np.roll(c, -1, axis=0)], axis=1)


@dataclass(frozen=True)
class DockGeometry:
    center: tuple[float, float]
    orientation: float
    width: float
    depth: float
    wall_thickness: float
    walls: tuple[WallSegment, ...]

    @property
    def axis(self) -> np.ndarray:
        """Unit vector from the opening towards the back wall."""
        return np.array([np.cos(self.orientation), np.sin(self.orientation)])

    def all_edges(self) -> np.ndarray:
        return np.concatenate([w.edges() for w in self.walls])


def build_dock(
    center=(10.0, -5.0),
    orientation: float = 0.0,
    width: float = 4.0,
    depth: float = 4.0,
    wall_thickness: float = 0.1,
) -> DockGeometry:
    """U-shaped berth: back wall plus two side walls, opening at ``orientation + pi``.

    ``center`` is the middle of the berth interior; the back wall's inner
    face sits ``depth/2`` ahead of it along the dock axis and the side-wall
    inner faces ``width/2`` to either side.
    """
    if width <= 0 or depth <= 0 or wall_thickness <= 0:
        raise ConfigurationError("dock width, depth and wall thickness must be positive")
    c = np.asarray(center, dtype=float)
    ax = np.array([np.cos(orientation), np.sin(orientation)])
    lat = np.array([-ax[1], ax[0]])
    t = wall_thickness

    def world(a, l):
        p = c + a * ax + l * lat
        return (float(p[0]), float(p[1]))

    half_w, half_d = 0.5 * width, 0.5 * depth
    back_a = half_d + 0.5 * t
    side_l = half_w + 0.5 * t
    walls = (
        WallSegment(world(back_a, -(half_w + t)), world(back_a, half_w + t), t),
        WallSegment(world(-half_d, side_l), world(half_d, side_l), t),
        WallSegment(world(-half_d, -side_l), world(half_d, -side_l), t),
    )
    return DockGeometry((float(c[0]), float(c[1])), float(orientation), float(width), float(depth), float(t), walls)


def vessel_corners(state: VesselState, params: VesselParams) -> np.ndarray:
    """Footprint corners in world frame, shape (4, 2): bow-port, bow-stbd, stern-stbd, stern-port."""
    return corners_batch(state.as_array()[None, :], params.length, params.width)[0]


def corners_batch(states: np.ndarray, length: float, width: float) -> np.ndarray:
    """Footprint corners for (..., >=3) pose arrays, returning (..., 4, 2)."""
    x, y, psi = states[..., 0], states[..., 1], states[..., 2]
    c, s = np.cos(psi), np.sin(psi)
    hl, hw = 0.5 * length, 0.5 * width
    local = ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))
    out = np.empty(states.shape[:-1] + (4, 2))
    for i, (lx, ly) in enumerate(local):
        out[..., i, 0] = x + c * lx - s * ly
        out[..., i, 1] = y + s * lx + c * ly
    return out


# --- collision -------------------------------------------------------------


@dataclass(frozen=True)
class CollisionReport:
    colliding: bool
    min_clearance: float
    zone: str


def classify_zone(clearance: float, d_crit: float = D_CRIT, d_warn: float = D_WARN) -> str:
    if clearance < d_crit:
        return "critical"
    if clearance < d_warn:
        return "warning"
    return "clear"


def _polygons_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis test for two convex quadrilaterals; touching counts as overlap."""
    for poly in (a, b):
        edges = np.roll(poly, -1, axis=0) - poly
        normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
        for n in normals:
            pa, pb = a @ n, b @ n
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def point_rectangle_distance(points: np.ndarray, wall: WallSegment) -> np.ndarray:
    """Euclidean distance from (..., 2) points to the wall's solid rectangle (0 inside)."""
    a, b = np.asarray(wall.p1, float), np.asarray(wall.p2, float)
    length = np.linalg.norm(b - a)
    d = (b - a) / length
    n = np.array([-d[1], d[0]])
    rel = np.asarray(points, float) - 0.5 * (a + b)
    along = np.abs(rel @ d) - 0.5 * length
    across = np.abs(rel @ n) - 0.5 * wall.thickness
    return np.hypot(np.maximum(along, 0.0), np.maximum(across, 0.0))


def check_collision(state: VesselState, dock: DockGeometry, params: VesselParams) -> CollisionReport:
    corners = vessel_corners(state, params)
    for wall in dock.walls:
        if _polygons_overlap(corners, wall.rectangle()):
            return CollisionReport(True, 0.0, "critical")
    clearance = min(float(point_rectangle_distance(corners, w).min()) for w in dock.walls)
    return CollisionReport(False, clearance, classify_zone(clearance))


# --- raycasting ------------------------------------------------------------


def _ray_edges(origin: np.ndarray, directions: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Hit distance of each ray against each edge, inf when missed; shape (n_rays, n_edges)."""
    a = edges[:, 0, :]
    e = edges[:, 1, :] - a
    dx, dy = directions[:, 0:1], directions[:, 1:2]
    denom = dx * e[:, 1] - dy * e[:, 0]
    w = a - origin
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / denom
        s = (w[:, 0] * dy - w[:, 1] * dx) / denom
    ok = (denom != 0) & (t > 0) & (s >= 0) & (s <= 1)
    return np.where(ok, t, np.inf)


def ray_segment_intersection(origin, direction, wall: WallSegment) -> float | None:
    """Nearest positive distance along the ray to the wall's rectangle boundary."""
    t = _ray_edges(np.asarray(origin, float), np.asarray(direction, float)[None, :], wall.edges())
    best = float(t.min())
    return best if np.isfinite(best) else None


@dataclass(frozen=True, eq=False)
class LidarScan:
    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float = MAX_RANGE
    timestamp: float = 0.0

    def __len__(self):
        return len(self.angles)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["angle", "range", "hit"])
            for a, r, h in zip(self.angles, self.ranges, self.hits):
                w.writerow([repr(float(a)), repr(float(r)), int(h)])

    @classmethod
    def from_csv(cls, path, max_range: float = MAX_RANGE, timestamp: float = 0.0) -> "LidarScan":
        rows = list(csv.DictReader(Path(path).read_text().splitlines()))
        angles = np.array([float(r["angle"]) for r in rows])
        ranges = np.array([float(r["range"]) for r in rows])
        hits = np.array([r["hit"].strip().lower() in ("1", "true") for r in rows])
        return cls(angles, ranges, hits, max_range, timestamp)


def beam_angles(n_beams: int = N_BEAMS) -> np.ndarray:
    return np.arange(n_beams) * (2.0 * np.pi / n_beams)


def simulate_lidar(
    state: VesselState,
    dock: DockGeometry,
    noise_sigma: float,
    rng: np.random.Generator,
    max_range: float = MAX_RANGE,
    n_beams: int = N_BEAMS,
    timestamp: float = 0.0,
) -> LidarScan:
    """360 degree scan from the vessel origin; beam 0 points along the bow.

    One noise draw is taken per beam, hit or not, so the noise a beam gets
    depends only on its index.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    angles = beam_angles(n_beams)
    world = angles + state.psi
    dirs = np.stack([np.cos(world), np.sin(world)], axis=1)
    true_range = _ray_edges(state.position, dirs, dock.all_edges()).min(axis=1)
    hits = true_range <= max_range
    noise = rng.standard_normal(n_beams) * noise_sigma
    ranges = np.where(hits, np.clip(true_range + noise, MIN_RANGE, max_range), max_range)
    return LidarScan(angles, ranges, hits, max_range, timestamp)
