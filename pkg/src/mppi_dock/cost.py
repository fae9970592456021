"""Six-term docking cost evaluated on (batches of) rollout states.

Every function broadcasts over leading array dimensions so the controller can
score all samples and horizon steps in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .dynamics import VesselParams, normalize_angle
from .perception.lines import wall_clearances
from .perception.pipeline import DockEstimate
from .world import corners_batch

ENTRANCE_GATE = 0.5


@dataclass(frozen=True)
class CostWeights:
    w_dock_goal: float = 1.0
    w_back: float = 0.08
    w_rot: float = 10.0
    w_lat: float = 1.0
    w_max_speed: float = 5.0
    w_goal_ori: float = 1.0
    w_dock_heading: float = 3.0
    w_dock_clear: float = 2.0
    w_dock_entrance: float = 3.0
    v_max: float = 0.3
    d_crit: float = 0.25
    d_warn: float = 0.5
    d_th: float = 0.5
    # "literal": (|v| - v_max)^2, "hinge": relu(|v| - v_max)^2
    speed_penalty: str = "literal"

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("w_") and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if not 0 <= self.d_crit < self.d_warn:
            raise ValueError("need 0 <= d_crit < d_warn")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.speed_penalty not in ("literal", "hinge"):
            raise ValueError(f"unknown speed_penalty {self.speed_penalty!r}")


TERMS = ("goal", "velocity", "heading", "orientation", "clearance", "entrance")


@dataclass(frozen=True)
class CostBreakdown:
    goal: np.ndarray | float
    velocity: np.ndarray | float
    heading: np.ndarray | float
    orientation: np.ndarray | float
    clearance: np.ndarray | float
    entrance: np.ndarray | float

    @property
    def total(self):
        return self.goal + self.velocity + self.heading + self.orientation + self.clearance + self.entrance

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in TERMS}


def _center(dock: DockEstimate) -> np.ndarray:
    return np.asarray(dock.center, dtype=float)


def dock_goal_cost(pos, dock: DockEstimate, w: CostWeights):
    p = np.asarray(pos, dtype=float)
    c = _center(dock)
    return w.w_dock_goal * np.hypot(p[..., 0] - c[0], p[..., 1] - c[1])


def velocity_cost(nu, w: CostWeights):
    """Back-up, sway, yaw-rate and speed-band penalties on body velocities."""
    nu = np.asarray(nu, dtype=float)
    u, v, r = nu[..., 0], nu[..., 1], nu[..., 2]
    excess = np.hypot(u, v) - w.v_max
    if w.speed_penalty == "hinge":
        excess = np.maximum(excess, 0.0)
    return (w.w_back * np.maximum(-u, 0.0) + w.w_lat * v * v + w.w_rot * r * r
            + w.w_max_speed * excess * excess)


def _distance(states, dock):
    s = np.asarray(states, dtype=float)
    c = _center(dock)
    dx, dy = c[0] - s[..., 0], c[1] - s[..., 1]
    return dx, dy, np.hypot(dx, dy)


def dock_heading_cost(states, dock: DockEstimate, w: CostWeights):
    """Bow-towards-dock penalty, active only beyond ``d_th``."""
    s = np.asarray(states, dtype=float)
    dx, dy, d = _distance(s, dock)
    err = normalize_angle(np.arctan2(dy, dx) - s[..., 2])
    return np.where(d > w.d_th, w.w_dock_heading * err * err, 0.0)


def dock_orientation_cost(states, dock: DockEstimate, w: CostWeights):
    """Alignment with the dock axis, active only inside ``d_th``."""
    s = np.asarray(states, dtype=float)
    _, _, d = _distance(s, dock)
    err = normalize_angle(s[..., 2] - dock.orientation)
    return np.where(d < w.d_th, w.w_goal_ori * err * err, 0.0)


def dock_clearance_cost(min_clearance, w: CostWeights):
    d = np.asarray(min_clearance, dtype=float)
    level = np.where(d < w.d_crit, 10.0, np.where(d < w.d_warn, 5.0, 0.0))
    out = w.w_dock_clear * level
    return float(out) if out.ndim == 0 else out


def entrance_gate_open(current_pos, dock: DockEstimate) -> bool:
    """The entrance term applies while the *current* vessel is away from the entry point."""
    e = np.asarray(dock.entry_point, dtype=float)
    p = np.asarray(current_pos, dtype=float)
    return bool(np.hypot(p[0] - e[0], p[1] - e[1]) > ENTRANCE_GATE)


def dock_entrance_cost(rollout_pos, current_pos, dock: DockEstimate, w: CostWeights, gate: bool | None = None):
    """Pull towards the entry point, gated on the current (not rollout) position.

    ``gate`` overrides the gate decision (the controller latches it shut once
    the entry point has been reached).
    """
    p = np.asarray(rollout_pos, dtype=float)
    e = np.asarray(dock.entry_point, dtype=float)
    if gate is None:
        gate = entrance_gate_open(current_pos, dock)
    dist = np.hypot(p[..., 0] - e[0], p[..., 1] - e[1])
    return w.w_dock_entrance * dist if gate else np.zeros_like(dist)


def min_wall_clearance(states, dock: DockEstimate, params: VesselParams, segment: bool = True):
    """Smallest corner-to-perceived-wall distance per state (inf with no walls)."""
    s = np.asarray(states, dtype=float)
    if not dock.valid or not dock.wall_lines:
        return np.full(s.shape[:-1], np.inf)
    corners = corners_batch(s, params.length, params.width)
    return wall_clearances(corners, list(dock.wall_lines), segment).min(axis=-1)


def total_stage_cost(
    rollout_states,
    current_state,
    dock: DockEstimate | None,
    params: VesselParams,
    w: CostWeights,
    include_velocity: bool = True,
    entrance_gate: bool | None = None,
    segment_clearance: bool = True,
) -> CostBreakdown:
    """All six terms for (..., 6) rollout states.

    Without a valid dock estimate only the velocity term is applied.
    ``include_velocity=False`` gives the terminal-cost variant.
    """
    s = np.asarray(rollout_states, dtype=float)
    zero = np.zeros(s.shape[:-1])
    vel = velocity_cost(s[..., 3:6], w) if include_velocity else zero
    if dock is None or not dock.valid:
        return CostBreakdown(zero, vel, zero, zero, zero, zero)
    cur = np.asarray(current_state.as_array() if hasattr(current_state, "as_array") else current_state, float)
    return CostBreakdown(
        goal=dock_goal_cost(s[..., :2], dock, w),
        velocity=vel,
        heading=dock_heading_cost(s, dock, w),
        orientation=dock_orientation_cost(s, dock, w),
        clearance=dock_clearance_cost(min_wall_clearance(s, dock, params, segment_clearance), w) + zero,
        entrance=dock_entrance_cost(s[..., :2], cur[:2], dock, w, entrance_gate),
    )
