"""Docking controller: MPPI over the vessel model with the docking cost."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import ENTRANCE_GATE, CostWeights, entrance_gate_open, total_stage_cost
from .dynamics import N_THRUSTERS, ThrustCommand, VesselParams, VesselState, rk4_batch
from .mppi import MppiConfig, MppiResult, MppiSolver, RolloutResult, rollout
from .perception.pipeline import DockEstimate


@dataclass
class DockingObjective:
    """Stage and terminal costs for one control step.

    Holds the dock snapshot and the current vessel state the entrance gate
    is evaluated on; rebuilt every control step.
    """

    params: VesselParams
    weights: CostWeights
    dock: DockEstimate | None
    current: VesselState
    entrance_gate: bool | None = None
    segment_clearance: bool = True

    def breakdown(self, states, include_velocity: bool = True):
        return total_stage_cost(states, self.current, self.dock, self.params, self.weights,
                                include_velocity, self.entrance_gate, self.segment_clearance)

    def stage(self, states, controls=None):
        return self.breakdown(states).total

    def terminal(self, states):
        # terminal cost: stage cost without the velocity term
        return self.breakdown(states, include_velocity=False).total


def vessel_step_fn(params: VesselParams, dt: float):
    def step_fn(states, thrusts):
        return rk4_batch(states, thrusts, dt, params)

    return step_fn


def docking_rollout(x0: VesselState, sequence, objective: DockingObjective, dt: float) -> RolloutResult:
    """One sequence through the vessel model, with per-term cost sums."""
    res = rollout(x0.as_array(), sequence, vessel_step_fn(objective.params, dt), objective.stage, objective.terminal)
    traj = res.trajectory
    n = min(len(traj), len(sequence) + 1)
    stage = objective.breakdown(traj[: min(n, len(sequence))])
    sums = {k: float(np.sum(v)) for k, v in stage.as_dict().items()}
    if len(traj) == len(sequence) + 1:
        term = objective.breakdown(traj[-1], include_velocity=False)
        for k, v in term.as_dict().items():
            sums[k] += float(v)
    res.breakdown = sums
    return res


def _in_berth_corridor(pos, dock: DockEstimate) -> bool:
    """Between the entry point and the centre, within the gate radius of the axis.

    A vessel found here has passed the entry point without ever being logged
    near it (e.g. it started in the berth).
    """
    e = np.asarray(dock.entry_point, dtype=float)
    ax = np.asarray(dock.center, dtype=float) - e
    length = float(np.hypot(*ax))
    rel = np.asarray(pos, dtype=float) - e
    along = float(rel @ ax) / length
    across = abs(float(rel[0] * ax[1] - rel[1] * ax[0])) / length
    return 0.0 <= along <= length and across <= ENTRANCE_GATE


class DockingController:
    def __init__(
        self,
        params: VesselParams,
        weights: CostWeights,
        config: MppiConfig,
        latch_entrance: bool = True,
        segment_clearance: bool = True,
    ):
        self.params = params
        self.weights = weights
        self.config = config
        self.latch_entrance = latch_entrance
        self.segment_clearance = segment_clearance
        self.solver = MppiSolver(config, N_THRUSTERS, vessel_step_fn(params, config.dt),
                                 -params.t_max, params.t_max)
        self.entry_reached = False

    def entrance_gate(self, state: VesselState, dock: DockEstimate | None) -> bool | None:
        if dock is None or not dock.valid:
            return None
        literal = entrance_gate_open(state.position, dock)
        if not literal or _in_berth_corridor(state.position, dock):
            self.entry_reached = True
        if self.latch_entrance:
            return literal and not self.entry_reached
        return literal

    def objective(self, state: VesselState, dock: DockEstimate | None) -> DockingObjective:
        return DockingObjective(self.params, self.weights, dock, state, self.entrance_gate(state, dock),
                                self.segment_clearance)

    def control(self, state: VesselState, dock: DockEstimate | None) -> tuple[ThrustCommand, MppiResult, DockingObjective]:
        obj = self.objective(state, dock)
        res = self.solver.solve(state.as_array(), obj.stage, obj.terminal)
        return ThrustCommand.from_array(res.u0), res, obj
