"""Closed-loop docking episodes and scenario suites."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .controller import DockingController
from .cost import TERMS, CostWeights
from .dynamics import ConfigurationError, IntegrationError, ThrustCommand, VesselParams, VesselState, normalize_angle, step
from .mppi import MppiConfig
from .perception.pipeline import DockEstimate, PerceptionConfig, perceive
from .rng import LIDAR, PERCEPTION, substream
from .world import DockGeometry, build_dock, check_collision, simulate_lidar

log = logging.getLogger(__name__)

OUTCOMES = ("docked", "collision", "timeout", "solver-starved")

LOG_COLUMNS = (
    ["t", "x", "y", "psi", "u", "v", "r", "t1", "t2", "t3", "t4"]
    + [f"c_{k}" for k in TERMS]
    + ["c_total", "min_clearance", "zone", "colliding",
       "dock_cx", "dock_cy", "dock_theta", "entry_x", "entry_y", "est_valid", "est_stale",
       "s_min", "ess"]
)


@dataclass(frozen=True)
class DockSpec:
    center: tuple[float, float] = (10.0, -5.0)
    orientation: float = 0.0
    width: float = 4.0
    depth: float = 4.0
    wall_thickness: float = 0.1

    def build(self) -> DockGeometry:
        return build_dock(self.center, self.orientation, self.width, self.depth, self.wall_thickness)


@dataclass(frozen=True)
class LidarConfig:
    noise_sigma: float = 0.1
    max_range: float = 50.0
    n_beams: int = 3600
    period: float = 0.2


@dataclass(frozen=True)
class SuccessCriteria:
    position_tol: float = 0.5
    heading_tol: float = float(np.radians(15.0))
    speed_tol: float = 0.05
    hold_time: float = 2.0


def default_initial_state(scenario_id: int, dock: DockSpec) -> VesselState:
    """Representative start poses: 1 front, 2 side, 3 rear."""
    c = np.asarray(dock.center, dtype=float)
    th = dock.orientation
    ax = np.array([np.cos(th), np.sin(th)])
    lat = np.array([-ax[1], ax[0]])
    if scenario_id == 1:
        # 8 m in front of the opening, facing the dock
        p = c - (0.5 * dock.depth + 8.0) * ax
    elif scenario_id == 2:
        # 8 m to the side of the dock axis, level with the entry area
        p = c - (0.5 * dock.depth + 2.0) * ax + 8.0 * lat
    elif scenario_id == 3:
        # 10 m behind the back wall on the rear quarter; dead astern the goal pulls
        # straight into the back wall, a local minimum no short horizon escapes
        p = c + (0.5 * dock.depth + dock.wall_thickness + 10.0) * ax - 14.0 * lat
    else:
        raise ConfigurationError(f"unknown scenario id {scenario_id}")
    psi = np.arctan2(c[1] - p[1], c[0] - p[0])
    return VesselState(float(p[0]), float(p[1]), float(psi))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: int = 1
    initial_state: VesselState | None = None
    dock: DockSpec = DockSpec()
    vessel: VesselParams = field(default_factory=VesselParams)
    lidar: LidarConfig = LidarConfig()
    perception: PerceptionConfig = PerceptionConfig()
    mppi: MppiConfig = MppiConfig()
    # the hinge form lets the vessel come to rest; see README
    cost: CostWeights = CostWeights(speed_penalty="hinge")
    entrance_latch: bool = True
    time_limit: float = 120.0
    seeds: tuple[int, ...] = (0,)
    success: SuccessCriteria = SuccessCriteria()

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ConfigurationError("time limit must be positive")
        if not self.seeds:
            raise ConfigurationError("at least one seed required")
        if self.scenario_id not in (1, 2, 3):
            raise ConfigurationError(f"unknown scenario id {self.scenario_id}")
        ratio = self.lidar.period / self.mppi.dt
        if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError("lidar period must be a whole multiple of the control dt")

    def start_state(self) -> VesselState:
        if self.initial_state is not None:
            return self.initial_state
        return default_initial_state(self.scenario_id, self.dock)

    def with_scenario(self, scenario_id: int) -> "ScenarioConfig":
        return replace(self, scenario_id=scenario_id, initial_state=None)


@dataclass
class EpisodeResult:
    scenario_id: int
    seed: int
    outcome: str
    final_position_error: float
    final_heading_error: float
    final_speed: float
    path_length: float
    min_clearance: float
    mean_step_compute: float
    sim_time: float
    steps: int


@dataclass
class Episode:
    result: EpisodeResult
    rows: list[list] = field(repr=False)
    dock: DockGeometry = field(repr=False)

    def csv_text(self) -> str:
        return format_log(self.rows)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def format_log(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_log(path) -> dict[str, np.ndarray]:
    """Load a trajectory CSV into column arrays (``zone`` stays a string array)."""
    rows = list(csv.DictReader(Path(path).read_text().splitlines()))
    if not rows:
        raise ValueError(f"empty log {path}")
    out = {}
    for key in rows[0]:
        vals = [r[key] for r in rows]
        out[key] = np.array(vals) if key == "zone" else np.array([float(v) for v in vals])
    return out


def run_episode(config: ScenarioConfig, seed: int) -> Episode:
    """Closed loop: perception every LiDAR period, MPPI every control step.

    Ends on ground-truth collision, on the success thresholds being held for
    ``hold_time``, on solver starvation, or at the time limit.
    """
    dock = config.dock.build()
    params = config.vessel
    dt = config.mppi.dt
    mppi_cfg = replace(config.mppi, seed=seed)
    ctrl = DockingController(params, config.cost, mppi_cfg, config.entrance_latch, config.perception.segment_clearance)
    scan_every = int(round(config.lidar.period / dt))
    hold_steps = int(round(config.success.hold_time / dt))
    max_steps = int(round(config.time_limit / dt))
    true_center = np.asarray(dock.center)

    state = config.start_state()
    estimate: DockEstimate | None = None
    stale = 0
    hold = 0
    path = 0.0
    min_clear = np.inf
    compute = []
    rows = []
    outcome = "timeout"
    k = 0

    def row(cmd, obj, report, diag):
        br = obj.breakdown(state.as_array())
        est = estimate if estimate is not None else DockEstimate.invalid()
        vals = [k * dt, *state.as_array(), *cmd.as_array()]
        vals += [float(getattr(br, name)) for name in TERMS] + [float(br.total)]
        vals += [report.min_clearance, report.zone, report.colliding,
                 est.center[0], est.center[1], est.orientation, est.entry_point[0], est.entry_point[1],
                 est.valid, stale]
        vals += [diag.s_min if diag else float("nan"), diag.ess if diag else float("nan")]
        rows.append(vals)

    while True:
        if k % scan_every == 0:
            scan_idx = k // scan_every
            scan = simulate_lidar(state, dock, config.lidar.noise_sigma, substream(seed, LIDAR, scan_idx),
                                  config.lidar.max_range, config.lidar.n_beams, timestamp=k * dt)
            new = perceive(scan, state, config.perception, substream(seed, PERCEPTION, scan_idx), params)
            # a single-wall reading never replaces one taken with more of the dock in view
            if new.valid and not (new.ambiguous and estimate is not None and not estimate.ambiguous):
                estimate, stale = new, 0
            else:
                stale += 1

        report = check_collision(state, dock, params)
        min_clear = min(min_clear, report.min_clearance)
        zero = ThrustCommand()
        if report.colliding:
            outcome = "collision"
            row(zero, ctrl.objective(state, estimate), report, None)
            break

        pos_err = float(np.linalg.norm(state.position - true_center))
        head_err = abs(normalize_angle(state.psi - dock.orientation))
        ok = (pos_err < config.success.position_tol and head_err < config.success.heading_tol
              and state.speed < config.success.speed_tol)
        hold = hold + 1 if ok else 0
        if hold > hold_steps:
            outcome = "docked"
            row(zero, ctrl.objective(state, estimate), report, None)
            break
        if k >= max_steps:
            outcome = "timeout"
            row(zero, ctrl.objective(state, estimate), report, None)
            break

        cmd, diag, obj = ctrl.control(state, estimate)
        compute.append(diag.compute_time)
        if diag.starved:
            outcome = "solver-starved"
            row(zero, obj, report, diag)
            break
        row(cmd, obj, report, diag)
        try:
            nxt = step(state, cmd, dt, params)
        except IntegrationError:
            log.warning("integration blow-up at t=%.2f (seed %d)", k * dt, seed)
            outcome = "solver-starved"
            break
        path += float(np.linalg.norm(nxt.position - state.position))
        state = nxt
        k += 1

    result = EpisodeResult(
        scenario_id=config.scenario_id,
        seed=seed,
        outcome=outcome,
        final_position_error=float(np.linalg.norm(state.position - true_center)),
        final_heading_error=float(abs(normalize_angle(state.psi - dock.orientation))),
        final_speed=state.speed,
        path_length=path,
        min_clearance=float(min_clear),
        mean_step_compute=float(np.mean(compute)) if compute else 0.0,
        sim_time=k * dt,
        steps=k,
    )
    log.info("scenario %d seed %d: %s after %.1fs", config.scenario_id, seed, outcome, k * dt)
    return Episode(result, rows, dock)


def write_episode(episode: Episode, out_dir, plot: bool = False) -> Path:
    """Write ``scenario<id>_seed<n>.csv`` plus a JSON sidecar (and optional SVG)."""
    from .plot import emit_plot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    r = episode.result
    stem = f"scenario{r.scenario_id}_seed{r.seed}"
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(episode.csv_text())
    d = episode.dock
    meta = {
        "result": asdict(r),
        "dock": {"center": list(d.center), "orientation": d.orientation, "width": d.width,
                 "depth": d.depth, "wall_thickness": d.wall_thickness},
    }
    (out / f"{stem}.json").write_text(json.dumps(meta, indent=2) + "\n")
    if plot:
        (out / f"{stem}.svg").write_text(emit_plot(read_log(csv_path), d))
    return csv_path


def summarize(results: list[EpisodeResult]) -> list[dict]:
    """Per-scenario aggregate rows."""
    table = []
    for sid in sorted({r.scenario_id for r in results}):
        rs = [r for r in results if r.scenario_id == sid]
        counts = Counter(r.outcome for r in rs)
        pos = np.array([r.final_position_error for r in rs])
        head = np.array([r.final_heading_error for r in rs])
        table.append({
            "scenario": sid,
            "episodes": len(rs),
            "success_rate": counts["docked"] / len(rs),
            **{o.replace("-", "_"): counts[o] for o in OUTCOMES},
            "mean_position_error": float(pos.mean()),
            "max_position_error": float(pos.max()),
            "mean_heading_error": float(head.mean()),
            "max_heading_error": float(head.max()),
            "mean_path_length": float(np.mean([r.path_length for r in rs])),
            "min_clearance": float(min(r.min_clearance for r in rs)),
            "mean_step_compute": float(np.mean([r.mean_step_compute for r in rs])),
        })
    return table


def _run_one(args):
    config, seed = args
    t0 = time.perf_counter()
    ep = run_episode(config, seed)
    return ep, time.perf_counter() - t0


def run_suite(configs: list[ScenarioConfig], seeds, out_dir=None, jobs: int = 1, plot: bool = False,
              write_logs: bool = True) -> tuple[list[dict], list[EpisodeResult]]:
    """Run every (config, seed) episode and aggregate; writes ``summary.csv`` when ``out_dir`` is given."""
    tasks = [(c, int(s)) for c in configs for s in seeds]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_one, tasks))
    else:
        done = [_run_one(t) for t in tasks]
    results = [ep.result for ep, _ in done]
    table = summarize(results)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if write_logs:
            for ep, _ in done:
                write_episode(ep, out, plot)
        with open(out / "episodes.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(asdict(results[0]).keys()) + ["wall_clock"], lineterminator="\n")
            w.writeheader()
            for (ep, wall), r in zip(done, results):
                w.writerow({**asdict(r), "wall_clock": wall})
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(table[0].keys()), lineterminator="\n")
            w.writeheader()
            w.writerows(table)
    return table, results
