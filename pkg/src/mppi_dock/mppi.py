"""Model predictive path integral control.

The solver is generic over the dynamics and the cost: it only needs a batched
step function and batched stage/terminal costs. Noise for a control step is
drawn in one block from a substream keyed by (seed, step index), and sample k
always reads row k of that block, so results do not depend on how the K
rollouts are split across workers.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import MPPI, substream

COST_SURROGATE = float(np.finfo(float).max)

StepFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
StageCostFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
TerminalCostFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MppiConfig:
    K: int = 512
    T: int = 40
    lam: float = 0.5
    # diagonal of the sampling covariance, per control channel [N^2]
    sigma: tuple[float, ...] = (4.0, 4.0, 4.0, 4.0)
    exploration_scale: float = 1.0
    dt: float = 0.05
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.K < 1 or self.T < 1:
            raise ValueError("K and T must be at least 1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if any(s <= 0 for s in self.sigma):
            raise ValueError("sampling variances must be positive")
        if self.exploration_scale < 0 or not self.dt > 0 or self.workers < 1:
            raise ValueError("invalid exploration_scale, dt or workers")


@dataclass
class RolloutResult:
    trajectory: np.ndarray
    cost: float
    breakdown: dict | None = None


@dataclass
class MppiResult:
    u0: np.ndarray
    sequence: np.ndarray
    s_min: float
    ess: float
    best_index: int
    starved: bool = False
    compute_time: float = 0.0
    weights: np.ndarray = field(default=None, repr=False)


def sample_perturbations(
    nominal: np.ndarray,
    config: MppiConfig,
    rng: np.random.Generator,
    u_min: float | np.ndarray = -np.inf,
    u_max: float | np.ndarray = np.inf,
) -> np.ndarray:
    """K clamped copies of ``nominal`` (T, m) plus N(0, scale * Sigma) noise; returns (K, T, m)."""
    nominal = np.asarray(nominal, dtype=float)
    std = np.sqrt(config.exploration_scale * np.asarray(config.sigma, dtype=float))
    noise = rng.standard_normal((config.K,) + nominal.shape)
    return np.clip(nominal[None] + noise * std, u_min, u_max)


def compute_weights(costs, lam: float) -> np.ndarray:
    """Normalised exp(-(S_k - S_min) / lam) importance weights."""
    s = np.asarray(costs, dtype=float)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    # surrogate costs overflow to inf here and get weight exactly 0
    with np.errstate(over="ignore"):
        e = np.exp(-(s - s.min()) / lam)
    return e / e.sum()


def rollout_batch(
    x0: np.ndarray,
    controls: np.ndarray,
    step_fn: StepFn,
    stage_cost: StageCostFn,
    terminal_cost: TerminalCostFn,
) -> tuple[np.ndarray, np.ndarray]:
    """Roll out (K, T, m) control sequences from ``x0``.

    Returns states (T+1, K, n) and costs (K,). The cost is the sum of stage
    costs at x_0..x_{T-1} plus the terminal cost at x_T, accumulated in time
    order; samples whose trajectory or cost goes non-finite get
    ``COST_SURROGATE``.
    """
    K, T, _ = controls.shape
    x0 = np.asarray(x0, dtype=float)
    states = np.empty((T + 1, K, x0.shape[-1]))
    states[0] = x0
    with np.errstate(all="ignore"):
        for t in range(T):
            states[t + 1] = step_fn(states[t], controls[:, t, :])
        stage = stage_cost(states[:-1], np.swapaxes(controls, 0, 1))
        total = stage[0].copy()
        for t in range(1, T):
            total += stage[t]
        total += terminal_cost(states[-1])
    bad = ~np.isfinite(total) | ~np.all(np.isfinite(states), axis=(0, 2))
    total[bad] = COST_SURROGATE
    return states, total


def rollout(x0, sequence, step_fn: StepFn, stage_cost: StageCostFn, terminal_cost: TerminalCostFn) -> RolloutResult:
    """Single-sequence rollout; a diverging trajectory is truncated at its last finite state."""
    seq = np.asarray(sequence, dtype=float)[None]
    states, cost = rollout_batch(x0, seq, step_fn, stage_cost, terminal_cost)
    traj = states[:, 0, :]
    finite = np.all(np.isfinite(traj), axis=1)
    if not finite.all():
        traj = traj[: int(np.argmin(finite))]
    return RolloutResult(traj, float(cost[0]))


class MppiSolver:
    """Receding-horizon MPPI with a warm-started nominal sequence."""

    def __init__(
        self,
        config: MppiConfig,
        control_dim: int,
        step_fn: StepFn,
        u_min: float | np.ndarray = -np.inf,
        u_max: float | np.ndarray = np.inf,
    ):
        self.config = config
        self.control_dim = control_dim
        self.step_fn = step_fn
        self.u_min = u_min
        self.u_max = u_max
        self.nominal = np.zeros((config.T, control_dim))
        self.step_index = 0

    def reset(self):
        self.nominal = np.zeros((self.config.T, self.control_dim))
        self.step_index = 0

    def _evaluate(self, x0, samples, stage_cost, terminal_cost):
        K, workers = self.config.K, self.config.workers
        if workers == 1:
            return rollout_batch(x0, samples, self.step_fn, stage_cost, terminal_cost)[1]
        bounds = np.linspace(0, K, min(workers, K) + 1).astype(int)
        chunks = [samples[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: rollout_batch(x0, c, self.step_fn, stage_cost, terminal_cost)[1], chunks))
        return np.concatenate(parts)

    def solve(self, x0, stage_cost: StageCostFn, terminal_cost: TerminalCostFn) -> MppiResult:
        t0 = time.perf_counter()
        cfg = self.config
        rng = substream(cfg.seed, MPPI, self.step_index)
        self.step_index += 1
        samples = sample_perturbations(self.nominal, cfg, rng, self.u_min, self.u_max)
        costs = self._evaluate(x0, samples, stage_cost, terminal_cost)

        if np.all(costs >= COST_SURROGATE):
            self.nominal = np.zeros_like(self.nominal)
            return MppiResult(np.zeros(self.control_dim), self.nominal.copy(), COST_SURROGATE, 0.0, -1,
                              starved=True, compute_time=time.perf_counter() - t0)

        w = compute_weights(costs, cfg.lam)
        best = int(np.argmin(costs))
        # averaging offsets from the best sample keeps degenerate cases exact
        seq = samples[best] + np.einsum("k,ktm->tm", w, samples - samples[best])
        seq = np.clip(seq, self.u_min, self.u_max)
        self.nominal = np.concatenate([seq[1:], seq[-1:]], axis=0)
        return MppiResult(
            u0=seq[0].copy(),
            sequence=seq,
            s_min=float(costs.min()),
            ess=float(1.0 / np.sum(w * w)),
            best_index=best,
            compute_time=time.perf_counter() - t0,
            weights=w,
        )
