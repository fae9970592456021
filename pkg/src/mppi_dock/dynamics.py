"""3-DOF surface vessel model (surge, sway, yaw).

State layout used by every array routine here is ``[x, y, psi, u, v, r]``:
world pose followed by body-frame velocities. World frame is x east, y north,
heading counter-clockwise from east. Body frame is x forward, y to port.

Rigid-body equations::

    M nu_dot + C(nu) nu + N nu = tau
    eta_dot = J(psi) nu

with the environmental disturbance fixed at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATE_DIM = 6
N_THRUSTERS = 4


class ConfigurationError(ValueError):
    """Invalid model or scenario parameters, detected before simulation."""


class IntegrationError(ArithmeticError):
    """A step produced a non-finite state (dt too large or bad parameters)."""


def normalize_angle(a):
    """Wrap angle(s) into (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    out = a - 2.0 * np.pi * np.ceil((a - np.pi) / (2.0 * np.pi))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VesselState:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    u: float = 0.0
    v: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError(f"non-finite vessel state: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.u, self.v, self.r], dtype=float)

    @classmethod
    def from_array(cls, a) -> "VesselState":
        a = np.asarray(a, dtype=float)
        return cls(*(float(v) for v in a[:STATE_DIM]))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def speed(self) -> float:
        """Planar speed over ground (surge and sway only)."""
        return float(np.hypot(self.u, self.v))


@dataclass(frozen=True)
class Wrench:
    Fx: float = 0.0
    Fy: float = 0.0
    Mz: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.Fx, self.Fy, self.Mz], dtype=float)


@dataclass(frozen=True)
class ThrustCommand:
    t1: float = 0.0
    t2: float = 0.0
    t3: float = 0.0
    t4: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3, self.t4], dtype=float)

    @classmethod
    def from_array(cls, a) -> "ThrustCommand":
        return cls(*(float(v) for v in np.asarray(a, dtype=float)[:N_THRUSTERS]))

    def clamped(self, t_max: float) -> "ThrustCommand":
        return ThrustCommand.from_array(np.clip(self.as_array(), -t_max, t_max))


def default_allocation(length: float, width: float) -> np.ndarray:
    """Thruster allocation for the symmetric four-thruster layout.

    Thrusters 1 and 2 push along the bow axis at lateral offsets +W/2 and
    -W/2; thrusters 3 and 4 push sideways at longitudinal offsets +L/2 and
    -L/2. Yaw moment of a force (Fx, Fy) applied at (px, py) is px*Fy - py*Fx.
    """
    hw, hl = 0.5 * width, 0.5 * length
    return np.array(
        [
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0],
            [-hw, hw, hl, -hl],
        ]
    )


@dataclass(frozen=True, eq=False)
class VesselParams:
    """Mass, damping, allocation and footprint of the vessel.

    ``M`` lumps rigid-body and added mass. ``N`` is linear damping. All
    matrices are validated once here so the integrator never meets a
    singular or non-dissipative model at runtime.
    """

    M: np.ndarray = field(default_factory=lambda: np.diag([25.0, 30.0, 6.0]))
    N: np.ndarray = field(default_factory=lambda: np.diag([8.0, 10.0, 4.0]))
    length: float = 2.0
    width: float = 1.0
    t_max: float = 20.0
    B: np.ndarray | None = None

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        N = np.array(self.N, dtype=float)
        if M.shape != (3, 3) or N.shape != (3, 3):
            raise ConfigurationError("M and N must be 3x3")
        if not np.allclose(M, M.T, atol=1e-12):
            raise ConfigurationError("mass matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(M)) <= 0:
            raise ConfigurationError("mass matrix must be positive definite")
        if np.min(np.linalg.eigvalsh(0.5 * (N + N.T))) <= 0:
            raise ConfigurationError("damping matrix must have a positive-definite symmetric part")
        if self.length <= 0 or self.width <= 0 or self.t_max <= 0:
            raise ConfigurationError("footprint and thrust limit must be positive")
        B = default_allocation(self.length, self.width) if self.B is None else np.array(self.B, dtype=float)
        if B.shape != (3, N_THRUSTERS) or np.linalg.matrix_rank(B) != 3:
            raise ConfigurationError("allocation matrix must be 3x4 with rank 3")
        for name, val in (("M", M), ("N", N), ("B", B)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        Minv = np.linalg.inv(M)
        Minv.setflags(write=False)
        object.__setattr__(self, "M_inv", Minv)


def rotation_matrix(psi: float) -> np.ndarray:
    """J(psi): body velocities to world pose rates."""
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def coriolis_matrix(nu, M: np.ndarray) -> np.ndarray:
    """Rigid-body Coriolis-centripetal matrix C(nu), skew-symmetric."""
    u, v, r = (float(x) for x in nu)
    m11, m22, m23 = M[0, 0], M[1, 1], M[1, 2]
    a = m22 * v + m23 * r
    b = m11 * u
    return np.array([[0.0, 0.0, -a], [0.0, 0.0, b], [a, -b, 0.0]])


def thrust_to_wrench(cmd: ThrustCommand, params: VesselParams) -> Wrench:
    return Wrench(*(params.B @ cmd.as_array()))


def _derivative_soa(x, tau, params: VesselParams, out=None):
    """State derivative on per-component rows.

    ``x`` is (6, ...) with rows (x, y, psi, u, v, r) and ``tau`` (3, ...).
    Every operation is elementwise, so each sample's arithmetic does not
    depend on the batch shape. Exactly-zero model coefficients are skipped,
    which leaves finite results bit-identical to the full expression.
    """
    psi, u, v, r = x[2], x[3], x[4], x[5]
    M, N, Mi = params.M, params.N, params.M_inv
    if out is None:
        out = np.empty(np.broadcast_shapes(x.shape, (STATE_DIM,) + tau.shape[1:]))
    c, s = np.cos(psi), np.sin(psi)
    a = _lin(((M[1, 1], v), (M[1, 2], r)))
    b = M[0, 0] * u
    nu = (u, v, r)
    # tau - C(nu) nu - N nu
    f = (
        tau[0] + a * r - _lin(zip(N[0], nu)),
        tau[1] - b * r - _lin(zip(N[1], nu)),
        tau[2] - (a * u - b * v) - _lin(zip(N[2], nu)),
    )
    out[0] = c * u - s * v
    out[1] = s * u + c * v
    out[2] = r
    for i in range(3):
        out[3 + i] = _lin(zip(Mi[i], f))
    return out


def _lin(terms):
    """sum(c * x) over the pairs with non-zero c, left to right."""
    acc = None
    for coef, val in terms:
        if coef == 0.0:
            continue
        term = coef * val
        acc = term if acc is None else acc + term
    return 0.0 if acc is None else acc


def _derivative(states: np.ndarray, tau: np.ndarray, params: VesselParams) -> np.ndarray:
    x = np.moveaxis(np.asarray(states, dtype=float), -1, 0)
    t = np.moveaxis(np.asarray(tau, dtype=float), -1, 0)
    return np.moveaxis(_derivative_soa(x, t, params), 0, -1)


def dynamics_derivative(state: VesselState, tau: Wrench, params: VesselParams) -> np.ndarray:
    """(eta_dot, nu_dot) as a 6-vector."""
    return _derivative(state.as_array(), tau.as_array(), params)


def wrench_batch(thrusts: np.ndarray, params: VesselParams) -> np.ndarray:
    """Map (..., 4) thrusts to (..., 3) wrenches."""
    t = np.moveaxis(np.asarray(thrusts, dtype=float), -1, 0)
    return np.moveaxis(_wrench_soa(t, params), 0, -1)


def _wrench_soa(t, params: VesselParams):
    # rank 3 guarantees every row has a non-zero entry
    return np.stack([_lin(zip(row, t)) for row in params.B])


def rk4_batch(states: np.ndarray, thrusts: np.ndarray, dt: float, params: VesselParams) -> np.ndarray:
    """One RK4 step for a batch of states under zero-order-hold thrusts.

    ``states`` is (..., 6), ``thrusts`` (..., 4). Non-finite results are
    returned as-is; callers decide how to treat them.
    """
    x0 = np.ascontiguousarray(np.moveaxis(np.asarray(states, dtype=float), -1, 0))
    t = np.ascontiguousarray(np.moveaxis(np.asarray(thrusts, dtype=float), -1, 0))
    return np.moveaxis(rk4_soa(x0, _wrench_soa(t, params), dt, params), 0, -1)


def rk4_soa(x0: np.ndarray, tau: np.ndarray, dt: float, params: VesselParams) -> np.ndarray:
    """RK4 step on row-major (6, ...) states and (3, ...) wrenches."""
    h = 0.5 * dt
    k1 = _derivative_soa(x0, tau, params)
    k2 = _derivative_soa(x0 + h * k1, tau, params)
    k3 = _derivative_soa(x0 + h * k2, tau, params)
    k4 = _derivative_soa(x0 + dt * k3, tau, params)
    nxt = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    nxt[2] = normalize_angle(nxt[2])
    return nxt


def step(state: VesselState, cmd: ThrustCommand, dt: float, params: VesselParams) -> VesselState:
    """Advance one RK4 step; thrusts are clamped to the actuator limit."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    thrusts = np.clip(cmd.as_array(), -params.t_max, params.t_max)
    with np.errstate(over="ignore", invalid="ignore"):
        nxt = rk4_batch(state.as_array(), thrusts, dt, params)
    if not np.all(np.isfinite(nxt)):
        raise IntegrationError(f"non-finite state after step from {state} (dt={dt})")
    return VesselState.from_array(nxt)


def kinetic_energy(state: VesselState, params: VesselParams) -> float:
    nu = state.as_array()[3:]
    return 0.5 * float(nu @ params.M @ nu)
