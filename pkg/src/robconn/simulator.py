"""Closed-loop simulation of x_i' = u_i with runtime monitors.

``run`` integrates with classical RK4 at a fixed step and records one row
per step: positions, energy V, the largest edge length, boundary-layer
depths m_i and their maximum m, plus connectivity/invariance flags. A run
stops at the first row that breaks either flag.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .controllers import ControllerParams, DomainParams, PowerShape, repulsive_fields
from .errors import ConfigInvalid, NumericalBlowup, OutsideDomainError
from .graph import AgentNetwork, as_state, edge_lengths
from .potentials import LinearPotential, PiecewiseNLPotential, Potential, TablePotential, energy_gradient

DISTURBANCE_KINDS = ("zero", "constant", "sinusoid", "random", "adversarial")
CONNECTIVITY_RTOL = 1e-9
ICH_RTOL = 1e-12


@dataclass(frozen=True)
class DisturbanceSpec:
    """Free input v(t). ``magnitude=None`` means "use delta"."""

    kind: str = "zero"
    magnitude: float | None = None
    seed: int = 0
    frequency: float = 1.0
    hold: float = 0.1
    direction: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}; expected one of {DISTURBANCE_KINDS}")
        if self.hold <= 0:
            raise ValueError("hold must be positive")


def _unit_rows(rng, N, n):
    v = rng.standard_normal((N, n))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.where(norms > 0, norms, 1.0)


class Disturbance:
    """A realized disturbance: deterministic in (t, x) given the spec.

    ``vec`` holds constant vectors (constant kind) or unit directions
    (sinusoid); ``table`` holds piecewise-constant samples (random kind).
    """

    def __init__(self, spec: DisturbanceSpec, n_agents: int, dim: int, delta: float, horizon: float):
        mag = delta if spec.magnitude is None else float(spec.magnitude)
        if mag < 0 or mag > delta * (1 + 1e-12):
            raise ConfigInvalid(f"disturbance magnitude {mag} outside [0, delta = {delta}]")
        self.spec = spec
        self.magnitude = mag
        rng = np.random.default_rng(spec.seed)
        self.vec = np.zeros((n_agents, dim))
        self.phases = np.zeros(n_agents)
        self.omega = 2 * np.pi * spec.frequency
        self.table = np.zeros((1, n_agents, dim))
        if spec.kind == "constant":
            if spec.direction is not None:
                d = np.asarray(spec.direction, dtype=float)
                if d.shape != (dim,) or not np.linalg.norm(d) > 0:
                    raise ConfigInvalid(f"direction must be a nonzero vector of length {dim}")
                self.vec = np.tile(d / np.linalg.norm(d), (n_agents, 1)) * mag
            else:
                self.vec = _unit_rows(rng, n_agents, dim) * mag
        elif spec.kind == "sinusoid":
            self.vec = _unit_rows(rng, n_agents, dim)
            self.phases = rng.uniform(0, 2 * np.pi, n_agents)
        elif spec.kind == "random":
            blocks = int(math.floor(max(horizon, 0.0) / spec.hold)) + 2
            dirs = _unit_rows(rng, blocks * n_agents, dim)
            radii = mag * rng.random(blocks * n_agents) ** (1.0 / dim)
            self.table = (dirs * radii[:, None]).reshape(blocks, n_agents, dim)

    @property
    def code(self) -> int:
        return DISTURBANCE_KINDS.index(self.spec.kind)

    def __call__(self, t: float, x: np.ndarray, grad: np.ndarray | None = None) -> np.ndarray:
        kind = self.spec.kind
        if kind == "zero":
            return np.zeros_like(x)
        if kind == "constant":
            return self.vec.copy()
        if kind == "sinusoid":
            return (self.magnitude * np.sin(self.omega * t + self.phases))[:, None] * self.vec
        if kind == "random":
            idx = min(max(int(math.floor(t / self.spec.hold)), 0), len(self.table) - 1)
            return self.table[idx].copy()
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        return np.where(norms > 0, self.magnitude * grad / np.where(norms > 0, norms, 1.0), 0.0)


def adversarial_disturbance(x, net: AgentNetwork, pot: Potential, delta: float) -> np.ndarray:
    """delta times the unit steepest-ascent direction of V for every agent
    (zero where the gradient vanishes)."""
    grad = energy_gradient(pot, x, net)
    norms = np.linalg.norm(grad, axis=1, keepdims=True)
    return np.where(norms > 0, delta * grad / np.where(norms > 0, norms, 1.0), 0.0)


@dataclass(frozen=True)
class SimConfig:
    net: AgentNetwork
    pot: Potential
    params: ControllerParams
    x0: np.ndarray
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    t_end: float = 10.0
    dt: float | None = None
    domain: DomainParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "x0", as_state(self.x0, self.net.n_agents))

    @property
    def dim(self) -> int:
        return self.x0.shape[1]

    def speed_bound(self) -> float:
        R, delta = self.params.R, self.params.delta
        deg = int(self.net.degrees.max()) if self.net.n_edges else 0
        r_max = float(self.pot.r(min(R, self.pot.s_max)))
        gain = self.domain.c * delta if self.domain is not None else 0.0
        return deg * r_max * R + delta + gain

    def max_dt(self) -> float:
        sb = self.speed_bound()
        return 0.01 * self.params.R / sb if sb > 0 else 0.01 * self.params.R

    @property
    def step_size(self) -> float:
        return self.max_dt() if self.dt is None else float(self.dt)

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.step_size * (1 + 1e-12)))

    def validate(self) -> None:
        cp = self.params
        if self.t_end < 0:
            raise ConfigInvalid("t_end must be >= 0")
        if self.dt is not None and self.dt <= 0:
            raise ConfigInvalid("dt must be positive")
        if self.dt is not None and self.dt > self.max_dt() * (1 + 1e-12):
            raise ConfigInvalid(f"dt = {self.dt} exceeds the speed-bound limit {self.max_dt():.6g}")
        if not 0 < cp.R_tilde <= cp.R:
            raise ConfigInvalid(f"need 0 < R_tilde <= R, got R_tilde={cp.R_tilde}, R={cp.R}")
        if cp.delta < 0:
            raise ConfigInvalid("delta must be >= 0")
        if not np.all(np.isfinite(self.x0)):
            raise ConfigInvalid("initial positions must be finite")
        lengths = edge_lengths(self.net, self.x0)
        if lengths.size and lengths.max() > cp.R_tilde * (1 + ICH_RTOL):
            raise ConfigInvalid(
                f"initial max edge distance {lengths.max():.6g} exceeds R_tilde = {cp.R_tilde:.6g}")
        if self.domain is not None:
            norms = np.linalg.norm(self.x0, axis=1)
            limit = self.domain.inner_radius
            if norms.max() > limit * (1 + ICH_RTOL):
                raise ConfigInvalid(f"initial |x_i| = {norms.max():.6g} outside the inner ball radius {limit:.6g}")
        if isinstance(self.pot, PiecewiseNLPotential) and (self.pot.R_tilde, self.pot.R) != (cp.R_tilde, cp.R):
            raise ConfigInvalid("piecewise weight breakpoints must equal (R_tilde, R)")
        Disturbance(self.disturbance, self.net.n_agents, self.dim, cp.delta, self.t_end)


class _NumpyClosedLoop:
    def __init__(self, config: SimConfig):
        self.config = config
        self.dist = Disturbance(config.disturbance, config.net.n_agents, config.dim,
                                config.params.delta, config.t_end)

    def __call__(self, t, x):
        cfg = self.config
        grad = energy_gradient(cfg.pot, x, cfg.net)
        u = -grad
        if cfg.domain is not None:
            u = u + repulsive_fields(cfg.domain, cfg.params.delta, x, clip=True)
        return u + self.dist(t, x, grad)


def _rk4(f, t, x, dt):
    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(config: SimConfig, x, t: float, dt: float, field=None) -> np.ndarray:
    """One RK4 step of the closed loop; the disturbance is sampled at the
    stage times."""
    x = as_state(x, config.net.n_agents)
    if config.domain is not None and np.any(np.linalg.norm(x, axis=1) >= config.domain.radius):
        raise OutsideDomainError("an agent is not strictly inside the domain")
    f = _NumpyClosedLoop(config) if field is None else field
    out = _rk4(f, t, x, dt)
    if not np.all(np.isfinite(out)) or np.any(np.abs(out) > K.BLOWUP):
        raise NumericalBlowup(f"state left the finite range at t = {t + dt}")
    return out


@dataclass
class SimTrace:
    t: np.ndarray
    positions: np.ndarray  # (T, N, n)
    energy: np.ndarray
    dx_inf: np.ndarray
    margins: np.ndarray  # (T, N); nan without a domain
    m: np.ndarray
    connected: np.ndarray
    invariant: np.ndarray
    status: str = "ok"

    def __len__(self):
        return len(self.t)

    @property
    def violation_rows(self) -> np.ndarray:
        return np.flatnonzero(~(self.connected & self.invariant))

    def summary(self) -> dict:
        return {
            "rows": len(self),
            "status": self.status,
            "final_V": float(self.energy[-1]),
            "max_dx_inf": float(self.dx_inf.max()),
            "max_m": float(np.nanmax(self.m)) if np.any(np.isfinite(self.m)) else float("nan"),
            "violations": int(len(self.violation_rows)),
        }

    def header(self) -> list[str]:
        _, N, n = self.positions.shape
        cols = ["t"] + [f"x_{i + 1}_{k + 1}" for i in range(N) for k in range(n)]
        cols += ["V", "dx_inf"] + [f"m_{i + 1}" for i in range(N)] + ["m", "connected", "invariant"]
        return cols

    def to_csv(self, path) -> None:
        T, N, n = self.positions.shape
        flat = self.positions.reshape(T, N * n)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for k in range(T):
                row = [self.t[k], *flat[k], self.energy[k], self.dx_inf[k], *self.margins[k], self.m[k]]
                w.writerow([f"{v:.17g}" for v in row] + [int(self.connected[k]), int(self.invariant[k])])


def monitors(config: SimConfig, t: np.ndarray, positions: np.ndarray, status: str = "ok") -> SimTrace:
    net, cp, dom = config.net, config.params, config.domain
    lengths = edge_lengths(net, positions)
    if net.n_edges:
        dx_inf = lengths.max(axis=1)
        energy = config.pot.P(lengths).sum(axis=1)
    else:
        dx_inf = np.zeros(len(t))
        energy = np.zeros(len(t))
    norms = np.linalg.norm(positions, axis=2)
    if dom is not None:
        margins = np.maximum(0.0, dom.epsilon + norms - dom.radius)
        m = margins.max(axis=1)
        invariant = np.all(norms < dom.radius, axis=1)
    else:
        margins = np.full(norms.shape, np.nan)
        m = np.full(len(t), np.nan)
        invariant = np.ones(len(t), dtype=bool)
    connected = dx_inf <= cp.R * (1 + CONNECTIVITY_RTOL)
    return SimTrace(t, positions, energy, dx_inf, margins, m, connected, invariant, status)


_STATUS = {K.STATUS_OK: "ok", K.STATUS_DISCONNECTED: "connectivity_violation",
           K.STATUS_LEFT_DOMAIN: "invariance_violation"}


def _kernel_args(config: SimConfig, dist: Disturbance):
    pot, cp, dom = config.pot, config.params, config.domain
    empty = np.zeros(2)
    if isinstance(pot, LinearPotential):
        pot_args = (K.POT_LINEAR, 1.0, 1.0, empty, empty)
    elif isinstance(pot, PiecewiseNLPotential):
        pot_args = (K.POT_NL, pot.R_tilde, pot.R, empty, empty)
    elif isinstance(pot, TablePotential):
        pot_args = (K.POT_TABLE, 1.0, 1.0, pot.s, pot.values)
    else:
        return None
    if dom is None:
        dom_args = (False, 1.0, 1.0, 0.0, 1.0)
    elif isinstance(dom.h, PowerShape):
        dom_args = (True, dom.radius, dom.epsilon, dom.c * cp.delta, dom.h.exponent)
    else:
        return None
    dist_args = (dist.code, dist.magnitude, dist.vec, dist.phases, dist.omega, dist.table, dist.spec.hold)
    return pot_args, dom_args, dist_args


def _integrate_numpy(config: SimConfig, n_steps: int, dt: float):
    f = _NumpyClosedLoop(config)
    net, cp, dom = config.net, config.params, config.domain
    traj = [config.x0.copy()]
    x = config.x0.copy()
    status = K.STATUS_OK
    for k in range(n_steps):
        x = _rk4(f, k * dt, x, dt)
        traj.append(x)
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > K.BLOWUP):
            status = K.STATUS_BLOWUP
        elif net.n_edges and edge_lengths(net, x).max() > cp.R * (1 + CONNECTIVITY_RTOL):
            status = K.STATUS_DISCONNECTED
        elif dom is not None and np.any(np.linalg.norm(x, axis=1) >= dom.radius):
            status = K.STATUS_LEFT_DOMAIN
        if status != K.STATUS_OK:
            break
    return np.array(traj), status


def run(config: SimConfig, engine: str = "auto") -> SimTrace:
    """Integrate from 0 to ``t_end``; ``engine`` is ``"compiled"``,
    ``"numpy"`` or ``"auto"`` (compiled when the configuration allows it)."""
    config.validate()
    dt = config.step_size
    n_steps = config.n_steps
    args = None
    if engine in ("auto", "compiled"):
        dist = Disturbance(config.disturbance, config.net.n_agents, config.dim, config.params.delta, config.t_end)
        args = _kernel_args(config, dist)
        if args is None and engine == "compiled":
            raise ValueError("configuration has a custom potential or shape function; use engine='numpy'")
    if args is not None:
        pot_args, dom_args, dist_args = args
        traj, rows, status = K.integrate(
            config.x0.copy(), config.net.tails, config.net.heads, *pot_args, *dom_args, *dist_args,
            0.0, dt, n_steps, config.params.R * (1 + CONNECTIVITY_RTOL))
        traj = traj[:rows]
    elif engine in ("auto", "numpy"):
        traj, status = _integrate_numpy(config, n_steps, dt)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if status == K.STATUS_BLOWUP:
        raise NumericalBlowup(f"state exceeded {K.BLOWUP:g} after {len(traj) - 1} steps")
    t = dt * np.arange(len(traj))
    return monitors(config, t, traj, _STATUS[status])


def energy_rate(config: SimConfig, t: float, x) -> float:
    """dV/dt along the closed loop at (t, x): grad V . u, disturbance included."""
    f = _NumpyClosedLoop(config)
    x = as_state(x, config.net.n_agents)
    grad = energy_gradient(config.pot, x, config.net)
    return float(np.sum(grad * f(t, x)))


def ich_initial_state(net: AgentNetwork, dim: int, R_tilde: float, rng: np.random.Generator,
                      fill: float = 1.0, domain: DomainParams | None = None) -> np.ndarray:
    """Random positions whose largest edge length is ``fill * R_tilde``.

    With a domain, the formation is translated to a random point such that
    every agent lies in the closed inner ball.
    """
    if not 0 < fill <= 1:
        raise ValueError("fill must lie in (0, 1]")
    x = rng.standard_normal((net.n_agents, dim))
    if net.n_edges:
        x *= fill * R_tilde / max(edge_lengths(net, x).max(), 1e-300)
    x -= x.mean(axis=0)
    if domain is not None:
        spread = np.linalg.norm(x, axis=1).max()
        room = domain.inner_radius - spread
        if room < 0:
            raise ConfigInvalid("formation does not fit in the inner ball")
        u = rng.standard_normal(dim)
        x += u / np.linalg.norm(u) * room * rng.random()
    return x
