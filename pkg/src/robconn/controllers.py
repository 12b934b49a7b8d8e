"""Feedback laws and their parameter design.

The connectivity feedback is ``u_i = -sum_j r(|x_i - x_j|)(x_i - x_j) + v_i``
and stays connected for every free input with ``|v_i| <= delta``. Inside a
ball of radius ``radius`` a boundary-layer field ``g`` is added so that the
agents also never leave the ball.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DisconnectedError, OutsideDomainError
from .graph import CONNECTED_TOL, AgentNetwork, as_state, laplacian, spectral_summary
from .potentials import LinearPotential, PiecewiseNLPotential, Potential, energy_gradient

CASES = ("linear", "piecewise_nl", "custom")
EQUALITY_RTOL = 1e-10


@dataclass(frozen=True)
class ControllerParams:
    R: float
    R_tilde: float
    K: float
    delta: float
    case: str = "linear"

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")


@dataclass(frozen=True)
class PowerShape:
    """h(s) = s**exponent on [0, 1]; exponent 1 is the identity."""

    exponent: float = 1.0

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")

    def __call__(self, s):
        return np.asarray(s, dtype=float) ** self.exponent

    @property
    def is_identity(self) -> bool:
        return self.exponent == 1.0


def h_inverse(h: Callable, y: float, tol: float = 1e-12) -> float:
    if getattr(h, "is_identity", False):
        return float(y)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(h(mid)) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DomainParams:
    radius: float
    epsilon: float
    c: float = 2.0
    h: Callable = field(default_factory=PowerShape)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not 0 < self.epsilon < self.radius:
            raise ValueError(f"epsilon must lie in (0, {self.radius})")
        if self.c <= 1:
            raise ValueError("gain factor c must exceed 1")

    @property
    def c_tilde(self) -> float:
        """The constant with h(1/c~) = 1/c; trajectories stay within
        ``radius - epsilon + epsilon / c_tilde`` of the origin."""
        return 1.0 / h_inverse(self.h, 1.0 / self.c)

    @property
    def inner_radius(self) -> float:
        return self.radius - self.epsilon


def compute_K(net: AgentNetwork) -> float:
    summary = spectral_summary(laplacian(net))
    if summary.lambda2 <= CONNECTED_TOL:
        raise DisconnectedError(f"lambda_2 = {summary.lambda2:.3e}; graph is disconnected")
    N = net.n_agents
    return float(2.0 * np.sqrt(N * (N - 1)) * summary.op_norm_DT / summary.lambda2**2)


def max_R_tilde(case: str, R: float, M: int, pot: Potential | None = None) -> float:
    """Largest initial edge length allowed by M P(R~) <= P(R)."""
    if M < 1 or R <= 0:
        raise ValueError("need M >= 1 and R > 0")
    if case == "linear":
        return R / np.sqrt(M)
    if case == "piecewise_nl":
        return R * (2.0 / (3 * M - 1)) ** (1.0 / 3.0)
    if case != "custom":
        raise ValueError(f"unknown case {case!r}")
    if pot is None:
        raise ValueError("custom case needs the potential")
    target = float(pot.P(R))
    lo, hi = 0.0, float(R)
    while hi - lo > 1e-12 * R:
        mid = 0.5 * (lo + hi)
        if M * float(pot.P(mid)) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def _inf_s_over_r(pot: Potential, lo: float, hi: float, n: int = 10_000) -> float:
    s = np.linspace(lo, hi, n)
    return float(np.min(s / pot.r(s)))


def delta_bound(case: str, R_tilde: float, K: float, pot: Potential | None = None,
                s_max: float | None = None) -> float:
    if case in ("linear", "piecewise_nl"):
        return float(R_tilde / K)
    if pot is None:
        raise ValueError("custom case needs the potential")
    hi = pot.s_max if s_max is None else s_max
    if not np.isfinite(hi):
        raise ValueError("custom case needs a finite s_max for the grid")
    return float(pot.r0**2 * _inf_s_over_r(pot, R_tilde, hi) / K)


def builtin_potential(case: str, R: float, R_tilde: float) -> Potential:
    if case == "linear":
        return LinearPotential()
    if case == "piecewise_nl":
        return PiecewiseNLPotential(R_tilde, R)
    raise ValueError(f"no built-in potential for case {case!r}")


def design(net: AgentNetwork, case: str, R: float, pot: Potential | None = None,
           R_tilde: float | None = None, delta_scale: float = 1.0):
    """Parameters and potential for the given case with R~ at its maximum
    (unless given) and delta at its bound, optionally scaled."""
    K = compute_K(net)
    if R_tilde is None:
        R_tilde = max_R_tilde(case, R, net.n_edges, pot)
    if pot is None:
        pot = builtin_potential(case, R, R_tilde)
    delta = delta_scale * delta_bound(case, R_tilde, K, pot)
    return ControllerParams(R=R, R_tilde=R_tilde, K=K, delta=delta, case=case), pot


# --- feedback terms --------------------------------------------------------

def connectivity_feedback(net: AgentNetwork, x, pot: Potential, i: int | None = None) -> np.ndarray:
    return -energy_gradient(pot, x, net, i)


def repulsive_field(dom: DomainParams, delta: float, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    norm = float(np.linalg.norm(xi))
    if norm >= dom.radius:
        raise OutsideDomainError(f"|x| = {norm} is not below the domain radius {dom.radius}")
    if norm < dom.inner_radius:
        return np.zeros_like(xi)
    level = (dom.epsilon + norm - dom.radius) / dom.epsilon
    return -dom.c * delta * float(dom.h(level)) * xi / norm


def repulsive_fields(dom: DomainParams, delta: float, x, clip: bool = False) -> np.ndarray:
    """``g`` for every row of ``x``. With ``clip`` the layer depth is capped at
    1 so points at or past the boundary get the full inward push instead of
    raising."""
    x = as_state(x)
    norms = np.linalg.norm(x, axis=1)
    if not clip and np.any(norms >= dom.radius):
        raise OutsideDomainError(f"an agent is at |x| = {norms.max()} >= {dom.radius}")
    level = np.clip((dom.epsilon + norms - dom.radius) / dom.epsilon, 0.0, 1.0)
    active = norms >= dom.inner_radius
    mag = np.where(active, dom.c * delta * dom.h(level), 0.0)
    safe = np.where(norms > 0, norms, 1.0)
    return -(mag / safe)[:, None] * x


def invariance_feedback(net: AgentNetwork, x, pot: Potential, dom: DomainParams, delta: float,
                        i: int | None = None) -> np.ndarray:
    x = as_state(x, net.n_agents)
    u = repulsive_fields(dom, delta, x) + connectivity_feedback(net, x, pot)
    return u if i is None else u[i]


# --- parameter validation --------------------------------------------------

class ConstraintCheck(NamedTuple):
    name: str
    bound: float
    actual: float
    margin: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.name:<24} bound={self.bound:<22.15g} actual={self.actual:<22.15g} "
                f"margin={self.margin:<+22.15g} {verdict}")


class ParamReport(list):
    @property
    def ok(self) -> bool:
        return all(c.passed for c in self)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self if not c.passed]

    def __str__(self) -> str:
        return "\n".join(c.line() for c in self)


def _check(name, bound, actual, margin, rtol=EQUALITY_RTOL, strict=False):
    slack = 0.0 if strict else rtol * max(1.0, abs(bound), abs(actual))
    passed = margin > 0 if strict else margin >= -slack
    return ConstraintCheck(name, float(bound), float(actual), float(margin), bool(passed))


def validate_params(net: AgentNetwork, pot: Potential, cp: ControllerParams,
                    dom: DomainParams | None = None) -> ParamReport:
    report = ParamReport()
    R, Rt = cp.R, cp.R_tilde
    report.append(_check("initial_radius_order", R, Rt, min(R - Rt, Rt), strict=True))
    r0 = pot.r0
    report.append(_check("weight_positive_at_zero", 0.0, r0, r0, strict=True))
    if isinstance(pot, PiecewiseNLPotential):
        mismatch = max(abs(pot.R_tilde - Rt), abs(pot.R - R))
        report.append(_check("weight_breakpoints", 0.0, mismatch, -mismatch))
    if Rt > 0:
        hi = pot.s_max if np.isfinite(pot.s_max) else max(3 * R, Rt)
        bound = r0**2 * _inf_s_over_r(pot, Rt, max(hi, Rt)) / cp.K
        report.append(_check("disturbance_bound", bound, cp.delta, bound - cp.delta))
        budget = float(pot.P(min(R, pot.s_max)))
        used = net.n_edges * float(pot.P(min(Rt, pot.s_max)))
        report.append(_check("energy_budget", budget, used, budget - used))
    if dom is not None:
        report.append(_check("domain_layer_width", dom.radius, dom.epsilon,
                             min(dom.epsilon, dom.radius - dom.epsilon), strict=True))
        report.append(_check("field_gain", 1.0, dom.c, dom.c - 1.0, strict=True))
        grid = np.linspace(0.0, 1.0, 1001)
        hv = np.asarray(dom.h(grid), dtype=float)
        shape_err = max(abs(hv[0]), abs(hv[-1] - 1.0))
        report.append(_check("shape_endpoints", 0.0, shape_err, -shape_err))
        rise = float(np.min(np.diff(hv)))
        report.append(_check("shape_increasing", 0.0, rise, rise, strict=True))
    return report
