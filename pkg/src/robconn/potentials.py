"""Edge weight functions r(s), their potentials P(rho) = int_0^rho r(s) s ds,
and the energy V(x) = sum over edges of P(|x_i - x_j|).

All ``r`` / ``P`` methods are vectorized over numpy arrays.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NotNeighborsError, OutOfDomainError
from .graph import AgentNetwork, as_state, delta_x, edge_lengths


def _check_nonneg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise OutOfDomainError("argument must be >= 0")
    return s


class Potential:
    kind: str = ""
    s_max: float = np.inf

    def r(self, s):
        raise NotImplementedError

    def P(self, rho):
        raise NotImplementedError

    @property
    def r0(self) -> float:
        return float(self.r(0.0))


@dataclass(frozen=True)
class LinearPotential(Potential):
    """r(s) = 1, so the feedback is the plain consensus law."""

    kind = "linear"

    def r(self, s):
        s = _check_nonneg(s)
        return np.ones_like(s)

    def P(self, rho):
        rho = _check_nonneg(rho)
        return 0.5 * rho * rho


@dataclass(frozen=True)
class PiecewiseNLPotential(Potential):
    """r = 1 on [0, R~], s/R~ on (R~, R], R/R~ beyond R.

    ``R_tilde == R`` is allowed (a single-edge graph); the middle branch is
    then empty and r is constant.
    """

    R_tilde: float
    R: float
    kind = "piecewise_nl"

    def __post_init__(self):
        if not 0 < self.R_tilde <= self.R:
            raise ValueError(f"need 0 < R_tilde <= R, got {self.R_tilde}, {self.R}")

    def r(self, s):
        s = _check_nonneg(s)
        Rt, R = self.R_tilde, self.R
        return np.where(s <= Rt, 1.0, np.where(s <= R, s / Rt, R / Rt))

    def P(self, rho):
        rho = _check_nonneg(rho)
        Rt, R = self.R_tilde, self.R
        inner = 0.5 * rho * rho
        middle = 0.5 * Rt * Rt + (rho**3 - Rt**3) / (3 * Rt)
        P_R = 0.5 * Rt * Rt + (R**3 - Rt**3) / (3 * Rt)
        outer = P_R + (R / Rt) * (rho * rho - R * R) / 2
        return np.where(rho <= Rt, inner, np.where(rho <= R, middle, outer))


@dataclass(frozen=True, eq=False)
class TablePotential(Potential):
    """Sampled weight function, linearly interpolated on ``[0, s_max]``.

    The integrand r(s) s is quadratic on each knot interval, so Simpson's
    rule per interval is exact; cumulative values are tabulated at the knots.
    """

    s: np.ndarray
    values: np.ndarray
    source: str | None = None
    _cum: np.ndarray = field(init=False, repr=False)
    kind = "custom"

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or len(s) < 2:
            raise ValueError("table needs matching 1-D arrays with at least two samples")
        if s[0] != 0.0:
            raise ValueError("table must start at s = 0")
        if np.any(np.diff(s) <= 0):
            raise ValueError("table s values must be strictly increasing")
        if v[0] <= 0:
            raise ValueError("weight function must satisfy r(0) > 0")
        if np.any(np.diff(v) < 0):
            raise ValueError("weight function must be nondecreasing")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", v)
        grid = np.linspace(0.0, s[-1], 1000)
        if np.any(np.diff(np.interp(grid, s, v)) < 0):
            raise ValueError("weight function must be nondecreasing")
        seg = self._simpson(s[:-1], s[1:])
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    def _integrand(self, u):
        return np.interp(u, self.s, self.values) * u

    def _simpson(self, a, b):
        return (b - a) / 6.0 * (self._integrand(a) + 4 * self._integrand(0.5 * (a + b)) + self._integrand(b))

    def _check_domain(self, s):
        s = _check_nonneg(s)
        if np.any(s > self.s_max):
            raise OutOfDomainError(f"argument exceeds table range s_max = {self.s_max}")
        return s

    def r(self, s):
        s = self._check_domain(s)
        return np.interp(s, self.s, self.values)

    def P(self, rho):
        rho = self._check_domain(rho)
        k = np.clip(np.searchsorted(self.s, rho, side="right") - 1, 0, len(self.s) - 2)
        return self._cum[k] + self._simpson(self.s[k], rho)

    @classmethod
    def from_csv(cls, path) -> "TablePotential":
        """Two-column CSV ``s, r`` with a header row."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3:
            raise ValueError(f"{path}: need a header and at least two data rows")
        data = np.array([[float(c) for c in row[:2]] for row in rows[1:] if row], dtype=float)
        return cls(data[:, 0], data[:, 1], source=str(Path(path)))


def edge_potential(pot: Potential, x, net: AgentNetwork, i: int, j: int) -> float:
    if net.edge_index(i, j) is None:
        raise NotNeighborsError(f"agents {i} and {j} are not neighbors")
    x = as_state(x, net.n_agents)
    return float(pot.P(np.linalg.norm(x[i] - x[j])))


def total_energy(pot: Potential, x, net: AgentNetwork) -> float:
    x = as_state(x, net.n_agents)
    return float(np.sum(pot.P(edge_lengths(net, x))))


def energy_gradient(pot: Potential, x, net: AgentNetwork, i: int | None = None) -> np.ndarray:
    """Row ``i`` is sum_{j in N_i} r(|x_i - x_j|)(x_i - x_j).

    Computed as ``D (w * Delta x)``, so column ``l`` equals ``L_w(x) c_l(x)``.
    Returns the full ``(N, n)`` array, or one row when ``i`` is given.
    """
    x = as_state(x, net.n_agents)
    dx = delta_x(net, x)
    w = pot.r(np.sqrt(np.sum(dx * dx, axis=1)))
    flux = w[:, None] * dx
    grad = np.zeros_like(x)
    np.add.at(grad, net.heads, flux)
    np.subtract.at(grad, net.tails, flux)
    return grad if i is None else grad[i]
