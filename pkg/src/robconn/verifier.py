"""Monte-Carlo checks of the inequalities behind the connectivity and
invariance results.

Every ``check_*`` returns a margin ``LHS - RHS`` that is mathematically
nonnegative; ``verify_*`` draws seeded samples and keeps the worst margin.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .controllers import DomainParams, design
from .errors import DimensionMismatch, DisconnectedError, PreconditionViolated
from .graph import (CONNECTED_TOL, AgentNetwork, as_state, delta_x, delta_x_inf, edge_lengths, laplacian,
                    path_graph, perp, random_connected_graph, spectral_summary, weighted_laplacian)
from .potentials import Potential

PASS_TOL = -1e-9
PRE_TOL = 1e-12
FACT_IDS = ("I", "II", "III", "IV", "V", "VI", "lambda2_bound", "Rat", "parallelogram", "energy_decay")


@dataclass(frozen=True)
class FactReport:
    fact_id: str
    samples: int
    worst_margin: float
    threshold: float = PASS_TOL

    @property
    def passed(self) -> bool:
        return self.worst_margin >= self.threshold

    def line(self) -> str:
        return (f"{self.fact_id:<14} samples={self.samples:<7d} worst_margin={self.worst_margin:+.6e} "
                f"{'PASS' if self.passed else 'FAIL'}")

    def csv_row(self) -> list:
        return [self.fact_id, self.samples, f"{self.worst_margin:.17g}", int(self.passed)]


# --- single-sample checks --------------------------------------------------

def _lambda2(L: np.ndarray) -> float:
    lam2 = spectral_summary(L).lambda2
    if lam2 <= CONNECTED_TOL:
        raise DisconnectedError("lambda_2 vanishes")
    return lam2


def check_fact1(net: AgentNetwork, x, pot: Potential) -> float:
    """min_l |L_w c_l(x_perp)| - lambda_2(L_w) |c_l(x_perp)|."""
    x = as_state(x, net.n_agents)
    Lw = weighted_laplacian(net, x, pot)
    lam2 = _lambda2(Lw)
    xp = perp(x)
    lhs = np.linalg.norm(Lw @ xp, axis=0)
    rhs = lam2 * np.linalg.norm(xp, axis=0)
    return float(np.min(lhs - rhs))


def check_fact2(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    x, y = as_state(x), as_state(y)
    comp = np.sum(np.linalg.norm(x, axis=0) * np.linalg.norm(y, axis=0))
    return float(np.linalg.norm(x) * np.linalg.norm(y) - comp)


def check_fact3(net: AgentNetwork, x) -> float:
    x = as_state(x, net.n_agents)
    N = net.n_agents
    return float(np.linalg.norm(perp(x)) - np.linalg.norm(delta_x(net, x)) / np.sqrt(2 * (N - 1)))


def check_fact4(net: AgentNetwork, x) -> float:
    x = as_state(x, net.n_agents)
    return float(np.sqrt(2) * np.linalg.norm(perp(x)) - delta_x_inf(net, x))


def check_fact5(alpha, beta, gamma, lambda_a, lambda_b, mu_a, mu_b, tol: float = PRE_TOL) -> float:
    alpha, beta, gamma = (np.asarray(v, dtype=float) for v in (alpha, beta, gamma))
    if abs(np.linalg.norm(alpha) - 1) > tol or abs(np.linalg.norm(beta) - 1) > tol:
        raise PreconditionViolated("alpha and beta must be unit vectors")
    if alpha @ gamma < -tol:
        raise PreconditionViolated("<alpha, gamma> must be >= 0")
    if beta @ gamma > tol:
        raise PreconditionViolated("<beta, gamma> must be <= 0")
    if min(lambda_a, lambda_b, mu_a, mu_b) < 0:
        raise PreconditionViolated("lambda and mu values must be >= 0")
    if lambda_a < lambda_b or mu_a < mu_b:
        raise PreconditionViolated("need lambda_a >= lambda_b and mu_a >= mu_b")
    d = lambda_a * alpha + gamma - lambda_b * beta
    return float((mu_a * alpha - mu_b * beta) @ d)


def check_fact6(x, x_tilde, y, dom: DomainParams, tol: float = PRE_TOL) -> float:
    x, x_tilde, y = (np.asarray(v, dtype=float) for v in (x, x_tilde, y))
    inner, outer = dom.inner_radius, dom.radius
    for name, v in (("x", x), ("x_tilde", x_tilde)):
        nv = np.linalg.norm(v)
        if not (inner - tol <= nv < outer):
            raise PreconditionViolated(f"{name} must lie in the boundary layer")
    nx, nxt = np.linalg.norm(x), np.linalg.norm(x_tilde)
    if abs(x @ x_tilde - nx * nxt) > tol * max(1.0, nx * nxt):
        raise PreconditionViolated("x must be a positive multiple of x_tilde")
    if np.linalg.norm(y) > inner + tol:
        raise PreconditionViolated("y must lie in the closed inner ball")
    return float((x_tilde - y) @ x)


def check_lambda2_bound(net: AgentNetwork, x, pot: Potential) -> float:
    """lambda_2(L_w(x)) - lambda_2(L) r(0)."""
    lam2_w = _lambda2(weighted_laplacian(net, x, pot))
    lam2 = _lambda2(laplacian(net))
    return float(lam2_w - lam2 * pot.r0)


def check_parallelogram(w, z) -> float:
    w, z = np.asarray(w, dtype=float), np.asarray(z, dtype=float)
    return float(2 * (w @ w + z @ z) - (w - z) @ (w - z))


def energy_rate_analytic(net: AgentNetwork, x, pot: Potential, v) -> float:
    """dV/dt = sum_l c_l(x)^T L_w (-L_w c_l(x) + c_l(v))."""
    x = as_state(x, net.n_agents)
    v = as_state(v, net.n_agents)
    Lw = weighted_laplacian(net, x, pot)
    return float(np.sum(x * (Lw @ (-Lw @ x + v))))


def check_energy_decay(net: AgentNetwork, x, pot: Potential, v) -> float:
    """Margin of dV/dt <= 0; only meaningful when |Delta x|_inf >= R~ and
    |v|_inf <= delta."""
    return -energy_rate_analytic(net, x, pot, v)


# --- edge-count ratio ------------------------------------------------------

def rat(M):
    M = np.asarray(M, dtype=float)
    return (1 / np.sqrt(M)) / (2 / (3 * M - 1)) ** (1 / 3)


def rat6(M):
    M = np.asarray(M, dtype=float)
    return (3 * M - 1) ** 2 / (4 * M**3)


def rat6_derivative(M):
    M = np.asarray(M, dtype=float)
    return 3 / 4 * (3 * M - 1) / M**4 * (1 - M)


def rat_table(M_max: int) -> list[tuple[int, float]]:
    if M_max < 1:
        raise ValueError("M_max must be >= 1")
    Ms = np.arange(1, M_max + 1)
    return list(zip(Ms.tolist(), rat(Ms).tolist()))


def rat_margin(M_max: int = 150) -> float:
    """min over decreasing steps and over 1 - Rat(M) for M >= 2."""
    values = np.array([v for _, v in rat_table(M_max)])
    if len(values) < 2:
        return 0.0
    return float(min(np.min(values[:-1] - values[1:]), np.min(1.0 - values[1:])))


# --- Monte-Carlo drivers ---------------------------------------------------

def _random_state(rng, net, n, scale=None):
    scale = rng.uniform(0.1, 5.0) if scale is None else scale
    return rng.standard_normal((net.n_agents, n)) * scale


def _random_pot(rng, net, n):
    """Alternates linear and piecewise-NL weights at the design radii."""
    R = rng.uniform(0.5, 5.0)
    case = "linear" if rng.random() < 0.5 else "piecewise_nl"
    _, pot = design(net, case, R)
    return pot, R


def _graph(rng, n_max=8):
    return random_connected_graph(int(rng.integers(2, n_max + 1)), rng, p_extra=rng.uniform(0.0, 0.6))


def verify_fact1(rng, budget):
    worst = np.inf
    for _ in range(budget):
        net = path_graph(3) if rng.random() < 0.25 else _graph(rng)
        n = int(rng.integers(1, 4))
        pot, _ = _random_pot(rng, net, n)
        worst = min(worst, check_fact1(net, _random_state(rng, net, n), pot))
    return worst


def verify_fact2(rng, budget):
    worst = np.inf
    for _ in range(budget):
        N, n = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        x = rng.standard_normal((N, n))
        y = x * rng.uniform(-2, 2) if rng.random() < 0.1 else rng.standard_normal((N, n))
        worst = min(worst, check_fact2(x, y))
    return worst


def verify_fact34(rng, budget):
    w3 = w4 = np.inf
    for _ in range(budget):
        net = _graph(rng)
        x = _random_state(rng, net, int(rng.integers(1, 4)))
        w3 = min(w3, check_fact3(net, x))
        w4 = min(w4, check_fact4(net, x))
    return w3, w4


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def sample_fact5(rng, n=None):
    """Rejection sampling of (alpha, beta, gamma) with the sign conditions."""
    n = int(rng.integers(1, 4)) if n is None else n
    while True:
        alpha, beta = _unit(rng, n), _unit(rng, n)
        gamma = rng.standard_normal(n) * rng.uniform(0, 3)
        if alpha @ gamma >= 0 and beta @ gamma <= 0:
            break
    lam = np.sort(rng.uniform(0, 3, 2))[::-1]
    mu = np.sort(rng.uniform(0, 3, 2))[::-1]
    return alpha, beta, gamma, lam[0], lam[1], mu[0], mu[1]


def verify_fact5(rng, budget):
    worst = np.inf
    for _ in range(budget):
        a, b, g, la, lb, ma, mb = sample_fact5(rng)
        worst = min(worst, check_fact5(a, b, g, la, lb, ma, mb))
    return worst


def sample_fact6(rng, dom: DomainParams, n=None):
    n = int(rng.integers(1, 4)) if n is None else n
    u = _unit(rng, n)
    r1, r2 = rng.uniform(dom.inner_radius, dom.radius, 2)
    y = _unit(rng, n) * dom.inner_radius * rng.random() ** (1.0 / n)
    return r1 * u, r2 * u, y


def verify_fact6(rng, budget):
    worst = np.inf
    for _ in range(budget):
        radius = rng.uniform(1, 20)
        dom = DomainParams(radius, rng.uniform(0.01, 0.99) * radius)
        x, xt, y = sample_fact6(rng, dom)
        worst = min(worst, check_fact6(x, xt, y, dom))
    return worst


def verify_lambda2_bound(rng, budget):
    worst = np.inf
    for _ in range(budget):
        net = _graph(rng)
        n = int(rng.integers(1, 4))
        pot, _ = _random_pot(rng, net, n)
        worst = min(worst, check_lambda2_bound(net, _random_state(rng, net, n), pot))
    return worst


def verify_parallelogram(rng, budget):
    worst = np.inf
    for _ in range(budget):
        n = int(rng.integers(1, 6))
        worst = min(worst, check_parallelogram(rng.standard_normal(n) * 3, rng.standard_normal(n) * 3))
    return worst


def sample_energy_decay(rng, net=None, case=None):
    """A state with |Delta x|_inf >= R~ and a disturbance with |v|_inf <= delta
    for a maximal-R~ design. Every fourth draw uses the steepest-ascent input."""
    net = _graph(rng, 6) if net is None else net
    case = ("linear", "piecewise_nl")[int(rng.integers(2))] if case is None else case
    n = int(rng.integers(1, 4))
    R = rng.uniform(0.5, 5.0)
    cp, pot = design(net, case, R)
    x = rng.standard_normal((net.n_agents, n))
    target = rng.uniform(cp.R_tilde, 3 * R)
    x *= target / edge_lengths(net, x).max()
    if rng.random() < 0.25:
        grad = weighted_laplacian(net, x, pot) @ x
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        v = np.where(norms > 0, cp.delta * grad / np.where(norms > 0, norms, 1.0), 0.0)
    else:
        dirs = rng.standard_normal((net.n_agents, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        v = dirs * cp.delta * rng.random((net.n_agents, 1))
    return net, x, pot, v


def verify_energy_decay(rng, budget):
    worst = np.inf
    for _ in range(budget):
        net, x, pot, v = sample_energy_decay(rng)
        worst = min(worst, check_energy_decay(net, x, pot, v))
    return worst


def run_all(seed: int = 42, budget: int = 10_000, threshold: float = PASS_TOL) -> list[FactReport]:
    """All fact checks, each with its own stream spawned from ``seed``.

    The spectral checks (Fact I, lambda_2 bound) use ``budget // 10``
    samples since each draw costs Jacobi eigen-solves.
    """
    if budget == 0:
        warnings.warn("budget 0: fact checks are vacuous", stacklevel=2)
    streams = iter(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(10))
    heavy = budget // 10 if budget >= 10 else budget

    def report(fid, n, worst):
        return FactReport(fid, n, float(worst) if n else 0.0, threshold)

    reports = [report("I", heavy, verify_fact1(next(streams), heavy)),
               report("II", budget, verify_fact2(next(streams), budget))]
    w3, w4 = verify_fact34(next(streams), budget)
    reports += [report("III", budget, w3), report("IV", budget, w4),
                report("V", budget, verify_fact5(next(streams), budget)),
                report("VI", budget, verify_fact6(next(streams), budget)),
                report("lambda2_bound", heavy, verify_lambda2_bound(next(streams), heavy)),
                report("parallelogram", budget, verify_parallelogram(next(streams), budget)),
                report("energy_decay", budget, verify_energy_decay(next(streams), budget)),
                FactReport("Rat", 150, rat_margin(150), threshold)]
    return reports
