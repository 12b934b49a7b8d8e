"""Graph algebra: incidence matrix, (weighted) Laplacians, spectra and
the stacked-vector views of a swarm state.

Positions are stored as an ``(N, n)`` array; row ``i`` is agent ``i``.
Flattening row-major gives the stacked vector ``x = (x_1, ..., x_N)``,
and column ``l`` is the component vector ``c_l(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numba
import numpy as np

from .errors import InvalidGraphError, NotSymmetricError

CONNECTED_TOL = 1e-9


@dataclass(frozen=True)
class AgentNetwork:
    """Undirected graph with a fixed orientation and edge numbering.

    Edges are stored as ``(tail, head)`` with ``tail < head`` and sorted
    lexicographically; that order is the column order of the incidence
    matrix. Agents are 0-based.
    """

    n_agents: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_agents < 1:
            raise InvalidGraphError(f"n_agents must be positive, got {self.n_agents}")
        normalized = []
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise InvalidGraphError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_agents and 0 <= j < self.n_agents):
                raise InvalidGraphError(f"edge {e} has an endpoint outside 0..{self.n_agents - 1}")
            normalized.append((min(i, j), max(i, j)))
        if len(set(normalized)) != len(normalized):
            raise InvalidGraphError("repeated edge")
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=np.int64)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=np.int64)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n_agents)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.int64)

    def edge_index(self, i: int, j: int) -> int | None:
        key = (min(i, j), max(i, j))
        try:
            return self.edges.index(key)
        except ValueError:
            return None

    def is_connected(self) -> bool:
        """Breadth-first reachability; independent of the spectral test."""
        seen = {0}
        frontier = [0]
        while frontier:
            k = frontier.pop()
            for j in self.neighbors[k]:
                if j not in seen:
                    seen.add(j)
                    frontier.append(j)
        return len(seen) == self.n_agents


def from_edges(n_agents: int, edges: Iterable[tuple[int, int]]) -> AgentNetwork:
    return AgentNetwork(n_agents, tuple(tuple(e) for e in edges))


def complete_graph(n: int) -> AgentNetwork:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> AgentNetwork:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def ring_graph(n: int) -> AgentNetwork:
    if n < 3:
        return path_graph(n)
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> AgentNetwork:
    return from_edges(n, [(0, i) for i in range(1, n)])


def random_connected_graph(n: int, rng: np.random.Generator, p_extra: float = 0.3) -> AgentNetwork:
    """Random spanning tree plus each remaining pair with probability ``p_extra``."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(k)]
        edges.add((min(order[k], parent), max(order[k], parent)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p_extra:
                edges.add((i, j))
    return from_edges(n, [(int(a), int(b)) for a, b in edges])


def incidence_matrix(net: AgentNetwork) -> np.ndarray:
    D = np.zeros((net.n_agents, net.n_edges))
    cols = np.arange(net.n_edges)
    D[net.heads, cols] = 1.0
    D[net.tails, cols] = -1.0
    return D


def laplacian(net: AgentNetwork) -> np.ndarray:
    D = incidence_matrix(net)
    return D @ D.T


def edge_lengths(net: AgentNetwork, x: np.ndarray) -> np.ndarray:
    """Euclidean length of every edge, in edge order. Works on a batch
    ``(..., N, n)`` of states too."""
    x = np.asarray(x, dtype=float)
    dx = x[..., net.heads, :] - x[..., net.tails, :]
    return np.sqrt(np.sum(dx * dx, axis=-1))


def weighted_laplacian(net: AgentNetwork, x: np.ndarray, pot) -> np.ndarray:
    """``D W(x) D^T`` with ``W = diag(r(|x_i - x_j|))`` over the edges."""
    D = incidence_matrix(net)
    w = pot.r(edge_lengths(net, as_state(x, net.n_agents)))
    return (D * w) @ D.T


# --- symmetric eigenvalues -------------------------------------------------

@numba.njit(cache=True)
def _jacobi_kernel(a, v, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q] * a[p, q]
        if np.sqrt(off) < tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return max_sweeps


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm drops below ``tol``
    (floored at a few ulps of ``|A|_F`` so large matrices still terminate).
    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    as columns.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 0:
        return np.zeros(0), v
    floor = 4 * np.finfo(float).eps * np.linalg.norm(a)
    _jacobi_kernel(a, v, max(tol, floor), max_sweeps)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


class SpectralSummary(NamedTuple):
    eigenvalues: np.ndarray
    lambda2: float
    op_norm_DT: float

    @property
    def connected(self) -> bool:
        return self.lambda2 > CONNECTED_TOL


def spectral_summary(L: np.ndarray, sym_tol: float = 1e-10) -> SpectralSummary:
    """Sorted spectrum of a Laplacian-like matrix.

    ``op_norm_DT`` is ``sqrt(lambda_N)``; for ``L = D D^T`` that is the
    induced 2-norm of ``D^T``.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {L.shape}")
    asym = np.max(np.abs(L - L.T)) if L.size else 0.0
    if asym > sym_tol:
        raise NotSymmetricError(f"asymmetry {asym:.3e} exceeds {sym_tol:g}")
    eig, _ = jacobi_eigh(0.5 * (L + L.T))
    lam2 = float(eig[1]) if len(eig) > 1 else 0.0
    lam_max = float(eig[-1]) if len(eig) else 0.0
    return SpectralSummary(eig, lam2, float(np.sqrt(max(lam_max, 0.0))))


# --- stacked-vector views --------------------------------------------------

def as_state(x, n_agents: int | None = None) -> np.ndarray:
    """Coerce positions to an ``(N, n)`` float array. A flat vector of length
    ``N*n`` is reshaped when ``n_agents`` is given."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if n_agents is None:
            x = x[:, None]
        else:
            x = x.reshape(n_agents, -1)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError(f"state must be (N, n) with n >= 1, got shape {x.shape}")
    if n_agents is not None and x.shape[0] != n_agents:
        raise ValueError(f"state has {x.shape[0]} agents, network has {n_agents}")
    return x


def mean_projection(x: np.ndarray) -> np.ndarray:
    """Projection onto the consensus subspace H: every agent at the mean."""
    x = as_state(x)
    return np.broadcast_to(x.mean(axis=0), x.shape).copy()


def perp(x: np.ndarray) -> np.ndarray:
    x = as_state(x)
    return x - x.mean(axis=0)


def delta_x(net: AgentNetwork, x: np.ndarray) -> np.ndarray:
    """Edge differences ``x_head - x_tail`` as an ``(M, n)`` array, i.e. the
    rows of ``D^T x`` taken componentwise."""
    x = as_state(x, net.n_agents)
    return x[net.heads] - x[net.tails]


def delta_x_inf(net: AgentNetwork, x: np.ndarray) -> float:
    if net.n_edges == 0:
        return 0.0
    return float(np.max(edge_lengths(net, as_state(x, net.n_agents))))


class StackedViews(NamedTuple):
    components: np.ndarray  # (n, N); row l is c_l(x)
    mean: np.ndarray
    perp: np.ndarray
    delta_x: np.ndarray  # (M, n)
    delta_x_inf: float


def stacked_ops(x: np.ndarray, net: AgentNetwork) -> StackedViews:
    x = as_state(x, net.n_agents)
    return StackedViews(
        components=x.T.copy(),
        mean=mean_projection(x),
        perp=perp(x),
        delta_x=delta_x(net, x),
        delta_x_inf=delta_x_inf(net, x),
    )
