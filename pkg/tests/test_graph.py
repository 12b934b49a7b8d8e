import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eig2, eig3
from robconn.errors import InvalidGraphError, NotSymmetricError
from robconn.graph import (AgentNetwork, as_state, complete_graph, delta_x, delta_x_inf, from_edges,
                           incidence_matrix, jacobi_eigh, laplacian, path_graph, perp, random_connected_graph,
                           ring_graph, spectral_summary, stacked_ops, star_graph, weighted_laplacian)
from robconn.potentials import LinearPotential, PiecewiseNLPotential


def test_incidence_k2():
    np.testing.assert_array_equal(incidence_matrix(complete_graph(2)), [[-1], [1]])


def test_incidence_p3():
    np.testing.assert_array_equal(incidence_matrix(path_graph(3)), [[-1, 0], [1, -1], [0, 1]])


def test_incidence_empty():
    assert incidence_matrix(AgentNetwork(4, ())).shape == (4, 0)


def test_edges_are_normalized_and_sorted():
    net = from_edges(4, [(3, 1), (0, 2), (1, 0)])
    assert net.edges == ((0, 1), (0, 2), (1, 3))
    assert net.edge_index(3, 1) == 2
    assert net.edge_index(2, 3) is None


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(0, 1), (1, 0)], [(-1, 0)]])
def test_invalid_edges(edges):
    with pytest.raises(InvalidGraphError):
        from_edges(3, edges)


def test_laplacian_examples():
    np.testing.assert_array_equal(laplacian(complete_graph(2)), [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(laplacian(path_graph(3)), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_array_equal(laplacian(AgentNetwork(3, ())), np.zeros((3, 3)))


def test_weighted_laplacian_linear_is_laplacian():
    rng = np.random.default_rng(0)
    net = ring_graph(5)
    x = rng.standard_normal((5, 2))
    np.testing.assert_allclose(weighted_laplacian(net, x, LinearPotential()), laplacian(net))


def test_weighted_laplacian_k2_scales():
    pot = PiecewiseNLPotential(1.0, 4.0)
    Lw = weighted_laplacian(complete_graph(2), np.array([[0.0], [2.5]]), pot)
    np.testing.assert_allclose(Lw, 2.5 * np.array([[1, -1], [-1, 1]]))


def test_weighted_laplacian_p3_nl():
    Lw = weighted_laplacian(path_graph(3), np.array([[0.0], [1.0], [3.0]]), PiecewiseNLPotential(1.0, 4.0))
    np.testing.assert_allclose(Lw, [[1, -1, 0], [-1, 3, -2], [0, -2, 2]])


def test_spectrum_examples():
    s = spectral_summary(laplacian(complete_graph(2)))
    np.testing.assert_allclose(s.eigenvalues, [0, 2], atol=1e-12)
    assert s.lambda2 == pytest.approx(2)
    s = spectral_summary(laplacian(path_graph(3)))
    np.testing.assert_allclose(s.eigenvalues, [0, 1, 3], atol=1e-12)
    assert s.op_norm_DT == pytest.approx(np.sqrt(3))
    s = spectral_summary(np.zeros((3, 3)))
    assert s.lambda2 == 0 and not s.connected


def test_spectral_summary_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        spectral_summary(np.array([[1.0, 2.0], [0.0, 1.0]]))


def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for k in range(len(pairs) + 1):
        for sub in itertools.combinations(pairs, k):
            yield AgentNetwork(n, sub)


@pytest.mark.parametrize("n,oracle", [(2, eig2), (3, eig3)])
def test_spectrum_matches_characteristic_polynomial(n, oracle):
    for net in _all_graphs(n):
        L = laplacian(net)
        np.testing.assert_allclose(spectral_summary(L).eigenvalues, oracle(L), atol=1e-9)
        assert spectral_summary(L).connected == net.is_connected()


def test_weighted_3x3_matches_characteristic_polynomial():
    rng = np.random.default_rng(3)
    pot = PiecewiseNLPotential(0.7, 2.0)
    for _ in range(200):
        net = complete_graph(3) if rng.random() < 0.5 else path_graph(3)
        Lw = weighted_laplacian(net, rng.standard_normal((3, 2)), pot)
        np.testing.assert_allclose(spectral_summary(Lw).eigenvalues, eig3(Lw), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_jacobi_against_lapack(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A), atol=1e-9 * max(1, np.abs(A).max()))
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, A, atol=1e-9)
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_laplacian_spectral_invariants(n, seed):
    rng = np.random.default_rng(seed)
    net = random_connected_graph(n, rng)
    L = laplacian(net)
    s = spectral_summary(L)
    assert abs(s.eigenvalues[0]) < 1e-10
    assert s.lambda2 > 1e-9
    assert s.op_norm_DT**2 == pytest.approx(s.eigenvalues[-1], rel=1e-12)
    np.testing.assert_allclose(L @ np.ones(n), 0, atol=1e-12)


def test_disconnected_graph_has_zero_lambda2():
    net = from_edges(4, [(0, 1), (2, 3)])
    assert not net.is_connected()
    assert not spectral_summary(laplacian(net)).connected


@pytest.mark.parametrize("builder", [complete_graph, path_graph, ring_graph, star_graph])
def test_builders_connected(builder):
    for n in range(2, 7):
        assert builder(n).is_connected()


def test_stacked_ops_k2():
    net = complete_graph(2)
    v = stacked_ops(np.array([[0.0, 0.0], [3.0, 4.0]]), net)
    assert v.delta_x_inf == pytest.approx(5)
    assert np.linalg.norm(v.perp) == pytest.approx(5 / np.sqrt(2))
    np.testing.assert_allclose(v.mean, [[1.5, 2.0], [1.5, 2.0]])
    np.testing.assert_allclose(v.components, [[0, 3], [0, 4]])


def test_stacked_ops_p3_and_coincident():
    net = path_graph(3)
    v = stacked_ops(np.array([0.0, 1.0, 3.0]), net)
    np.testing.assert_allclose(v.delta_x[:, 0], [1, 2])
    assert v.delta_x_inf == 2
    v = stacked_ops(np.ones((3, 2)), net)
    assert np.all(v.delta_x == 0) and np.all(v.perp == 0)


def test_as_state_shapes():
    assert as_state([1.0, 2.0]).shape == (2, 1)
    assert as_state(np.zeros(6), n_agents=3).shape == (3, 2)


def test_random_graphs_difference_identity():
    # c_l(delta x) = D^T c_l(x) and the orthogonal mean/perp split
    rng = np.random.default_rng(11)
    for _ in range(200):
        net = random_connected_graph(int(rng.integers(2, 9)), rng)
        x = rng.standard_normal((net.n_agents, int(rng.integers(1, 4))))
        D = incidence_matrix(net)
        np.testing.assert_allclose(delta_x(net, x), D.T @ x, atol=1e-12)
        xp = perp(x)
        assert abs(np.sum((x - xp) * xp)) < 1e-10
        assert delta_x_inf(net, x) == pytest.approx(np.linalg.norm(D.T @ x, axis=1).max())
