import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robconn.controllers import DomainParams, design
from robconn.errors import DimensionMismatch, PreconditionViolated
from robconn.graph import complete_graph, laplacian, path_graph, random_connected_graph, spectral_summary
from robconn.potentials import LinearPotential, PiecewiseNLPotential, Potential
from robconn import verifier as V


class ConstantWeight(Potential):
    kind = "constant"

    def __init__(self, w):
        self.w = w

    def r(self, s):
        return np.full(np.shape(s), self.w, dtype=float)

    def P(self, rho):
        return self.w * np.asarray(rho, dtype=float) ** 2 / 2

    @property
    def r0(self):
        return 1.0  # reports the nominal weight so the bound is lambda_2(L)


def test_fact1_examples():
    pot = PiecewiseNLPotential(0.5, 2.0)
    assert V.check_fact1(path_graph(3), np.ones((3, 2)), pot) == 0
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert abs(V.check_fact1(complete_graph(2), rng.standard_normal((2, 2)), pot)) < 1e-12
    for _ in range(1000):
        assert V.check_fact1(path_graph(3), rng.standard_normal((3, 2)) * 2, pot) >= -1e-12


def test_fact2_examples():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 3))
    assert V.check_fact2(x, x) == pytest.approx(0, abs=1e-12)
    assert V.check_fact2(x, np.zeros_like(x)) == 0
    for _ in range(1000):
        assert V.check_fact2(rng.standard_normal((5, 2)), rng.standard_normal((5, 2))) >= -1e-12
    with pytest.raises(DimensionMismatch):
        V.check_fact2(np.zeros((3, 2)), np.zeros((2, 3)))


def test_fact34_examples():
    net = complete_graph(2)
    assert V.check_fact3(net, np.ones((2, 2))) == 0
    assert V.check_fact4(net, np.ones((2, 2))) == 0
    rng = np.random.default_rng(2)
    for _ in range(100):
        assert abs(V.check_fact3(net, rng.standard_normal((2, 3)))) < 1e-12
    for _ in range(1000):
        g = random_connected_graph(int(rng.integers(2, 9)), rng)
        x = rng.standard_normal((g.n_agents, 2))
        assert V.check_fact3(g, x) >= -1e-12 and V.check_fact4(g, x) >= -1e-12


def test_fact5_examples():
    e1 = np.array([1.0, 0.0])
    assert V.check_fact5(e1, e1, np.zeros(2), 1.5, 1.5, 2.0, 2.0) == pytest.approx(0, abs=1e-15)
    assert V.check_fact5(e1, -e1, e1, 2, 1, 3, 1) == pytest.approx(16)
    with pytest.raises(PreconditionViolated):
        V.check_fact5(e1, e1, -e1, 1, 1, 1, 1)
    with pytest.raises(PreconditionViolated):
        V.check_fact5(2 * e1, e1, np.zeros(2), 1, 1, 1, 1)
    with pytest.raises(PreconditionViolated):
        V.check_fact5(e1, e1, np.zeros(2), 1, 2, 1, 1)


def test_fact5_margin_above_proof_residual():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        a, b, g, la, lb, ma, mb = V.sample_fact5(rng)
        m = V.check_fact5(a, b, g, la, lb, ma, mb)
        assert m >= (ma - mb) * (la - lb) - 1e-12
        assert m >= -1e-12


def test_fact6_examples():
    dom = DomainParams(10.0, 1.0)
    x = np.array([9.5, 0.0])
    assert V.check_fact6(x, np.array([9.2, 0.0]), np.zeros(2), dom) == pytest.approx(9.2 * 9.5)
    assert V.check_fact6(x, np.array([9.0, 0.0]), np.array([9.0, 0.0]), dom) == pytest.approx(0, abs=1e-12)
    with pytest.raises(PreconditionViolated):
        V.check_fact6(x, np.array([0.0, 9.2]), np.zeros(2), dom)
    with pytest.raises(PreconditionViolated):
        V.check_fact6(x, np.array([9.2, 0.0]), np.array([9.5, 0.0]), dom)
    rng = np.random.default_rng(4)
    for _ in range(2000):
        xs, xt, y = V.sample_fact6(rng, dom)
        assert V.check_fact6(xs, xt, y, dom) >= -1e-12


def test_lambda2_bound_examples():
    rng = np.random.default_rng(5)
    net = random_connected_graph(5, rng)
    x = rng.standard_normal((5, 2))
    assert V.check_lambda2_bound(net, x, LinearPotential()) == pytest.approx(0, abs=1e-12)
    lam2 = spectral_summary(laplacian(net)).lambda2
    assert V.check_lambda2_bound(net, x, ConstantWeight(2.0)) == pytest.approx(lam2, rel=1e-10)
    for _ in range(300):
        pot = PiecewiseNLPotential(*np.sort(rng.uniform(0.1, 2.0, 2)))
        assert V.check_lambda2_bound(net, rng.standard_normal((5, 2)) * 2, pot) >= -1e-10


def test_rat_values():
    assert V.rat(1) == 1
    assert V.rat(2) == pytest.approx(0.9597, abs=1e-4)
    # 0.7501 is sometimes quoted; the closed form gives 0.74947
    assert V.rat(12) == pytest.approx((1 / np.sqrt(12)) / (2 / 35) ** (1 / 3), rel=1e-15)
    assert V.rat(12) == pytest.approx(0.7501, abs=1e-3)
    table = V.rat_table(150)
    assert len(table) == 150 and table[0] == (1, 1.0)
    assert V.rat_margin(150) > 0


@pytest.mark.parametrize("M", [2, 5, 10, 50])
def test_rat6_derivative(M):
    h = 1e-4
    numeric = (V.rat6(M + h) - V.rat6(M - h)) / (2 * h)
    assert numeric == pytest.approx(V.rat6_derivative(M), abs=1e-8)
    assert V.rat6(M) == pytest.approx(V.rat(M) ** 6, rel=1e-13)
    assert V.rat6_derivative(M) < 0
    # the frequently quoted form with a 2^3 denominator is off by exactly 2
    assert V.rat6_derivative(M) == pytest.approx(2 * 3 / 2**3 * (3 * M - 1) / M**4 * (1 - M), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=6), st.integers(0, 2**32 - 1))
def test_parallelogram(w, seed):
    w = np.array(w)
    z = np.random.default_rng(seed).standard_normal(len(w)) * 100
    assert V.check_parallelogram(w, z) >= -1e-9 * (1 + w @ w + z @ z)


def test_energy_decay_samples():
    rng = np.random.default_rng(6)
    for _ in range(2000):
        net, x, pot, v = V.sample_energy_decay(rng)
        assert V.check_energy_decay(net, x, pot, v) >= -1e-10


def test_energy_rate_matches_gradient_product():
    rng = np.random.default_rng(7)
    net = random_connected_graph(5, rng)
    cp, pot = design(net, "piecewise_nl", 2.0)
    x = rng.standard_normal((5, 2))
    v = rng.standard_normal((5, 2)) * 0.01
    from robconn.potentials import energy_gradient
    g = energy_gradient(pot, x, net)
    assert V.energy_rate_analytic(net, x, pot, v) == pytest.approx(np.sum(g * (-g + v)), rel=1e-12)


def test_run_all_small_budget_passes_and_repeats():
    a = V.run_all(seed=5, budget=300)
    b = V.run_all(seed=5, budget=300)
    assert [r.fact_id for r in a] == list(V.FACT_IDS[:7]) + ["parallelogram", "energy_decay", "Rat"]
    assert all(r.passed for r in a)
    assert [r.worst_margin for r in a] == [r.worst_margin for r in b]


def test_run_all_zero_budget_warns():
    with pytest.warns(UserWarning, match="vacuous"):
        reports = V.run_all(budget=0)
    assert all(r.passed for r in reports)


def test_report_threshold():
    r = V.FactReport("II", 10, -1e-12)
    assert r.passed
    assert not V.FactReport("II", 10, -1e-12, threshold=1.0).passed
    assert r.line().endswith("PASS")
    assert r.csv_row()[-1] == 1
