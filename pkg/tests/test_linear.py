import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from otspaces.errors import SingularCovariance
from otspaces.linear import (bures_squared, gaussian_w2, is_monge, mccann_interpolate, north_west_corner,
                             sinkhorn, sinkhorn_divergence, solve_exact, wasserstein_1d, wasserstein_barycenter)
from otspaces.linear.sinkhorn import SinkhornParams, entropy
from otspaces.measures import DiscreteMeasure, GaussianMeasure, make_histogram


def lp_oracle(C, a, b):
    n, m = C.shape
    A = np.vstack([np.kron(np.eye(n), np.ones(m)), np.kron(np.ones(n), np.eye(m))])
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    return res.fun


def test_solve_exact_trivial():
    sol = solve_exact([[5.0]], [1.0], [1.0])
    assert sol.cost == 5.0 and np.array_equal(sol.plan, [[1.0]])


def test_two_diracs():
    for p in (1, 2, 3):
        assert solve_exact([[abs(0 - 3) ** p]], [1], [1]).cost == 3 ** p


def test_permutation_oracle(rng):
    for _ in range(10):
        C = rng.random((4, 4))
        brute = min(C[range(4), list(p)].sum() for p in itertools.permutations(range(4))) / 4
        assert abs(solve_exact(C).cost - brute) <= 1e-12


@pytest.mark.parametrize("rule", ["dantzig", "bland"])
def test_solve_exact_vs_highs_and_certificate(rng, rule):
    for _ in range(40):
        n, m = rng.integers(1, 12, size=2)
        C = rng.random((n, m)) * 10
        if rng.random() < 0.3:
            C = np.round(C)  # ties and degeneracy
        a = make_histogram(rng.random(n) + (rng.random(n) < 0.2))
        b = make_histogram(rng.random(m))
        sol = solve_exact(C, a, b, pivot_rule=rule)
        ref = lp_oracle(C, a, b)
        assert abs(sol.cost - ref) <= 1e-9 * max(1, abs(ref))
        assert abs(sol.cost - np.sum(C * sol.plan)) <= 1e-9 * max(1, abs(sol.cost))
        P = sol.plan
        assert np.abs(P.sum(1) - a).max() <= 1e-8 and np.abs(P.sum(0) - b).max() <= 1e-8
        assert P.min() >= 0 and np.count_nonzero(P > 1e-15) <= n + m - 1
        slack = C - sol.dual_row[:, None] - sol.dual_col[None, :]
        assert slack.min() >= -1e-7
        assert np.abs(slack[P > 1e-12]).max(initial=0) <= 1e-7
        dual = sol.dual_row @ a + sol.dual_col @ b
        assert abs(dual - sol.cost) <= 1e-7 * max(1, abs(sol.cost))


def test_zero_mass_rows(rng):
    C = rng.random((3, 4))
    a = np.array([0.5, 0.0, 0.5])
    sol = solve_exact(C, a, None)
    assert np.all(sol.plan[1] == 0)
    assert abs(sol.cost - lp_oracle(C, a, np.full(4, 0.25))) <= 1e-12


def test_north_west_corner():
    assert np.array_equal(north_west_corner([1.0], [1.0]).plan, [[1.0]])
    assert np.allclose(north_west_corner([0.5, 0.5], [0.3, 0.7]).plan, [[0.3, 0.2], [0, 0.5]])


def test_north_west_optimal_for_monge(rng):
    for _ in range(10):
        x, y = np.sort(rng.standard_normal(5)), np.sort(rng.standard_normal(5))
        C = (x[:, None] - y[None, :]) ** 2
        a, b = make_histogram(rng.random(5)), make_histogram(rng.random(5))
        assert is_monge(C)
        nw = north_west_corner(a, b).plan
        assert abs(np.sum(C * nw) - solve_exact(C, a, b).cost) <= 1e-12


def test_is_monge_examples(rng):
    assert is_monge(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not is_monge(np.array([[1.0, 0.0], [0.0, 1.0]]))
    found = False
    for _ in range(100):
        C = rng.random((3, 3))
        brute = all(C[i, j] + C[i + 1, j + 1] <= C[i + 1, j] + C[i, j + 1] + 1e-12
                    for i in range(2) for j in range(2))
        assert is_monge(C) == brute
        found |= not brute
    assert found


def test_sinkhorn_examples(rng):
    sol = sinkhorn([[2.0]], [1.0], [1.0], epsilon=0.1)
    assert np.allclose(sol.plan, [[1.0]]) and sol.iterations <= 1
    C = rng.random((5, 5))
    a, b = make_histogram(rng.random(5)), make_histogram(rng.random(5))
    big = sinkhorn(C, a, b, epsilon=1e6 * C.max())
    assert np.abs(big.plan - np.outer(a, b)).max() <= 1e-6
    small = sinkhorn(C, a, b, epsilon=1e-3 * np.ptp(C))
    ex = solve_exact(C, a, b).cost
    assert abs(small.cost - ex) <= 0.01 * ex
    # Gibbs form diag(u) K diag(v)
    sol = sinkhorn(C, a, b, epsilon=0.5)
    K = np.exp(-(C - sol.dual_row[:, None] - sol.dual_col[None, :]) / 0.5)
    assert np.allclose(K, sol.plan, atol=1e-12)
    assert np.abs(sol.plan.sum(1) - a).max() <= 1e-9


def test_sinkhorn_log_domain_survives_small_eps(rng):
    C = 100 * rng.random((6, 6))
    sol = sinkhorn(C, None, None, SinkhornParams(epsilon=1e-2 * C.max(), max_iter=20000))
    assert np.all(np.isfinite(sol.plan))
    with pytest.raises(Exception):
        sinkhorn(C, None, None, SinkhornParams(epsilon=1e-3, log_stabilize=False))


def test_sinkhorn_entropy_grows_with_eps(rng):
    C = rng.random((6, 7))
    H = [entropy(sinkhorn(C, epsilon=e).plan) for e in (0.01, 0.05, 0.1, 0.5, 1.0)]
    assert np.all(np.diff(H) >= -1e-12)


def test_sinkhorn_divergence(rng):
    X, Y = rng.standard_normal((5, 2)), rng.standard_normal((4, 2)) + 1
    sq = lambda A, B: ((A[:, None] - B[None]) ** 2).sum(-1)  # noqa: E731
    a, b = make_histogram(rng.random(5)), make_histogram(rng.random(4))
    tight = SinkhornParams(epsilon=1.0, marginal_tol=1e-13, max_iter=20000)
    assert abs(sinkhorn_divergence(sq(X, X), sq(X, X), sq(X, X), a, a, tight)) <= 1e-12
    d1 = sinkhorn_divergence(sq(X, Y), sq(X, X), sq(Y, Y), a, b, tight)
    d2 = sinkhorn_divergence(sq(Y, X), sq(Y, Y), sq(X, X), b, a, tight)
    assert abs(d1 - d2) <= 1e-10
    d = 1.5
    val = sinkhorn_divergence([[d * d]], [[0.0]], [[0.0]], [1.0], [1.0], epsilon=1e-3)
    assert abs(val - d * d) <= 1e-6


def test_wasserstein_1d(rng):
    x = rng.standard_normal(6)
    sol = wasserstein_1d(x, x)
    assert sol.cost == 0.0
    assert wasserstein_1d([0.0], [3.0], p=2).cost == 9.0
    x, y = rng.standard_normal(6), rng.standard_normal(4)
    a, b = make_histogram(rng.random(6)), make_histogram(rng.random(4))
    for p in (1, 2, 3):
        ref = solve_exact(np.abs(x[:, None] - y[None]) ** p, a, b).cost
        sol = wasserstein_1d(x, y, a, b, p)
        assert abs(sol.cost - ref) <= 1e-10 * max(ref, 1)
        assert np.abs(sol.plan.sum(1) - a).max() <= 1e-12


def test_w1d_metric_axioms(rng):
    for _ in range(20):
        xs = [rng.standard_normal(int(rng.integers(1, 8))) for _ in range(3)]
        ws = [make_histogram(rng.random(len(x))) for x in xs]
        for p in (1, 2):
            d = lambda i, j: wasserstein_1d(xs[i], xs[j], ws[i], ws[j], p).cost ** (1 / p)  # noqa: E731
            assert d(0, 1) == d(1, 0)
            assert d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9


def test_gaussian_w2(rng):
    L = rng.standard_normal((3, 3))
    S = L @ L.T + np.eye(3)
    mu = GaussianMeasure(np.ones(3), S)
    c, A, shift = gaussian_w2(mu, mu)
    assert abs(c) <= 1e-10 and np.allclose(A, np.eye(3))
    L = rng.standard_normal((3, 3))
    nu = GaussianMeasure(rng.standard_normal(3), L @ L.T + 0.5 * np.eye(3))
    c, A, _ = gaussian_w2(mu, nu)
    assert np.abs(A @ S @ A.T - nu.covariance).max() <= 1e-8
    assert abs(c - (np.sum((mu.mean - nu.mean) ** 2) + bures_squared(S, nu.covariance))) <= 1e-10
    with pytest.raises(SingularCovariance):
        gaussian_w2(GaussianMeasure(np.zeros(2), np.diag([1.0, 0.0])), GaussianMeasure(np.zeros(2), np.eye(2)))


def test_barycenter_examples(rng):
    two = [DiscreteMeasure.from_points([0.0]), DiscreteMeasure.from_points([2.0])]
    bary = wasserstein_barycenter(two, lambdas=[0.5, 0.5], k=1)
    assert np.allclose(bary.support, [[1.0]])
    mu = DiscreteMeasure(rng.standard_normal((5, 2)), None)
    bary, log = wasserstein_barycenter([mu], k=5, log=True)
    assert log["objective"][-1] <= 1e-12
    bary, log = wasserstein_barycenter([mu, mu, mu], k=5, log=True)
    assert log["objective"][-1] <= 1e-12


def test_barycenter_monotone(rng):
    for seed in range(5):
        ms = [DiscreteMeasure(rng.standard_normal((int(rng.integers(3, 9)), 2)), None) for _ in range(3)]
        _, log = wasserstein_barycenter(ms, k=4, seed=seed, log=True)
        h = np.asarray(log["objective"])
        assert np.all(np.diff(h) <= 1e-12 * h[0])


def test_mccann():
    P = solve_exact([[4.0]], [1.0], [1.0]).coupling
    mid = mccann_interpolate(P, np.array([[0.0]]), np.array([[2.0]]), 0.5)
    assert np.allclose(mid.support, [[1.0]]) and np.allclose(mid.weights, [1.0])


def test_mccann_endpoints(rng):
    x, y = rng.standard_normal((4, 2)), rng.standard_normal((3, 2))
    a, b = make_histogram(rng.random(4)), make_histogram(rng.random(3))
    C = ((x[:, None] - y[None]) ** 2).sum(-1)
    cp = solve_exact(C, a, b).coupling
    m0 = mccann_interpolate(cp, x, y, 0.0)
    assert np.allclose(m0.support, x) and np.allclose(m0.weights, a)
    m1 = mccann_interpolate(cp, x, y, 1.0)
    order = [int(np.argmin(((y - s) ** 2).sum(1))) for s in m1.support]
    assert sorted(order) == [0, 1, 2]
    assert np.allclose(m1.support, y[order]) and np.allclose(m1.weights, b[order])
