import itertools

import numpy as np
import pytest

from otspaces.errors import LineSearchFailure, SingularCovariance
from otspaces.euclidean_gw import (gram_gw_cost, inner_gw_1d, inner_gw_bcd, lgm_gaussian, qpoc_objective,
                                   solve_qpoc, sq_distance_matrix, sq_gw_bcd)
from otspaces.fgw import FgwParams, fgw_solve
from otspaces.linear import north_west_corner
from otspaces.measures import make_histogram
from otspaces.oracles import circle_grid, inner_product_permutation_min, stiefel_2d_grid
from otspaces.stiefel import StiefelOptParams, random_stiefel, stiefel_minimize



def test_inner_cost_matches_loops(rng):
    X, Y = rng.standard_normal((3, 2)), rng.standard_normal((4, 3))
    P = np.outer(make_histogram(rng.random(3)), make_histogram(rng.random(4)))
    Gx, Gy = X @ X.T, Y @ Y.T
    ref = sum((Gx[i, k] - Gy[j, l]) ** 2 * P[i, j] * P[k, l]
              for i in range(3) for j in range(4) for k in range(3) for l in range(4))
    assert abs(gram_gw_cost(X, Y, P) - ref) <= 1e-12 * max(ref, 1)


def test_inner_examples(rng):
    x = rng.standard_normal((5, 1))
    sol = inner_gw_bcd(x, x, init=np.eye(5) / 5)
    assert sol.cost <= 1e-14
    sol = inner_gw_bcd([[2.0]], [[0.5]])
    assert sol.cost == pytest.approx((4 - 0.25) ** 2)
    assert np.array_equal(sol.plan, [[1.0]])


def _brute_inner(X, Y):
    Gx, Gy = X @ X.T, Y @ Y.T
    return min(np.sum((Gx - Gy[np.ix_(p, p)]) ** 2) for p in itertools.permutations(range(len(X)))) / len(X) ** 2


@pytest.mark.xfail(strict=True, reason="BCD is local; 5 starts reach the global minimum on ~85% of instances")
def test_inner_best_of_five_vs_brute_force(rng):
    hits = 0
    for _ in range(20):
        X, Y = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
        hits += inner_gw_bcd(X, Y, n_init=5, seed=0).cost <= _brute_inner(X, Y) + 1e-7
    assert hits == 20


def test_inner_multistart_reaches_brute_force(rng):
    # the objective is concave in the coupling, so the permutation minimum is global
    for _ in range(20):
        X, Y = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
        brute = _brute_inner(X, Y)
        sol = inner_gw_bcd(X, Y, n_init=30, seed=0)
        assert brute - 1e-12 <= sol.cost <= brute + 1e-7


def test_inner_norm_and_monotone_surrogate(rng):
    for _ in range(10):
        X, Y = rng.standard_normal((6, 3)), rng.standard_normal((7, 2))
        sol = inner_gw_bcd(X, Y, make_histogram(rng.random(6)), make_histogram(rng.random(7)))
        assert abs(np.linalg.norm(sol.alignment) - np.sqrt(3)) <= 1e-10
        s = np.asarray(sol.surrogate)
        assert np.all(np.diff(s) >= -1e-12 * max(abs(s).max(), 1))


def test_inner_reformulation(rng):
    # J = C - 2 Z(pi) with Z(pi) = ||Y^T pi^T X||_F^2
    for _ in range(10):
        n = int(rng.integers(2, 6))
        X, Y = rng.standard_normal((n, 2)), rng.standard_normal((n, 3))
        a = b = np.full(n, 1 / n)
        P = inner_gw_bcd(X, Y).plan
        C = np.sum((X @ X.T) ** 2 * np.outer(a, a)) + np.sum((Y @ Y.T) ** 2 * np.outer(b, b))
        Z = np.sum((Y.T @ P.T @ X) ** 2)
        assert abs(gram_gw_cost(X, Y, P) - (C - 2 * Z)) <= 1e-8


def test_sq_examples(rng):
    X = rng.standard_normal((6, 2))
    assert sq_gw_bcd(X, X, init=np.eye(6) / 6).cost <= 1e-12
    th = 1.1
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    perm = rng.permutation(6)
    Y = (X @ R.T)[perm]
    P = np.zeros((6, 6))
    P[perm, np.arange(6)] = 1 / 6
    assert sq_gw_bcd(X, Y, init=P).cost <= 1e-8


def test_sq_vs_frank_wolfe_same_init(rng):
    for _ in range(5):
        X, Y = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
        P0 = north_west_corner(np.full(4, .25), np.full(4, .25)).plan
        bcd = sq_gw_bcd(X, Y, init=P0)
        Xc, Yc = X - X.mean(0), Y - Y.mean(0)
        fw = fgw_solve(None, sq_distance_matrix(Xc), sq_distance_matrix(Yc), params=FgwParams(alpha=1.0), init=P0)
        assert abs(bcd.cost - fw.cost) <= 1e-6


def test_sq_translation_invariance_and_surrogate(rng):
    X, Y = rng.standard_normal((7, 3)), rng.standard_normal((6, 2))
    a, b = make_histogram(rng.random(7)), make_histogram(rng.random(6))
    s1 = sq_gw_bcd(X, Y, a, b, n_init=3, seed=5)
    s2 = sq_gw_bcd(X + [10.0, -3.0, 2.0], Y, a, b, n_init=3, seed=5)
    assert abs(s1.cost - s2.cost) <= 1e-9
    s = np.asarray(s1.surrogate)
    assert np.all(np.diff(s) >= -1e-12 * max(abs(s).max(), 1))


def test_inner_1d_examples(rng):
    x = rng.standard_normal(6)
    c, _, d = inner_gw_1d(x, x)
    assert c <= 1e-14 and d == "ascending"
    c, _, d = inner_gw_1d(x, -x)
    assert c <= 1e-14 and d == "descending"


def test_inner_1d_vs_random_couplings(rng):
    x, y = rng.standard_normal(5), rng.standard_normal(4)
    a, b = make_histogram(rng.random(5)), make_histogram(rng.random(4))
    best, _, _ = inner_gw_1d(x, y, a, b)
    for _ in range(200):
        pa, pb = rng.permutation(5), rng.permutation(4)
        P = np.zeros((5, 4))
        P[np.ix_(pa, pb)] = north_west_corner(a[pa], b[pb]).plan
        assert best <= gram_gw_cost(x, y, P, a, b) + 1e-12


def test_inner_1d_vs_permutations(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        ref = inner_product_permutation_min(x, y)
        assert abs(inner_gw_1d(x, y)[0] - ref) <= 1e-10 * max(ref, 1)


def test_lgm_examples(rng):
    L = rng.standard_normal((3, 3))
    S = L @ L.T + np.eye(3)
    cost, A, _ = lgm_gaussian(S, S)
    assert abs(cost) <= 1e-9 * np.trace(S) ** 2 and np.allclose(A, np.eye(3))
    k = 2.5
    cost, _, _ = lgm_gaussian(k * S, S)
    ref = 4 * (k - 1) ** 2 * (np.trace(S) ** 2 + 2 * np.trace(S @ S))
    assert abs(cost - ref) <= 1e-9 * ref
    with pytest.raises(SingularCovariance):
        lgm_gaussian(np.diag([1.0, 0.0]), np.eye(2))


def test_lgm_2d_term_vs_grid(rng):
    for _ in range(5):
        d_mu, d_nu = np.sort(rng.random(2) + 0.1), np.sort(rng.random(2) + 0.1)
        fun, _ = qpoc_objective(d_mu, d_nu)
        grid, _ = stiefel_2d_grid(fun)
        assert abs(fun(np.eye(2)) - grid) <= 1e-9


def test_lgm_different_dimensions(rng):
    L = rng.standard_normal((2, 2))
    S2 = L @ L.T + 0.1 * np.eye(2)
    L = rng.standard_normal((3, 3))
    S3 = L @ L.T + 0.1 * np.eye(3)
    c23, A, B = lgm_gaussian(S2, S3)
    c32, _, _ = lgm_gaussian(S3, S2)
    assert A is None and B.shape == (3, 2) and abs(c23 - c32) <= 1e-9 * c23


def test_stiefel_constant_objective(rng):
    L = rng.standard_normal((3, 3))
    M = L @ L.T
    B, val = stiefel_minimize(lambda B: float(np.trace(B.T @ M @ B)), lambda B: 2 * M @ B, (3, 3),
                              init=random_stiefel(3, 3, rng))
    assert np.allclose(B.T @ B, np.eye(3), atol=1e-8) and abs(val - np.trace(M)) <= 1e-9


def test_stiefel_qpoc_closed_form(rng):
    for _ in range(5):
        d = np.sort(rng.random(3))
        e = np.sort(rng.random(3))
        B, val = solve_qpoc(d, e)
        assert abs(val + np.sum(d * e)) <= 1e-8
        assert np.abs(B.T @ B - np.eye(3)).max() <= 1e-8


def test_stiefel_circle(rng):
    for _ in range(5):
        d_mu = np.array([rng.random() + 0.1])
        d_nu = rng.random(2) + 0.1
        fun, grad = qpoc_objective(d_mu, d_nu)
        B, val = stiefel_minimize(fun, grad, (2, 1), StiefelOptParams(max_iter=2000),
                                  init=random_stiefel(2, 1, rng))
        grid, _ = circle_grid(fun, refine=True)
        assert abs(val - grid) <= 1e-8


def test_stiefel_value_never_above_init(rng):
    fun, grad = qpoc_objective(rng.random(2), rng.random(4))
    B0 = random_stiefel(4, 2, rng)
    _, val = stiefel_minimize(fun, grad, (4, 2), init=B0)
    assert val <= fun(B0)


def test_stiefel_line_search_failure():
    # gradient pointing the wrong way: no descent step exists
    fun = lambda B: float(B[0, 0])  # noqa: E731
    grad = lambda B: -np.array([[1.0], [0.0]])  # noqa: E731
    B0 = np.array([[np.cos(1.0)], [np.sin(1.0)]])
    with pytest.raises(LineSearchFailure):
        stiefel_minimize(fun, grad, (2, 1), init=B0)
    B, _ = stiefel_minimize(fun, grad, (2, 1), init=B0, strict=False)
    assert np.allclose(B, B0)
