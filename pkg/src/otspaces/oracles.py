"""Brute-force reference computations for small inputs.

Everything here enumerates or loops directly. It exists to check the fast
solvers and is exponential or quartic in the input size.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import BadParams


def permutation_matrices(n: int):
    for perm in itertools.permutations(range(n)):
        yield np.asarray(perm), np.eye(n)[list(perm)]


def gw_double_sum(x, y) -> float:
    """sum_{i,j} ((x_i - x_j)^2 - (y_i - y_j)^2)^2 with the O(n^2) loop made explicit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = (x[:, None] - x[None, :]) ** 2
    dy = (y[:, None] - y[None, :]) ** 2
    return float(np.sum((dx - dy) ** 2))


def gw_1d_permutation_min(x, y) -> float:
    """min over all permutations s of (1/n^2) sum ((x_i - x_j)^2 - (y_s(i) - y_s(j))^2)^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n > 9:
        raise BadParams("permutation oracle limited to n <= 9")
    perms = np.array(list(itertools.permutations(range(n))))
    Yp = y[perms]                                    # (n!, n)
    dx = (x[:, None] - x[None, :]) ** 2
    dy = (Yp[:, :, None] - Yp[:, None, :]) ** 2
    return float(np.min(np.sum((dx[None] - dy) ** 2, axis=(1, 2)))) / n ** 2


def naive_gw_cost(C1, C2, plan, p: int = 2) -> float:
    """sum_{i,j,k,l} |C1_ik - C2_jl|^p P_ij P_kl by explicit loops."""
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    P = np.asarray(plan, dtype=float)
    n, m = P.shape
    total = 0.0
    for i in range(n):
        for j in range(m):
            if P[i, j] == 0:
                continue
            for k in range(n):
                for l in range(m):
                    total += abs(C1[i, k] - C2[j, l]) ** p * P[i, j] * P[k, l]
    return total


def gw_permutation_min(C1, C2, p: int = 2):
    """GW minimum over permutation couplings (uniform, equal sizes). Returns ``(cost, perm)``."""
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    n = C1.shape[0]
    best = (np.inf, None)
    for perm, _ in permutation_matrices(n):
        val = float(np.sum(np.abs(C1 - C2[np.ix_(perm, perm)]) ** p)) / n ** 2
        if val < best[0]:
            best = (val, perm)
    return best


def coot_permutation_min(X, Xp, loss: str = "sq") -> float:
    """COOT minimum over pairs of permutation couplings (uniform weights).

    Enumerates the sample permutation. For each one the best feature
    permutation is a linear assignment problem.
    """
    X = np.asarray(X, dtype=float)
    Xp = np.asarray(Xp, dtype=float)
    n, d = X.shape
    if Xp.shape != (n, d):
        raise BadParams("needs equal shapes")
    best = np.inf
    for perm, _ in permutation_matrices(n):
        Y = Xp[perm]
        diff = X[:, :, None] - Y[:, None, :]
        L = (diff ** 2 if loss == "sq" else np.abs(diff)).sum(0)
        r, c = linear_sum_assignment(L)
        best = min(best, float(L[r, c].sum()) / (n * d))
    return best


def inner_product_permutation_min(x, y) -> float:
    """min over permutations of (1/n^2) sum (x_i x_k - y_s(i) y_s(k))^2 for 1D samples."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    Gx = np.outer(x, x)
    n = len(x)
    return min(float(np.sum((Gx - np.outer(y[list(p)], y[list(p)])) ** 2))
               for p in itertools.permutations(range(n))) / n ** 2


def _o2(t, reflect):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [s, -c]]) if reflect else np.array([[c, -s], [s, c]])


def _circle(t):
    return np.array([[np.cos(t)], [np.sin(t)]])


def _grid_then_refine(fun, make, kinds, num, refine):
    grid = np.linspace(0.0, 2 * np.pi, num)
    best = (np.inf, None, None)
    for kind in kinds:
        for t in grid:
            v = fun(make(t, kind))
            if v < best[0]:
                best = (v, t, kind)
    v, t, kind = best
    if refine:
        h = grid[1] - grid[0]
        res = minimize_scalar(lambda s: fun(make(s, kind)), bounds=(t - h, t + h),
                              method="bounded", options={"xatol": 1e-12})
        if res.fun < v:
            v, t = float(res.fun), float(res.x)
    return v, make(t, kind)


def stiefel_2d_grid(fun, num: int = 3601, refine: bool = False):
    """min of ``fun`` over O(2): ``num`` angles for rotations and for reflections.

    With ``refine`` the best grid angle is polished by a bounded scalar
    search over the neighbouring grid cells. Returns ``(value, B)``.
    """
    return _grid_then_refine(fun, _o2, (False, True), num, refine)


def circle_grid(fun, num: int = 3601, refine: bool = False):
    """min of ``fun`` over unit vectors of R^2 (2 x 1 matrices) on an angle grid."""
    return _grid_then_refine(fun, lambda t, _: _circle(t), (None,), num, refine)
