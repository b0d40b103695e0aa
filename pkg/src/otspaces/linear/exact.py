"""Exact linear OT: the simplex wrapper, north-west corner rule and 1D closed form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFinite, ShapeMismatch
from ..measures import Coupling, as_histogram
from .simplex import transport_simplex


@dataclass(frozen=True)
class OtSolution:
    """Result of a linear OT solve.

    ``dual_row``/``dual_col`` are the Kantorovich potentials (alpha, beta).
    Entropic solvers report their log-domain potentials there.
    """

    coupling: Coupling
    cost: float
    iterations: int
    dual_row: np.ndarray | None = None
    dual_col: np.ndarray | None = None

    @property
    def plan(self) -> np.ndarray:
        return self.coupling.plan


def _check_cost(cost, a, b) -> np.ndarray:
    C = np.asarray(cost, dtype=float)
    if C.ndim != 2 or C.shape != (a.shape[0], b.shape[0]):
        raise ShapeMismatch(f"cost shape {C.shape} vs histograms {a.shape[0]}, {b.shape[0]}")
    if not np.all(np.isfinite(C)):
        raise NonFinite("cost matrix has non-finite entries")
    return C


def solve_exact(cost, a=None, b=None, pivot_rule: str = "dantzig") -> OtSolution:
    """Exact optimal transport by the transportation simplex.

    Parameters
    ----------
    cost : (n, m) array
        Ground cost.
    a, b : arrays, optional
        Marginals, uniform when omitted. They are renormalized.
    pivot_rule : {"dantzig", "bland"}
        Entering-cell rule. Both break ties by lowest row-major index, so the
        output is a deterministic function of the inputs.

    Returns
    -------
    OtSolution
        Extreme-point plan (at most n + m - 1 nonzeros) with duals satisfying
        ``alpha_i + beta_j <= C_ij`` and equality on the basis.
    """
    C0 = np.asarray(cost, dtype=float)
    a = as_histogram(a, C0.shape[0] if C0.ndim == 2 else None)
    b = as_histogram(b, C0.shape[1] if C0.ndim == 2 else None)
    C = _check_cost(C0, a, b)
    plan, alpha, beta, pivots = transport_simplex(C, a, b, pivot_rule=pivot_rule)
    return OtSolution(Coupling(plan, a, b), float(np.sum(C * plan)), pivots, alpha, beta)


def _staircase(a, b):
    """North-west corner fill; returns the n + m - 1 visited cells and masses."""
    n, m = len(a), len(b)
    cells = []
    i = j = 0
    ra, rb = a[0], b[0]
    while True:
        x = max(min(ra, rb), 0.0)
        cells.append((i, j, x))
        ra -= x
        rb -= x
        if i == n - 1 and j == m - 1:
            break
        if (ra <= rb and i < n - 1) or j == m - 1:
            i += 1
            ra = a[i]
        else:
            j += 1
            rb = b[j]
    return cells


def north_west_corner(a, b) -> Coupling:
    """Greedy fill from the top-left cell. Optimal for costs with the Monge property."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    plan = np.zeros((len(a), len(b)))
    for i, j, x in _staircase(a, b):
        plan[i, j] += x
    return Coupling(plan, a, b)


def is_monge(cost, slack: float = 1e-12) -> bool:
    """True when c_ij + c_(i+1)(j+1) <= c_(i+1)j + c_i(j+1) for every adjacent 2x2 block."""
    C = np.asarray(cost, dtype=float)
    if C.shape[0] < 2 or C.shape[1] < 2:
        return True
    lhs = C[:-1, :-1] + C[1:, 1:]
    rhs = C[1:, :-1] + C[:-1, 1:]
    return bool(np.all(lhs <= rhs + slack))


def _staircase_duals(C, cells):
    n, m = C.shape
    alpha = np.full(n, np.nan)
    beta = np.full(m, np.nan)
    alpha[0] = 0.0
    for i, j, _ in cells:
        if np.isnan(beta[j]):
            beta[j] = C[i, j] - alpha[i]
        elif np.isnan(alpha[i]):
            alpha[i] = C[i, j] - beta[j]
    return alpha, beta


def wasserstein_1d(xs, ys, a=None, b=None, p: int = 2) -> OtSolution:
    """Monotone rearrangement between two 1D measures, cost sum |x - y|^p pi.

    Inputs need not be sorted: they are stable-sorted internally and the
    returned plan is indexed like the inputs. Duals come from the staircase
    basis and are optimal because |x - y|^p (p >= 1) is Monge on sorted data.
    """
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    a = as_histogram(a, x.size)
    b = as_histogram(b, y.size)
    sx = np.argsort(x, kind="stable")
    sy = np.argsort(y, kind="stable")
    cells = _staircase(a[sx], b[sy])
    Cs = np.abs(x[sx][:, None] - y[sy][None, :]) ** p
    alpha_s, beta_s = _staircase_duals(Cs, cells)
    plan = np.zeros((x.size, y.size))
    cost = 0.0
    for i, j, mass in cells:
        plan[sx[i], sy[j]] += mass
        cost += mass * Cs[i, j]
    alpha = np.empty_like(alpha_s)
    beta = np.empty_like(beta_s)
    alpha[sx] = alpha_s
    beta[sy] = beta_s
    return OtSolution(Coupling(plan, a, b), float(cost), len(cells), alpha, beta)


def wasserstein_1d_cost(x, y, a=None, b=None, p: int = 2) -> np.ndarray:
    """Vectorized W_p^p between 1D measures via quantile functions.

    ``x`` is (n,) or (n, L) and ``y`` is (m,) or (m, L): each column is an
    independent problem. Returns a scalar or a length-L array.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x, y = x[:, None], y[:, None]
    n, m = x.shape[0], y.shape[0]
    a = as_histogram(a, n)
    b = as_histogram(b, m)
    sx = np.argsort(x, axis=0, kind="stable")
    sy = np.argsort(y, axis=0, kind="stable")
    xs = np.take_along_axis(x, sx, axis=0)
    ys = np.take_along_axis(y, sy, axis=0)
    ca = np.cumsum(a[sx], axis=0)
    cb = np.cumsum(b[sy], axis=0)
    out = np.empty(x.shape[1])
    for k in range(x.shape[1]):
        qa, qb = ca[:, k], cb[:, k]
        t = np.unique(np.concatenate([qa, qb]))
        t = t[t > 0]
        lo = np.concatenate([[0.0], t[:-1]])
        mid = (lo + t) / 2
        ix = np.minimum(np.searchsorted(qa, mid), n - 1)
        iy = np.minimum(np.searchsorted(qb, mid), m - 1)
        out[k] = np.sum((t - lo) * np.abs(xs[ix, k] - ys[iy, k]) ** p)
    return out[0] if squeeze else out
