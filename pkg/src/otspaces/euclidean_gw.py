"""GW between Euclidean clouds through linear alignment maps.

Both solvers alternate between an alignment matrix P (q x p) and a coupling:

* inner products, <x, x'> vs <y, y'>: P is the direction of Y^T pi^T X,
  scaled to Frobenius norm sqrt(p), and pi maximises <X P^T Y^T, pi>;
* squared distances: P = 4 Y^T pi^T X on weighted-centred data, and pi
  maximises <X P^T Y^T + x y^T, pi> with x, y the squared norms.

Each block step solves its subproblem exactly, so the surrogate objective
never decreases. Also: the 1D inner-product GW closed form and linear
Gromov-Monge between Gaussians.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, SingularCovariance
from .gromov import GwProblem, gw_cost
from .linear.exact import solve_exact, wasserstein_1d
from .linear.sinkhorn import sinkhorn
from .measures import Coupling, as_histogram, symmetrize
from .stiefel import StiefelOptParams, random_stiefel, stiefel_minimize  # noqa: F401 (re-export)

BCD_TOL = 1e-9


@dataclass(frozen=True)
class EuclideanGwSolution:
    coupling: Coupling
    alignment: np.ndarray
    cost: float
    iterations: int
    surrogate: tuple = field(default=(), repr=False)

    @property
    def plan(self) -> np.ndarray:
        return self.coupling.plan


def _as_cloud(X):
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def gram_gw_cost(X, Y, plan, a=None, b=None) -> float:
    """sum (<x_i, x_k> - <y_j, y_l>)^2 P_ij P_kl."""
    X, Y = _as_cloud(X), _as_cloud(Y)
    P = np.asarray(plan, dtype=float)
    a = P.sum(1) if a is None else a
    b = P.sum(0) if b is None else b
    return gw_cost(GwProblem(X @ X.T, Y @ Y.T, a, b), P)


def sq_distance_matrix(X) -> np.ndarray:
    X = _as_cloud(X)
    s = (X ** 2).sum(1)
    D = s[:, None] + s[None, :] - 2 * X @ X.T
    D = np.maximum((D + D.T) / 2, 0.0)
    np.fill_diagonal(D, 0.0)
    return D


def random_doubly_stochastic(a, b, rng) -> np.ndarray:
    """A coupling of (a, b) made by Sinkhorn-scaling a random positive matrix."""
    K = rng.random((len(a), len(b))) + 1e-3
    return sinkhorn(-np.log(K), a, b, epsilon=1.0).plan


def _starts(a, b, init, n_init, seed):
    starts = [np.outer(a, b) if init is None else np.asarray(init, dtype=float)]
    rng = np.random.default_rng(seed)
    starts += [random_doubly_stochastic(a, b, rng) for _ in range(n_init - 1)]
    return starts


def _inner_alignment(X, Y, P, p):
    M = Y.T @ P.T @ X
    nrm = np.linalg.norm(M)
    if nrm == 0.0:
        # degenerate cross-covariance: fall back to sqrt(p) E_11
        E = np.zeros_like(M)
        E[0, 0] = np.sqrt(p)
        return E
    return np.sqrt(p) * M / nrm


def _inner_run(X, Y, a, b, P, max_sweeps, tol):
    p = X.shape[1]
    surrogate = []
    it = 0
    for it in range(1, max_sweeps + 1):
        W = _inner_alignment(X, Y, P, p)
        S = X @ W.T @ Y.T
        surrogate.append(float(np.sum(S * P)))
        P_new = solve_exact(-S, a, b).plan
        surrogate.append(float(np.sum(S * P_new)))
        change = np.abs(P_new - P).max()
        P = P_new
        if change <= tol:
            break
    W = _inner_alignment(X, Y, P, p)
    return P, W, it, surrogate


def inner_gw_bcd(X, Y, a=None, b=None, max_sweeps: int = 200, tol: float = BCD_TOL,
                 init=None, n_init: int = 1, seed: int = 0) -> EuclideanGwSolution:
    """GW with inner-product similarities by block coordinate descent.

    Parameters
    ----------
    X, Y : (n, p) and (m, q) arrays
    a, b : weights, uniform by default
    max_sweeps, tol : stop when max|pi_k - pi_{k-1}| <= tol or after max_sweeps
    init : starting coupling (product coupling by default)
    n_init : total number of starts; the extra ones are random couplings
        obtained by Sinkhorn scaling (seeded by ``seed``). The best final cost wins.

    Returns
    -------
    EuclideanGwSolution
        ``cost`` is sum (<x_i,x_k> - <y_j,y_l>)^2 pi_ij pi_kl of the final coupling,
        ``alignment`` the matching P with ||P||_F = sqrt(p), and ``surrogate``
        the values <X P^T Y^T, pi> after each half step.
    """
    X, Y = _as_cloud(X), _as_cloud(Y)
    a = as_histogram(a, X.shape[0])
    b = as_histogram(b, Y.shape[0])
    best = None
    for P0 in _starts(a, b, init, n_init, seed):
        P, W, it, sur = _inner_run(X, Y, a, b, P0, max_sweeps, tol)
        cost = gram_gw_cost(X, Y, P, a, b)
        if best is None or cost < best.cost:
            best = EuclideanGwSolution(Coupling(P, a, b), W, cost, it, tuple(sur))
    return best


def _sq_run(X, Y, a, b, P, max_sweeps, tol):
    x = (X ** 2).sum(1)
    y = (Y ** 2).sum(1)
    xy = np.outer(x, y)
    surrogate = []
    it = 0
    for it in range(1, max_sweeps + 1):
        W = 4 * Y.T @ P.T @ X
        S = X @ W.T @ Y.T + xy
        pen = np.sum(W * W) / 8
        surrogate.append(float(np.sum(S * P)) - pen)
        P_new = solve_exact(-S, a, b).plan
        surrogate.append(float(np.sum(S * P_new)) - pen)
        change = np.abs(P_new - P).max()
        P = P_new
        if change <= tol:
            break
    return P, 4 * Y.T @ P.T @ X, it, surrogate


def sq_gw_bcd(X, Y, a=None, b=None, max_sweeps: int = 200, tol: float = BCD_TOL,
              init=None, n_init: int = 1, seed: int = 0) -> EuclideanGwSolution:
    """GW with squared Euclidean distances by block coordinate descent.

    Both clouds are centred at their weighted means. The alternation is
    P = 4 Y^T pi^T X, then pi = argmax <X P^T Y^T + x y^T, pi>. Its surrogate
    <X P^T Y^T + x y^T, pi> - ||P||^2 / 8 never decreases. ``cost`` is the GW
    cost of the final coupling with squared distance matrices. Multi-start
    works as in :func:`inner_gw_bcd`.
    """
    X, Y = _as_cloud(X), _as_cloud(Y)
    a = as_histogram(a, X.shape[0])
    b = as_histogram(b, Y.shape[0])
    Xc = X - a @ X
    Yc = Y - b @ Y
    prob = GwProblem(sq_distance_matrix(Xc), sq_distance_matrix(Yc), a, b)
    best = None
    for P0 in _starts(a, b, init, n_init, seed):
        P, W, it, sur = _sq_run(Xc, Yc, a, b, P0, max_sweeps, tol)
        cost = gw_cost(prob, P)
        if best is None or cost < best.cost:
            best = EuclideanGwSolution(Coupling(P, a, b), W, cost, it, tuple(sur))
    return best


def inner_gw_1d(xs, ys, a=None, b=None):
    """Inner-product GW between 1D measures: the better of two monotone couplings.

    The ascending coupling matches quantiles. The descending one matches
    x with the reversed order of y. Returns ``(cost, coupling, direction)``,
    preferring "ascending" on ties.
    """
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    a = as_histogram(a, x.size)
    b = as_histogram(b, y.size)
    up = wasserstein_1d(x, y, a, b).coupling
    down = wasserstein_1d(x, -y, a, b).coupling
    c_up = gram_gw_cost(x, y, up.plan, a, b)
    c_down = gram_gw_cost(x, y, down.plan, a, b)
    if c_up <= c_down:
        return c_up, up, "ascending"
    return c_down, down, "descending"


def _sorted_eigh(S):
    """Eigenpairs with nondecreasing eigenvalues and each eigenvector's first nonzero entry positive."""
    w, V = np.linalg.eigh(S)
    for k in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, k]) > 1e-12)
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    return np.clip(w, 0.0, None), V


def qpoc_objective(d_mu, d_nu):
    """F(B) = -tr(D_mu B^T D_nu B) and its Euclidean gradient -2 D_nu B D_mu."""
    d_mu = np.asarray(d_mu, dtype=float)
    d_nu = np.asarray(d_nu, dtype=float)

    def fun(B):
        return -float(np.sum(d_mu[None, :] * d_nu[:, None] * B * B))

    def grad(B):
        return -2 * d_nu[:, None] * B * d_mu[None, :]

    return fun, grad


def solve_qpoc(d_mu, d_nu, opt: StiefelOptParams | None = None, n_random: int = 4, seed: int = 0):
    """min over B in V_p(R^q) of -tr(D_mu B^T D_nu B), p = len(d_mu) <= q = len(d_nu).

    Runs the Stiefel descent from the sorted-matching start (the largest p
    eigenvalues of D_nu paired in order with D_mu) and ``n_random`` random
    starts. Returns the best ``(B, value)``.
    """
    p, q = len(d_mu), len(d_nu)
    if p > q:
        raise BadParams("need len(d_mu) <= len(d_nu)")
    fun, grad = qpoc_objective(d_mu, d_nu)
    B0 = np.zeros((q, p))
    B0[q - p + np.arange(p), np.arange(p)] = 1.0
    rng = np.random.default_rng(seed)
    best = None
    for init in [B0] + [random_stiefel(q, p, rng) for _ in range(n_random)]:
        B, val = stiefel_minimize(fun, grad, (q, p), opt, init=init)
        if best is None or val < best[1]:
            best = (B, val)
    return best


def lgm_gaussian(sigma_mu, sigma_nu, opt: StiefelOptParams | None = None, seed: int = 0):
    """Linear Gromov-Monge cost between centred Gaussians.

    cost = 4 (tr S_mu - tr S_nu)^2 + 8 (tr S_mu^2 + tr S_nu^2) + 16 min_B -tr(D_mu B^T D_nu B).
    When the dimensions agree the minimum is -tr(D_mu D_nu) with both spectra
    sorted. The map A = V_nu D_nu^1/2 D_mu^-1/2 V_mu^T is then returned too,
    which needs S_mu invertible. Otherwise the Stiefel term is solved
    numerically (a local minimum in general) and B is returned.

    Returns ``(cost, A or None, B or None)``.
    """
    Smu = symmetrize(sigma_mu)
    Snu = symmetrize(sigma_nu)
    base = 4 * (np.trace(Smu) - np.trace(Snu)) ** 2 + 8 * (np.sum(Smu * Smu) + np.sum(Snu * Snu))
    d_mu, V_mu = _sorted_eigh(Smu)
    d_nu, V_nu = _sorted_eigh(Snu)
    p, q = len(d_mu), len(d_nu)
    if p == q:
        cost = float(base - 16 * np.sum(d_mu * d_nu))
        top = max(d_mu.max(), 1e-300)
        if d_mu.min() <= 1e-10 * top:
            raise SingularCovariance("the map needs an invertible source covariance")
        A = V_nu @ np.diag(np.sqrt(d_nu) / np.sqrt(d_mu)) @ V_mu.T
        return max(cost, 0.0), A, None
    # the value is symmetric in (mu, nu), so embed the smaller space
    if p < q:
        B, val = solve_qpoc(d_mu, d_nu, opt, seed=seed)
    else:
        B, val = solve_qpoc(d_nu, d_mu, opt, seed=seed)
    return max(float(base + 16 * val), 0.0), None, B

