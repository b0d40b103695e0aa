"""CO-Optimal Transport between data matrices.

COOT couples samples (rows) and features (columns) at once:

    min over pi_s, pi_v of sum_{i,j,k,l} L(X_ik, X'_jl) pi_s[i,j] pi_v[k,l].

For a fixed pi_v the problem in pi_s is a linear OT problem and vice versa,
so the block coordinate descent below solves one LP (or Sinkhorn problem)
per half sweep. The squared loss uses the factored cost
f(X) + f(X') - 2 X pi X'^T, the absolute loss a chunked direct sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BadParams, LengthMismatch, ShapeMismatch
from .gromov import GwProblem, gw_cost, gw_tensor_apply
from .linear.exact import solve_exact
from .linear.sinkhorn import SinkhornParams, sinkhorn
from .measures import Coupling, DataMatrix

LOSSES = ("sq", "abs")
ABS_CHUNK = 2_000_000


@dataclass(frozen=True)
class CootSolution:
    pi_samples: Coupling
    pi_features: Coupling
    cost: float
    sweeps: int
    objective: tuple = field(default=(), repr=False)


def _as_data(X) -> DataMatrix:
    return X if isinstance(X, DataMatrix) else DataMatrix(X)


def _mat(P):
    return P.plan if isinstance(P, Coupling) else np.asarray(P, dtype=float)


def sample_cost(X, Xp, pi_v, loss: str = "sq") -> np.ndarray:
    """G[i, j] = sum_{k,l} L(X_ik, X'_jl) pi_v[k, l]  (n x n')."""
    X = np.asarray(X, dtype=float)
    Xp = np.asarray(Xp, dtype=float)
    pi_v = _mat(pi_v)
    if pi_v.shape != (X.shape[1], Xp.shape[1]):
        raise ShapeMismatch(f"feature coupling {pi_v.shape} vs data {X.shape}, {Xp.shape}")
    if loss == "sq":
        v, vp = pi_v.sum(1), pi_v.sum(0)
        return np.add.outer((X ** 2) @ v, (Xp ** 2) @ vp) - 2 * X @ pi_v @ Xp.T
    if loss == "abs":
        n = X.shape[0]
        per_row = max(1, ABS_CHUNK // max(Xp.size * X.shape[1], 1))
        G = np.empty((n, Xp.shape[0]))
        for s in range(0, n, per_row):
            diff = np.abs(X[s:s + per_row, None, :, None] - Xp[None, :, None, :])
            G[s:s + per_row] = np.einsum("ijkl,kl->ij", diff, pi_v)
        return G
    raise BadParams(f"unknown loss {loss!r}")


def feature_cost(X, Xp, pi_s, loss: str = "sq") -> np.ndarray:
    """G[k, l] = sum_{i,j} L(X_ik, X'_jl) pi_s[i, j]  (d x d')."""
    return sample_cost(np.asarray(X, dtype=float).T, np.asarray(Xp, dtype=float).T, pi_s, loss)


def coot_cost(X, Xp, pi_s, pi_v, loss: str = "sq") -> float:
    """<L(X, X') (x) pi_s, pi_v>."""
    X = X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    Xp = Xp.values if isinstance(Xp, DataMatrix) else np.asarray(Xp, dtype=float)
    Ps = _mat(pi_s)
    if Ps.shape != (X.shape[0], Xp.shape[0]):
        raise ShapeMismatch(f"sample coupling {Ps.shape} vs data {X.shape}, {Xp.shape}")
    return float(np.sum(sample_cost(X, Xp, pi_v, loss) * Ps))


def naive_coot_cost(X, Xp, pi_s, pi_v, loss: str = "sq") -> float:
    """Direct 4-index sum, for checks on small inputs."""
    X = np.asarray(X, dtype=float)
    Xp = np.asarray(Xp, dtype=float)
    diff = X[:, None, :, None] - Xp[None, :, None, :]
    L = diff ** 2 if loss == "sq" else np.abs(diff)
    return float(np.einsum("ijkl,ij,kl->", L, _mat(pi_s), _mat(pi_v)))


def _kl(P, a, b) -> float:
    """KL(P | a b^T) for a plan with marginals (a, b)."""
    m = P > 0
    return float(np.sum(P[m] * np.log(P[m] / np.outer(a, b)[m])))


def _ot_step(G, a, b, eps, inner: SinkhornParams | None, pivot_rule):
    if eps == 0:
        return solve_exact(G, a, b, pivot_rule).plan
    # relative entropy to a b^T: Gibbs kernel (a b^T) * exp(-G / eps)
    with np.errstate(divide="ignore"):
        prior = np.log(np.outer(a, b))
    prior[~np.isfinite(prior)] = 0.0  # zero-mass rows/cols are dropped by sinkhorn
    params = inner or SinkhornParams(epsilon=eps)
    if params.epsilon != eps:
        params = SinkhornParams(eps, params.max_iter, params.marginal_tol, params.log_stabilize)
    return sinkhorn(G - eps * prior, a, b, params).plan


def coot_bcd(X, Xp, loss: str = "sq", eps_s: float = 0.0, eps_v: float = 0.0,
             max_sweeps: int = 100, tol: float = 1e-9, init=None,
             pivot_rule: str = "dantzig", inner: SinkhornParams | None = None) -> CootSolution:
    """COOT by block coordinate descent.

    Each sweep updates the sample coupling for the current feature coupling,
    then the feature coupling for the new sample coupling (exact LP when the
    matching epsilon is 0, Sinkhorn with prior w w'^T otherwise). Stops when
    ||pi_v - pi_v_prev||_F <= tol or after ``max_sweeps``.

    ``init`` is an optional ``(pi_s, pi_v)`` pair; products of the weights by
    default. ``objective`` holds the regularised objective
    cost + eps_s KL(pi_s | w w'^T) + eps_v KL(pi_v | v v'^T) at the start and
    after every half sweep. ``cost`` is the unregularised COOT cost.
    """
    X, Xp = _as_data(X), _as_data(Xp)
    if loss not in LOSSES:
        raise BadParams(f"unknown loss {loss!r}")
    if eps_s < 0 or eps_v < 0:
        raise BadParams("entropic weights must be >= 0")
    w, wp = X.sample_weights, Xp.sample_weights
    v, vp = X.feature_weights, Xp.feature_weights
    if init is None:
        Ps, Pv = np.outer(w, wp), np.outer(v, vp)
    else:
        Ps, Pv = (np.array(_mat(P), dtype=float) for P in init)
        if Ps.shape != (len(w), len(wp)) or Pv.shape != (len(v), len(vp)):
            raise ShapeMismatch("init couplings have the wrong shape")
    A, B = X.values, Xp.values

    def objective(Ps, Pv, Gs=None):
        Gs = sample_cost(A, B, Pv, loss) if Gs is None else Gs
        val = float(np.sum(Gs * Ps))
        if eps_s:
            val += eps_s * _kl(Ps, w, wp)
        if eps_v:
            val += eps_v * _kl(Pv, v, vp)
        return val

    history = [objective(Ps, Pv)]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        Gs = sample_cost(A, B, Pv, loss)
        Ps = _ot_step(Gs, w, wp, eps_s, inner, pivot_rule)
        history.append(objective(Ps, Pv, Gs))
        Gv = feature_cost(A, B, Ps, loss)
        Pv_new = _ot_step(Gv, v, vp, eps_v, inner, pivot_rule)
        history.append(objective(Ps, Pv_new))
        change = np.linalg.norm(Pv_new - Pv)
        Pv = Pv_new
        if change <= tol:
            break
    cost = max(coot_cost(A, B, Ps, Pv, loss), 0.0)
    return CootSolution(Coupling(np.maximum(Ps, 0), w, wp), Coupling(np.maximum(Pv, 0), v, vp),
                        cost, sweeps, tuple(history))


def coot_dc_gw(C, Cp, w=None, wp=None, max_iter: int = 100, tol: float = 1e-9, init=None,
               pivot_rule: str = "dantzig", callback=None):
    """Single-coupling fixed point pi <- OT(w, w', L(C, C') (x) pi) for GW.

    Meant for Gram or squared-Euclidean matrices, where the GW objective is
    concave and this is a DC iteration. Each iterate is an LP vertex. Stops
    when max|pi_k - pi_{k-1}| <= tol. ``callback(k, pi_k)`` sees every iterate.
    Returns ``(coupling, gw_cost)``.
    """
    prob = GwProblem(C, Cp, w, wp)
    a, b = prob.a, prob.b
    P = np.outer(a, b) if init is None else np.array(_mat(init), dtype=float)
    for k in range(1, max_iter + 1):
        P_new = solve_exact(gw_tensor_apply(prob, P), a, b, pivot_rule).plan
        change = np.abs(P_new - P).max()
        P = P_new
        if callback is not None:
            callback(k, P)
        if change <= tol:
            break
    return Coupling(P, a, b), gw_cost(prob, P)


def _cluster_once(X: DataMatrix, g, m, Xc, eps, sweeps, inner_sweeps, tol):
    ws, wv = np.full(g, 1.0 / g), np.full(m, 1.0 / m)
    init = None
    history = []
    for _ in range(sweeps):
        target = DataMatrix(Xc, ws, wv)
        sol = coot_bcd(X, target, "sq", eps[0], eps[1], inner_sweeps, tol, init=init)
        Ps, Pv = sol.pi_samples.plan, sol.pi_features.plan
        history.append(sol.cost)
        Xc = g * m * Ps.T @ X.values @ Pv
        history.append(coot_cost(X.values, Xc, Ps, Pv))
        if init is not None and np.abs(Ps - init[0]).max() <= tol and np.abs(Pv - init[1]).max() <= tol:
            break
        init = (Ps, Pv)
    return Xc, Ps, Pv, history


def cocluster(X, g: int, m: int, eps=(0.0, 0.0), seed: int = 0, sweeps: int = 20,
              restarts: int = 5, inner_sweeps: int = 100, tol: float = 1e-9, init=None,
              log: bool = False):
    """Co-clustering by COOT against a small g x m summary matrix Xc.

    Alternates the COOT couplings between X and Xc (uniform weights on Xc)
    with the update Xc = g m pi_s^T X pi_v, the minimiser for fixed couplings.
    Xc starts from a seeded standard normal draw (or ``init``), and the run
    with the lowest final objective among ``restarts`` wins. Row and column
    assignments are the argmax of each row of pi_s and pi_v.

    Returns ``(Xc, row_assign, col_assign)``, plus a dict with the objective
    trace of the winning run when ``log=True``.
    """
    X = _as_data(X)
    n, d = X.shape
    if not (1 <= g <= n and 1 <= m <= d):
        raise BadParams("need 1 <= g <= n and 1 <= m <= d")
    eps = (float(eps), float(eps)) if np.isscalar(eps) else tuple(eps)
    rng = np.random.default_rng(seed)
    best = None
    starts = [np.asarray(init, dtype=float)] if init is not None else []
    starts += [rng.standard_normal((g, m)) for _ in range(max(restarts - len(starts), 0))]
    for Xc0 in starts:
        run = _cluster_once(X, g, m, Xc0, eps, sweeps, inner_sweeps, tol)
        if best is None or run[3][-1] < best[3][-1]:
            best = run
    Xc, Ps, Pv, history = best
    rows, cols = Ps.argmax(1), Pv.argmax(1)
    if log:
        return Xc, rows, cols, {"objective": history}
    return Xc, rows, cols


def _error_rate(true, pred) -> float:
    true = np.asarray(true).ravel()
    pred = np.asarray(pred).ravel()
    if true.shape != pred.shape:
        raise LengthMismatch("partitions cover different index sets")
    if true.size == 0:
        return 0.0
    ut, ti = np.unique(true, return_inverse=True)
    up, pi = np.unique(pred, return_inverse=True)
    conf = np.zeros((len(up), len(ut)))
    np.add.at(conf, (pi, ti), 1)
    r, c = linear_sum_assignment(conf, maximize=True)
    return 1.0 - conf[r, c].sum() / true.size


def cce(z_true, w_true, z_hat, w_hat) -> float:
    """Co-clustering error e_r + e_c - e_r e_c after best label matching on each side."""
    er = _error_rate(z_true, z_hat)
    ec = _error_rate(w_true, w_hat)
    return combine_errors(er, ec)


def combine_errors(er: float, ec: float) -> float:
    return er + ec - er * ec


def label_propagate(pi_s, Ys) -> np.ndarray:
    """Target label scores pi_s^T Ys, each row renormalised to sum to 1."""
    P = _mat(pi_s)
    Ys = np.asarray(Ys, dtype=float)
    if Ys.ndim != 2 or Ys.shape[0] != P.shape[0]:
        raise ShapeMismatch(f"labels {Ys.shape} vs coupling {P.shape}")
    Yt = P.T @ Ys
    s = Yt.sum(1, keepdims=True)
    return np.divide(Yt, s, out=np.zeros_like(Yt), where=s > 0)


def mask_cost(cost, source_labels, target_labels, factor: float = 1e6) -> np.ndarray:
    """Penalise pairs whose known labels differ.

    Labels < 0 mean unknown. Entries (i, j) with both labels known and
    different are set to ``factor * max(cost)``.
    """
    C = np.array(cost, dtype=float)
    ys = np.asarray(source_labels).ravel()
    yt = np.asarray(target_labels).ravel()
    if C.shape != (ys.size, yt.size):
        raise ShapeMismatch("labels do not match the cost shape")
    bad = (ys[:, None] >= 0) & (yt[None, :] >= 0) & (ys[:, None] != yt[None, :])
    top = float(C.max()) if C.size else 0.0
    C[bad] = factor * top if top > 0 else factor
    return C
