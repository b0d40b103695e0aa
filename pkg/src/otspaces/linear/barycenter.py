"""Free-support Wasserstein barycenter and displacement interpolation."""
from __future__ import annotations

import numpy as np

from ..errors import BadParams, ShapeMismatch
from ..measures import Coupling, DiscreteMeasure, as_histogram
from .exact import solve_exact
from .sinkhorn import SinkhornParams, sinkhorn


def sq_euclidean(X, Y) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at 0."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    D = (X ** 2).sum(1)[:, None] + (Y ** 2).sum(1)[None, :] - 2 * X @ Y.T
    return np.maximum(D, 0.0)


def _merge_atoms(points, weights, thresh=1e-15):
    keep = weights > thresh
    points, weights = points[keep], weights[keep]
    index = {}
    rows, mass = [], []
    for p, w in zip(points, weights):
        key = p.tobytes()
        if key in index:
            mass[index[key]] += w
        else:
            index[key] = len(rows)
            rows.append(p)
            mass.append(w)
    return np.array(rows), np.array(mass)


def mccann_interpolate(coupling, xs, ys, t: float) -> DiscreteMeasure:
    """Displacement interpolation: mass P_ij at (1 - t) x_i + t y_j.

    Atoms with mass <= 1e-15 are dropped and coinciding atoms merged.
    """
    P = coupling.plan if isinstance(coupling, Coupling) else np.asarray(coupling, dtype=float)
    X = np.asarray(xs, dtype=float)
    Y = np.asarray(ys, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if P.shape != (X.shape[0], Y.shape[0]) or X.shape[1] != Y.shape[1]:
        raise ShapeMismatch(f"coupling {P.shape} vs supports {X.shape}, {Y.shape}")
    if not 0.0 <= t <= 1.0:
        raise BadParams("t must lie in [0, 1]")
    I, J = np.nonzero(P > 1e-15)
    pts = (1 - t) * X[I] + t * Y[J]
    support, mass = _merge_atoms(pts, P[I, J])
    return DiscreteMeasure(support, mass)


def wasserstein_barycenter(measures, lambdas=None, k: int | None = None, init_support=None,
                           max_iter: int = 100, rel_tol: float = 1e-7, seed: int = 0,
                           sinkhorn_params: SinkhornParams | None = None, log: bool = False):
    """Free-support barycenter with k uniformly weighted atoms.

    Block coordinate descent on sum_i lambda_i <P_i, C(X, Y_i)> with squared
    Euclidean cost. The P-steps are exact OT (or Sinkhorn when
    ``sinkhorn_params`` is given). The X-step is X = diag(1/w) sum_i lambda_i P_i Y_i.
    Stops when the relative objective decrease drops below ``rel_tol``
    or after ``max_iter`` sweeps.

    ``init_support`` (k x d) sets the starting atoms. Otherwise k atoms are
    drawn without replacement from the pooled input supports, with probability
    proportional to lambda_i * weight (seeded).

    With ``log=True`` returns ``(barycenter, {"objective": [...], "couplings": [...]})``.
    """
    if not measures:
        raise BadParams("need at least one measure")
    K = len(measures)
    lam = as_histogram(lambdas, K)
    d = measures[0].dim
    if any(mu.dim != d for mu in measures):
        raise ShapeMismatch("input measures live in different dimensions")

    if init_support is not None:
        X = np.array(init_support, dtype=float).reshape(-1, d)
        k = X.shape[0]
    else:
        if k is None or k < 1:
            raise BadParams("k must be >= 1")
        pool = np.concatenate([mu.support for mu in measures])
        p = np.concatenate([l * mu.weights for l, mu in zip(lam, measures)])
        rng = np.random.default_rng(seed)
        nz = np.count_nonzero(p)
        idx = rng.choice(len(pool), size=k, replace=k > nz, p=p / p.sum())
        X = pool[idx].copy()
    w = np.full(k, 1.0 / k)

    def couplings(X):
        out = []
        for mu in measures:
            C = sq_euclidean(X, mu.support)
            sol = (solve_exact(C, w, mu.weights) if sinkhorn_params is None
                   else sinkhorn(C, w, mu.weights, sinkhorn_params))
            out.append((sol.plan, float(np.sum(C * sol.plan))))
        return out

    history = []
    plans = couplings(X)
    history.append(float(sum(l * c for l, (_, c) in zip(lam, plans))))
    for _ in range(max_iter):
        X = sum(l * P @ mu.support for l, (P, _), mu in zip(lam, plans, measures)) / w[:, None]
        plans = couplings(X)
        obj = float(sum(l * c for l, (_, c) in zip(lam, plans)))
        prev = history[-1]
        history.append(obj)
        if prev <= 0 or (prev - obj) / prev < rel_tol:
            break
    bary = DiscreteMeasure(X, w)
    if log:
        return bary, {"objective": history, "couplings": [P for P, _ in plans]}
    return bary
