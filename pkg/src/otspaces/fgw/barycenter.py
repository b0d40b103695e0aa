"""FGW barycenters of labeled graphs and k-means on top of them."""
from __future__ import annotations

import numpy as np

from ..errors import BadParams
from ..gromov import update_structure
from ..measures import StructuredObject, as_histogram
from .solver import FgwParams, feature_cost_matrix, fgw_solve


def update_features(plans, features, lambdas, h) -> np.ndarray:
    """A = diag(1/h) sum_k lambda_k P_k B_k, with the barycenter on the row side."""
    acc = sum(l * P @ B for l, P, B in zip(lambdas, plans, features))
    return acc / np.asarray(h, dtype=float)[:, None]


def _pair_solve(C, A, h, obj: StructuredObject, params, init):
    M = feature_cost_matrix(A, obj.features, "l2")
    return fgw_solve(M, C, obj.structure, h, obj.weights, params, init=init)


def fgw_barycenter(inputs, lambdas=None, N: int | None = None, h=None,
                   params: FgwParams | None = None, init: StructuredObject | None = None,
                   max_iter: int = 100, rel_tol: float = 1e-9, seed: int = 0, log: bool = False):
    """FGW barycenter with N nodes (q = 2, Euclidean features).

    Block coordinate descent over the plans, the structure C and the features A.
    Plan steps are FW solves warm-started from the previous plans, so the
    objective sum_k lambda_k FGW(bary, input_k) never increases. The C and A
    steps are the closed-form minimisers for fixed plans.

    Without ``init`` the start is a seeded random symmetric C and features
    drawn from the inputs' feature rows.
    """
    params = params or FgwParams()
    if params.q != 2:
        raise BadParams("barycenter updates need q = 2")
    if not inputs:
        raise BadParams("need at least one input")
    if any(obj.has_labels for obj in inputs):
        raise BadParams("barycenter needs real-valued features")
    K = len(inputs)
    lam = as_histogram(lambdas, K)
    if init is not None:
        C, A = np.array(init.structure), np.array(init.features, dtype=float)
        N = C.shape[0]
        h = init.weights if h is None else h
    else:
        if N is None:
            raise BadParams("give N or an initial object")
        rng = np.random.default_rng(seed)
        C = rng.random((N, N))
        C = (C + C.T) / 2
        np.fill_diagonal(C, 0.0)
        pool = np.concatenate([obj.features for obj in inputs])
        A = pool[rng.choice(len(pool), size=N, replace=len(pool) < N)].astype(float)
    h = as_histogram(h, N)
    if np.any(h <= 0):
        raise BadParams("barycenter weights must be strictly positive")

    plans = [np.outer(h, obj.weights) for obj in inputs]

    def solve_all(C, A, plans):
        sols = [_pair_solve(C, A, h, obj, params, P0) for obj, P0 in zip(inputs, plans)]
        return [s.plan for s in sols], float(sum(l * s.cost for l, s in zip(lam, sols)))

    plans, obj = solve_all(C, A, plans)
    history = [obj]
    for _ in range(max_iter):
        C = update_structure(plans, [o.structure for o in inputs], lam, h)
        A = update_features(plans, [o.features for o in inputs], lam, h)
        plans, obj = solve_all(C, A, plans)
        prev = history[-1]
        history.append(obj)
        if prev <= 0 or prev - obj <= rel_tol * prev:
            break
    bary = StructuredObject(C, A, h)
    if log:
        return bary, {"objective": history, "couplings": plans}
    return bary


def fgw_distance(x: StructuredObject, y: StructuredObject, params: FgwParams,
                 metric: str = "l2") -> float:
    """Best FGW cost from the product start and, for equal sizes, the diagonal start."""
    M = feature_cost_matrix(x.features, y.features, "label_hamming" if x.has_labels else metric)
    best = fgw_solve(M, x.structure, y.structure, x.weights, y.weights, params).cost
    if x.n == y.n:
        diag = fgw_solve(M, x.structure, y.structure, x.weights, y.weights, params, init="diagonal")
        best = min(best, diag.cost)
    return best


def fgw_kmeans(objects, K: int, N_centroid: int, params: FgwParams | None = None, seed: int = 0,
               max_iter: int = 50, barycenter_iter: int = 20, log: bool = False):
    """Lloyd iterations with FGW barycenters as centroids.

    Centroids start from K distinct objects picked by a seeded RNG. Objects
    are assigned to the centroid with the smallest FGW cost, then each
    centroid is recomputed as the barycenter of its members, warm-started from
    the previous centroid. An empty cluster is re-seeded with the object
    farthest from its current centroid. Stops when assignments no longer
    change or after ``max_iter`` rounds.

    Returns ``(assignments, centroids)``, plus a log dict with the
    within-cluster objective per round when ``log=True``.
    """
    params = params or FgwParams()
    n_obj = len(objects)
    if not 1 <= K <= n_obj:
        raise BadParams("K must be between 1 and the number of objects")
    rng = np.random.default_rng(seed)

    def as_centroid(obj):
        if obj.n == N_centroid:
            return StructuredObject(obj.structure, np.asarray(obj.features, dtype=float), obj.weights)
        return fgw_barycenter([obj], N=N_centroid, params=params, max_iter=barycenter_iter, seed=seed)

    centroids = [as_centroid(objects[i]) for i in rng.choice(n_obj, size=K, replace=False)]
    assign = None
    history = []
    for _ in range(max_iter):
        D = np.array([[fgw_distance(o, c, params) for c in centroids] for o in objects])
        new_assign = D.argmin(axis=1)
        own = D[np.arange(n_obj), new_assign]
        for k in range(K):
            if not np.any(new_assign == k):
                far = int(np.argmax(own))
                new_assign[far] = k
                own[far] = 0.0
                centroids[k] = as_centroid(objects[far])
        history.append(float(own.sum()))
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign
        for k in range(K):
            members = [objects[i] for i in np.flatnonzero(assign == k)]
            if len(members) == 1 and members[0].n == N_centroid:
                centroids[k] = as_centroid(members[0])
                continue
            centroids[k] = fgw_barycenter(members, N=N_centroid, params=params, init=centroids[k],
                                          max_iter=barycenter_iter)
    if log:
        return assign, centroids, {"objective": history}
    return assign, centroids
