"""Entropic OT: Sinkhorn iterations and the Sinkhorn divergence."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import BadParams, NonFinite
from ..measures import Coupling, as_histogram
from .exact import OtSolution, _check_cost


@dataclass(frozen=True)
class SinkhornParams:
    epsilon: float
    max_iter: int = 10_000
    marginal_tol: float = 1e-9
    log_stabilize: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise BadParams("epsilon must be positive")
        if not self.marginal_tol > 0:
            raise BadParams("marginal_tol must be positive")
        if self.max_iter < 1:
            raise BadParams("max_iter must be >= 1")


def entropy(plan) -> float:
    """H(P) = -sum P (log P - 1), with 0 log 0 = 0."""
    P = np.asarray(plan, dtype=float)
    pos = P[P > 0]
    return float(-np.sum(pos * (np.log(pos) - 1.0)))


def entropic_objective(cost, plan, epsilon: float) -> float:
    """<C, P> - eps H(P)."""
    return float(np.sum(np.asarray(cost) * plan) - epsilon * entropy(plan))


def _as_params(params, epsilon):
    if params is None:
        if epsilon is None:
            raise BadParams("give either params or epsilon")
        return SinkhornParams(epsilon)
    return params


def _sinkhorn_log(C, a, b, eps, max_iter, tol):
    la, lb = np.log(a), np.log(b)
    f = np.zeros(len(a))
    g = np.zeros(len(b))
    err = np.inf
    it = 0
    while it < max_iter:
        it += 1
        f = eps * (la - logsumexp((g[None, :] - C) / eps, axis=1))
        g = eps * (lb - logsumexp((f[:, None] - C) / eps, axis=0))
        logP = (f[:, None] + g[None, :] - C) / eps
        err = np.abs(np.exp(logsumexp(logP, axis=1)) - a).max()
        if not np.isfinite(err):
            raise NonFinite("log-domain Sinkhorn produced non-finite values")
        if err <= tol:
            break
    return np.exp(logP), f, g, it, err


def _sinkhorn_plain(C, a, b, eps, max_iter, tol):
    K = np.exp(-C / eps)
    u = np.ones(len(a))
    v = np.ones(len(b))
    err = np.inf
    it = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while it < max_iter:
            it += 1
            u = a / (K @ v)
            v = b / (K.T @ u)
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise NonFinite(f"Sinkhorn scalings diverged at iteration {it}")
            err = np.abs(u * (K @ v) - a).max()
            if err <= tol:
                break
        P = u[:, None] * K * v[None, :]
        f, g = eps * np.log(u), eps * np.log(v)
    return P, f, g, it, err


def sinkhorn(cost, a=None, b=None, params: SinkhornParams | None = None,
             epsilon: float | None = None) -> OtSolution:
    """Entropic OT, min <C, P> - eps H(P) over couplings of (a, b).

    The plan has the form diag(u) exp(-C/eps) diag(v). With ``log_stabilize``
    (default) the iterations run on the potentials f = eps log u and
    g = eps log v through log-sum-exp, so nothing under- or overflows for small
    eps. Rows and columns with zero mass are dropped and get zero plan.

    The reported ``cost`` is the transport part <C, P>. ``dual_row`` and
    ``dual_col`` hold f and g (-inf on zero-mass entries).
    """
    params = _as_params(params, epsilon)
    C0 = np.asarray(cost, dtype=float)
    a = as_histogram(a, C0.shape[0] if C0.ndim == 2 else None)
    b = as_histogram(b, C0.shape[1] if C0.ndim == 2 else None)
    C = _check_cost(C0, a, b)
    ri = np.flatnonzero(a > 0)
    ci = np.flatnonzero(b > 0)
    Cr = C[np.ix_(ri, ci)]
    solver = _sinkhorn_log if params.log_stabilize else _sinkhorn_plain
    P, f, g, it, _ = solver(Cr, a[ri], b[ci], params.epsilon, params.max_iter, params.marginal_tol)
    plan = np.zeros(C.shape)
    plan[np.ix_(ri, ci)] = P
    fr = np.full(len(a), -np.inf)
    gc = np.full(len(b), -np.inf)
    fr[ri], gc[ci] = f, g
    return OtSolution(Coupling(plan, a, b), float(np.sum(Cr * P)), it, fr, gc)


def sinkhorn_divergence(cost_xy, cost_xx, cost_yy, a=None, b=None,
                        params: SinkhornParams | None = None, epsilon: float | None = None) -> float:
    """Debiased entropic cost T(mu, nu) - T(mu, mu)/2 - T(nu, nu)/2 with T = <C,P> - eps H(P)."""
    params = _as_params(params, epsilon)
    eps = params.epsilon

    def value(C, p, q):
        sol = sinkhorn(C, p, q, params)
        return entropic_objective(C, sol.plan, eps)

    return value(cost_xy, a, b) - 0.5 * value(cost_xx, a, a) - 0.5 * value(cost_yy, b, b)
