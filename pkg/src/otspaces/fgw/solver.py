"""Fused Gromov-Wasserstein by conditional gradient (Frank-Wolfe).

Objective, for a coupling P of (h, g):

    E(P) = (1 - alpha) <M^q, P> + alpha <L(C1, C2)^q (x) P, P>

E is quadratic in P, so along a segment P + tau (P~ - P) it is a scalar
quadratic a tau^2 + b tau + E(P), and the line search is exact for every q.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import BadParams, MixedFeatureKinds, ShapeMismatch
from ..gromov import GwProblem, gw_tensor_apply
from ..linear.exact import north_west_corner, solve_exact
from ..measures import Coupling, as_histogram, symmetrize


@dataclass(frozen=True)
class FgwParams:
    alpha: float = 0.5
    q: int = 2
    max_iter: int = 1000
    rel_tol: float = 1e-9
    fw_gap_tol: float = 1e-9
    pivot_rule: str = "dantzig"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise BadParams("alpha must lie in [0, 1]")
        if self.q not in (1, 2):
            raise BadParams("q must be 1 or 2")


@dataclass(frozen=True)
class FgwSolution:
    coupling: Coupling
    cost: float
    fw_gaps: tuple = ()
    line_steps: tuple = ()
    objective: tuple = field(default=(), repr=False)

    @property
    def plan(self) -> np.ndarray:
        return self.coupling.plan

    @property
    def iterations(self) -> int:
        return len(self.line_steps)


def _is_label_kind(F) -> bool:
    return np.issubdtype(np.asarray(F).dtype, np.integer)


def feature_cost_matrix(A, B, metric: str = "l2") -> np.ndarray:
    """Pairwise feature distances d(a_i, b_j).

    ``metric`` is "l2", "l2_squared" or "label_hamming". Integer label
    vectors or WL code matrices (n x (H+1)) use "label_hamming": the number
    of coordinates where the codes differ.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if _is_label_kind(A) != _is_label_kind(B):
        raise MixedFeatureKinds("one side has discrete labels, the other real features")
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[1] != B.shape[1]:
        raise ShapeMismatch(f"feature dimensions differ: {A.shape[1]} vs {B.shape[1]}")
    if metric == "label_hamming":
        return (A[:, None, :] != B[None, :, :]).sum(-1).astype(float)
    if _is_label_kind(A):
        raise MixedFeatureKinds(f"metric {metric!r} needs real-valued features")
    A = A.astype(float)
    B = B.astype(float)
    D = (A ** 2).sum(1)[:, None] + (B ** 2).sum(1)[None, :] - 2 * A @ B.T
    D = np.maximum(D, 0.0)
    if metric == "l2_squared":
        return D
    if metric == "l2":
        return np.sqrt(D)
    raise BadParams(f"unknown metric {metric!r}")


class _Fgw:
    """Problem data with the q-th powers precomputed."""

    def __init__(self, M, C1, C2, h, g, alpha, q):
        self.alpha, self.q = alpha, q
        self.gw = GwProblem(C1, C2, h, g, p=q)
        n, m = self.gw.shape
        if M is None:
            if alpha < 1:
                raise BadParams("feature cost M is required when alpha < 1")
            self.Mq = None
        else:
            M = np.asarray(M, dtype=float)
            if M.shape != (n, m):
                raise ShapeMismatch(f"M shape {M.shape}, expected {(n, m)}")
            self.Mq = M ** q
        self.C1, self.C2 = self.gw.c1, self.gw.c2
        self.h, self.g = self.gw.a, self.gw.b

    def tensor(self, P):
        return gw_tensor_apply(self.gw, P)

    def tensor_direction(self, D):
        # D has zero marginals, so the constant part of the separable form drops out
        if self.q == 2:
            return -2 * self.C1 @ D @ self.C2
        return gw_tensor_apply(self.gw, D)

    def linear(self, P):
        return 0.0 if self.Mq is None or self.alpha == 1 else float(np.sum(self.Mq * P))

    def value(self, P, T=None):
        T = self.tensor(P) if T is None else T
        lin = self.linear(P)
        quad = float(np.sum(T * P))
        return (1 - self.alpha) * lin + self.alpha * quad

    def gradient(self, T):
        G = 2 * self.alpha * T
        if self.Mq is not None and self.alpha < 1:
            G = G + (1 - self.alpha) * self.Mq
        return G


def _step_from_coefficients(a: float, b: float) -> float:
    if a > 0:
        return float(min(max(-b / (2 * a), 0.0), 1.0))
    return 1.0 if a + b < 0 else 0.0


def fgw_line_search(state, direction, M, C1, C2, alpha: float, h=None, g=None, q: int = 2):
    """Exact step tau in [0, 1] minimizing E(P + tau (P~ - P)).

    ``state`` is the current plan P, ``direction`` the FW vertex P~. With
    D = P~ - P the restricted objective is a tau^2 + b tau + E(P), where for q = 2
    a = -2 alpha <C1 D C2, D> and
    b = <(1 - alpha) M^q + alpha c, D> - 2 alpha (<C1 D C2, P> + <C1 P C2, D>).
    If a > 0 the clipped vertex is returned. Otherwise tau = 1 when a + b < 0,
    else 0. Returns ``(tau, a, b)``.
    """
    P = np.asarray(state, dtype=float)
    D = np.asarray(direction, dtype=float) - P
    h = P.sum(1) if h is None else h
    g = P.sum(0) if g is None else g
    prob = _Fgw(M, C1, C2, h, g, alpha, q)
    return _line_search(prob, P, D, prob.tensor(P))


def _line_search(prob: _Fgw, P, D, T):
    TD = prob.tensor_direction(D)
    a = prob.alpha * float(np.sum(TD * D))
    b = 2 * prob.alpha * float(np.sum(T * D))
    if prob.Mq is not None and prob.alpha < 1:
        b += (1 - prob.alpha) * float(np.sum(prob.Mq * D))
    return _step_from_coefficients(a, b), a, b


def fgw_cost(M, C1, C2, plan, alpha: float, q: int = 2, h=None, g=None) -> float:
    """E(P) for a given plan."""
    P = plan.plan if isinstance(plan, Coupling) else np.asarray(plan, dtype=float)
    h = P.sum(1) if h is None else h
    g = P.sum(0) if g is None else g
    return max(_Fgw(M, C1, C2, h, g, alpha, q).value(P), 0.0)


def _initial_plan(init, h, g):
    if init is None or (isinstance(init, str) and init == "product"):
        return np.outer(h, g)
    if isinstance(init, str):
        if init == "diagonal":
            return north_west_corner(h, g).plan.copy()
        raise BadParams(f"unknown init {init!r}")
    P = init.plan if isinstance(init, Coupling) else init
    P = np.array(P, dtype=float)
    if P.shape != (len(h), len(g)):
        raise ShapeMismatch(f"init plan shape {P.shape}")
    return P


def fgw_solve(M, C1, C2, h=None, g=None, params: FgwParams | None = None, init=None,
              fixed_step: float | None = None,
              callback: Callable[[int, np.ndarray], None] | None = None) -> FgwSolution:
    """Fused Gromov-Wasserstein by conditional gradient.

    Parameters
    ----------
    M : (n, m) array or None
        Feature distances d(a_i, b_j). They are raised to the power q
        internally. May be None when ``alpha == 1`` (plain GW).
    C1, C2 : symmetric arrays
        Structure matrices.
    h, g : arrays, optional
        Node weights (uniform by default).
    params : FgwParams
        alpha, q, and the stopping rules: relative decrease below
        ``rel_tol``, FW gap below ``fw_gap_tol``, or ``max_iter`` iterations.
        A small gap alone does not stop the exact-step solver: stationary
        points such as the product coupling are left along the vertex
        direction when the line search finds a decrease there.
    init : None, "product", "diagonal" or array
        Starting plan. "diagonal" is the north-west corner fill of (h, g),
        i.e. diag(h) when h == g.
    fixed_step : float, optional
        Use this step instead of the exact line search.
    callback : callable, optional
        Called as ``callback(k, P_k)`` after every update.

    Returns
    -------
    FgwSolution
        The last plan, its objective, the FW gaps <P~ - P, -G>, the steps
        taken, and the objective after each iteration (starting with the
        initial plan).
    """
    params = params or FgwParams()
    C1 = symmetrize(C1)
    C2 = symmetrize(C2)
    h = as_histogram(h, C1.shape[0])
    g = as_histogram(g, C2.shape[0])
    prob = _Fgw(M, C1, C2, h, g, params.alpha, params.q)

    P = _initial_plan(init, h, g)
    T = prob.tensor(P)
    cost = prob.value(P, T)
    history, gaps, steps = [cost], [], []
    for k in range(1, params.max_iter + 1):
        G = prob.gradient(T)
        vertex = solve_exact(G, h, g, params.pivot_rule).plan
        D = vertex - P
        gap = -float(np.sum(G * D))
        gaps.append(gap)
        stationary = gap <= params.fw_gap_tol
        if stationary and fixed_step is not None:
            break
        if fixed_step is None:
            tau, _, _ = _line_search(prob, P, D, T)
        else:
            tau = float(fixed_step)
        P_new = vertex.copy() if tau == 1.0 else P + tau * D
        T_new = prob.tensor(P_new)
        new_cost = prob.value(P_new, T_new)
        if stationary and not cost - new_cost > params.rel_tol * abs(cost):
            # zero gap but no concave escape along the vertex direction
            break
        P, T = P_new, T_new
        steps.append(tau)
        history.append(new_cost)
        if callback is not None:
            callback(k, P)
        done = cost - new_cost <= params.rel_tol * abs(cost)
        cost = new_cost
        if done:
            break
    np.maximum(P, 0.0, out=P)
    return FgwSolution(Coupling(P, h, g), max(cost, 0.0), tuple(gaps), tuple(steps), tuple(history))
