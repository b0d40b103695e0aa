"""Gromov-Wasserstein: loss tensor products, entropic solver, TLB and barycenters.

For p = 2 the tensor product L(C1, C2) (x) P is computed with the separable
form c - 2 C1 P C2 where c = (C1^2) a 1^T + 1 b^T (C2^2)^T, which costs
O(n^2 m + n m^2) instead of O(n^2 m^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, ShapeMismatch, UnsupportedExponent
from .linear.exact import OtSolution, solve_exact, wasserstein_1d_cost
from .linear.sinkhorn import SinkhornParams, entropy, sinkhorn
from .measures import Coupling, as_histogram, product_coupling, symmetrize


@dataclass(frozen=True)
class GwProblem:
    c1: np.ndarray
    c2: np.ndarray
    a: np.ndarray = None
    b: np.ndarray = None
    p: int = 2

    def __post_init__(self):
        c1 = symmetrize(self.c1)
        c2 = symmetrize(self.c2)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "a", as_histogram(self.a, c1.shape[0]))
        object.__setattr__(self, "b", as_histogram(self.b, c2.shape[0]))
        if self.p not in (1, 2):
            raise UnsupportedExponent(f"exponent p={self.p}; only 1 and 2 are supported")

    @property
    def shape(self):
        return self.c1.shape[0], self.c2.shape[0]


def _plan(plan):
    return plan.plan if isinstance(plan, Coupling) else np.asarray(plan, dtype=float)


def naive_tensor_apply(C1, C2, plan, p=2) -> np.ndarray:
    """sum_{k,l} |C1[i,k] - C2[j,l]|^p P[k,l] with the full 4-index tensor."""
    L = np.abs(C1[:, None, :, None] - C2[None, :, None, :]) ** p
    return np.einsum("ijkl,kl->ij", L, plan)


def constant_term(C1, C2, a, b) -> np.ndarray:
    """c = (C1^2) a 1^T + 1 b^T (C2^2)^T, the plan-independent part for p = 2."""
    return np.add.outer((C1 ** 2) @ a, (C2 ** 2) @ b)


def gw_tensor_apply(problem: GwProblem, plan) -> np.ndarray:
    """L(C1, C2)^p (x) P as an n x m matrix.

    p = 2 uses the separable form. Its constant part is built from the
    actual marginals of P, so the result is exact for inexact couplings
    (e.g. Sinkhorn iterates) too. p = 1 falls back to the naive contraction.
    """
    P = _plan(plan)
    if P.shape != problem.shape:
        raise ShapeMismatch(f"plan shape {P.shape}, expected {problem.shape}")
    if problem.p == 2:
        return constant_term(problem.c1, problem.c2, P.sum(1), P.sum(0)) - 2 * problem.c1 @ P @ problem.c2
    if problem.p == 1:
        return naive_tensor_apply(problem.c1, problem.c2, P, 1)
    raise UnsupportedExponent(f"exponent p={problem.p}")


def gw_cost(problem: GwProblem, plan) -> float:
    """<L(C1, C2)^p (x) P, P>, clipped at 0 against rounding."""
    P = _plan(plan)
    return max(float(np.sum(gw_tensor_apply(problem, P) * P)), 0.0)


def gw_entropic(problem: GwProblem, epsilon: float, outer_iter: int = 1000,
                inner: SinkhornParams | None = None, init=None, tol: float = 1e-9,
                log: bool = False):
    """Entropic GW by projected mirror descent with step 1/eps.

    Each iteration is one Sinkhorn solve, P <- Sinkhorn(a, b, 2 L (x) P, eps),
    run to the inner tolerance. Stops when max|P_k - P_{k-1}| <= ``tol`` or
    after ``outer_iter`` iterations. The returned cost is the unregularized
    GW cost of the last iterate. With ``log=True`` also returns the
    regularized objective <L (x) P, P> - eps H(P) per iterate.
    """
    if not epsilon > 0:
        raise BadParams("epsilon must be positive")
    inner = inner or SinkhornParams(epsilon)
    if inner.epsilon != epsilon:
        inner = SinkhornParams(epsilon, inner.max_iter, inner.marginal_tol, inner.log_stabilize)
    a, b = problem.a, problem.b
    P = product_coupling(a, b).plan if init is None else _plan(init).copy()

    def reg_obj(P):
        return float(np.sum(gw_tensor_apply(problem, P) * P)) - epsilon * entropy(P)

    history = [reg_obj(P)]
    it = 0
    for it in range(1, outer_iter + 1):
        G = 2 * gw_tensor_apply(problem, P)
        P_new = sinkhorn(G, a, b, inner).plan
        change = np.abs(P_new - P).max()
        P = P_new
        history.append(reg_obj(P))
        if change <= tol:
            break
    sol = OtSolution(Coupling(P, a, b), gw_cost(problem, P), it)
    if log:
        return sol, {"objective": history}
    return sol


def tlb(problem: GwProblem):
    """Third lower bound: OT between the rows' 1D distance distributions.

    Row k of C1 weighted by a gives mu_k, row l of C2 weighted by b gives
    nu_l. The ground cost is W_p^p(mu_k, nu_l) with |.| as metric, and the
    outer problem is solved exactly. Returns ``(bound, outer_coupling)``.
    """
    C1, C2, a, b, p = problem.c1, problem.c2, problem.a, problem.b, problem.p
    n, m = problem.shape
    X = np.repeat(C1, m, axis=1)  # column k*m + l holds row k of C1
    Y = np.tile(C2, (1, n))       # column k*m + l holds row l of C2
    ground = np.asarray(wasserstein_1d_cost(X, Y, a, b, p)).reshape(n, m)
    sol = solve_exact(ground, a, b)
    return sol.cost, sol.coupling


def update_structure(plans, structures, lambdas, a) -> np.ndarray:
    """C = sum_i lambda_i P_i C_i P_i^T / (a a^T), the barycenter structure step.

    Each P_i is k x n_i with the barycenter on the row side.
    """
    a = np.asarray(a, dtype=float)
    acc = sum(l * P @ C @ P.T for l, P, C in zip(lambdas, plans, structures))
    C = acc / np.outer(a, a)
    return (C + C.T) / 2


def gw_barycenter(inputs, lambdas=None, a=None, k: int | None = None, solver: str = "fw",
                  epsilon: float | None = None, max_iter: int = 100, rel_tol: float = 1e-9,
                  init_structure=None, seed: int = 0, log: bool = False):
    """GW barycenter (p = 2) of ``inputs = [(C_i, b_i), ...]`` by block coordinate descent.

    Alternates GW solves with C fixed (Frank-Wolfe warm-started from the
    previous plans, or entropic GW) and the closed-form structure update.
    With the FW solver the objective sum_i lambda_i GW(C, C_i) is
    non-increasing. ``a`` must be strictly positive, and its length fixes k.
    """
    from .fgw.solver import FgwParams, fgw_solve

    if not inputs:
        raise BadParams("need at least one input")
    K = len(inputs)
    lam = as_histogram(lambdas, K)
    if a is None:
        if k is None:
            raise BadParams("give a or k")
        a = np.full(k, 1.0 / k)
    a = as_histogram(a)
    if np.any(a <= 0):
        raise BadParams("barycenter weights must be strictly positive")
    k = a.shape[0]
    Cs = [symmetrize(C) for C, _ in inputs]
    bs = [as_histogram(bi, C.shape[0]) for C, bi in zip(Cs, (b for _, b in inputs))]

    if init_structure is None:
        rng = np.random.default_rng(seed)
        C = rng.random((k, k))
        C = (C + C.T) / 2
        np.fill_diagonal(C, 0.0)
    else:
        C = symmetrize(init_structure)

    fw = FgwParams(alpha=1.0, max_iter=1000)
    plans = [np.outer(a, bi) for bi in bs]

    def solve_all(C, plans):
        new_plans, costs = [], []
        for Ci, bi, P0 in zip(Cs, bs, plans):
            if solver == "fw":
                sol = fgw_solve(None, C, Ci, a, bi, fw, init=P0)
                new_plans.append(sol.coupling.plan)
                costs.append(sol.cost)
            elif solver == "entropic":
                if epsilon is None:
                    raise BadParams("entropic solver needs epsilon")
                prob = GwProblem(C, Ci, a, bi)
                sol = gw_entropic(prob, epsilon, init=P0)
                new_plans.append(sol.plan)
                costs.append(sol.cost)
            else:
                raise BadParams(f"unknown solver {solver!r}")
        return new_plans, float(np.dot(lam, costs))

    plans, obj = solve_all(C, plans)
    history = [obj]
    for _ in range(max_iter):
        C = update_structure(plans, Cs, lam, a)
        plans, obj = solve_all(C, plans)
        prev = history[-1]
        history.append(obj)
        if prev <= 0 or (prev - obj) <= rel_tol * prev:
            break
    if log:
        return C, {"objective": history, "couplings": plans}
    return C
