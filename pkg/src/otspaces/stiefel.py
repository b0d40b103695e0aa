"""Gradient descent on the Stiefel manifold V_p(R^q) = {B in R^{q x p}: B^T B = I}."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadParams, LineSearchFailure

MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class StiefelOptParams:
    max_iter: int = 500
    grad_tol: float = 1e-8
    step_init: float = 1.0
    backtrack_ratio: float = 0.5
    armijo: float = 1e-4

    def __post_init__(self):
        if self.max_iter < 1 or self.grad_tol <= 0 or self.step_init <= 0:
            raise BadParams("Stiefel parameters must be positive")
        if not 0 < self.backtrack_ratio < 1:
            raise BadParams("backtrack_ratio must lie in (0, 1)")


def qr_retraction(B) -> np.ndarray:
    """Q factor of the thin QR decomposition, with columns signed so diag(R) >= 0."""
    Q, R = np.linalg.qr(B)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def pad_identity(q: int, p: int) -> np.ndarray:
    """[I_p; 0], the zero-padding embedding of R^p into R^q."""
    B = np.zeros((q, p))
    B[:p, :p] = np.eye(p)
    return B


def random_stiefel(q: int, p: int, rng) -> np.ndarray:
    return qr_retraction(rng.standard_normal((q, p)))


def riemannian_gradient(B, G) -> np.ndarray:
    """Projection of the Euclidean gradient onto the tangent space at B."""
    S = B.T @ G
    return G - B @ ((S + S.T) / 2)


def stiefel_minimize(fun: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
                     shape, params: StiefelOptParams | None = None, init=None,
                     strict: bool = True):
    """Minimize ``fun`` over q x p matrices with orthonormal columns.

    Steepest descent along the Riemannian gradient, QR retraction and Armijo
    backtracking. The value never increases, so the result is at least as
    good as ``init``. Stops when the Riemannian gradient norm is at most
    ``grad_tol`` or after ``max_iter`` steps. Returns ``(B, value)``.

    If 60 backtracks find no Armijo step but the smallest trial does not
    increase the value, the iterate is at the numerical floor and is
    returned. Otherwise LineSearchFailure is raised, unless ``strict`` is
    False, in which case the current iterate is returned. Non-strict mode is
    meant for piecewise-smooth objectives, where a kink can make the gradient
    a non-descent direction.
    """
    params = params or StiefelOptParams()
    q, p = shape
    if p > q:
        raise BadParams("Stiefel manifold needs p <= q")
    B = pad_identity(q, p) if init is None else qr_retraction(np.asarray(init, dtype=float))
    f = float(fun(B))
    for _ in range(params.max_iter):
        xi = riemannian_gradient(B, grad(B))
        gnorm2 = float(np.sum(xi * xi))
        if np.sqrt(gnorm2) <= params.grad_tol:
            break
        t = params.step_init
        for _ in range(MAX_BACKTRACKS):
            cand = qr_retraction(B - t * xi)
            fc = float(fun(cand))
            if fc <= f - params.armijo * t * gnorm2:
                break
            t *= params.backtrack_ratio
        else:
            if fc <= f:
                B, f = cand, fc
                break
            if strict:
                raise LineSearchFailure("no Armijo step after 60 backtracks")
            break
        B, f = cand, fc
    return B, f
