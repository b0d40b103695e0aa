"""Closed-form W2 between Gaussians."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch, SingularCovariance
from ..measures import GaussianMeasure

COND_TOL = 1e-10


def sqrtm_psd(S) -> np.ndarray:
    """Symmetric square root, negative eigenvalues floored at 0."""
    w, V = np.linalg.eigh((S + S.T) / 2)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _inv_sqrtm_pd(S) -> np.ndarray:
    w, V = np.linalg.eigh((S + S.T) / 2)
    top = max(abs(w).max(), 1e-300)
    if w.min() <= COND_TOL * top:
        raise SingularCovariance(f"covariance is singular (eigenvalue ratio {w.min() / top:.3g})")
    return (V / np.sqrt(w)) @ V.T


def bures_squared(S1, S2) -> float:
    """tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2), clipped at 0."""
    r = sqrtm_psd(S1)
    cross = sqrtm_psd(r @ S2 @ r)
    return max(float(np.trace(S1) + np.trace(S2) - 2 * np.trace(cross)), 0.0)


def gaussian_w2(mu: GaussianMeasure, nu: GaussianMeasure):
    """Squared W2 between Gaussians and the optimal affine map.

    Returns ``(cost, A, shift)`` with T(x) = A x + shift pushing ``mu`` onto
    ``nu``. ``A`` is the symmetric PD matrix
    S_mu^-1/2 (S_mu^1/2 S_nu S_mu^1/2)^1/2 S_mu^-1/2. It needs S_mu invertible.
    """
    if mu.dim != nu.dim:
        raise ShapeMismatch("Gaussians live in different dimensions")
    S1, S2 = mu.covariance, nu.covariance
    r = sqrtm_psd(S1)
    r_inv = _inv_sqrtm_pd(S1)
    cross = sqrtm_psd(r @ S2 @ r)
    A = r_inv @ cross @ r_inv
    A = (A + A.T) / 2
    bures = max(float(np.trace(S1) + np.trace(S2) - 2 * np.trace(cross)), 0.0)
    cost = float(np.sum((mu.mean - nu.mean) ** 2)) + bures
    shift = nu.mean - A @ mu.mean
    return cost, A, shift
