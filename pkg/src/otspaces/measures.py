"""Core data model: histograms, measures, couplings and structured objects.

Histograms are plain read-only 1D float arrays whose entries sum to one.
The container types below are frozen dataclasses that validate and freeze
their arrays on construction, so instances can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NegativeWeight,
    NonSymmetric,
    NotPositiveSemidefinite,
    ShapeMismatch,
    ValidationError,
    ZeroMass,
)

SYM_TOL = 1e-10
CLAMP_TOL = 1e-15
HIST_TOL = 1e-13


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def make_histogram(raw) -> np.ndarray:
    """Normalize a nonnegative vector into a probability vector.

    Vectors already summing to 1 within 1e-13 are kept as they are, so
    normalizing twice (e.g. after a file round trip) is bit-exact.
    Raises NegativeWeight on negative entries and ZeroMass when the total is 0.
    """
    w = np.asarray(raw, dtype=float).ravel()
    if w.size == 0:
        raise ZeroMass("empty weight vector")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight {w.min()!r}")
    total = w.sum()
    if total <= 0:
        raise ZeroMass("weights sum to zero")
    if abs(total - 1.0) <= HIST_TOL:
        return _frozen(w)
    return _frozen(w / total)


def uniform(n: int) -> np.ndarray:
    return _frozen(np.full(n, 1.0 / n))


def as_histogram(w, n: int | None = None) -> np.ndarray:
    """Uniform weights when ``w`` is None, otherwise ``make_histogram(w)``.

    When ``n`` is given the length is checked.
    """
    if w is None:
        if n is None:
            raise ValidationError("need either weights or a length")
        return uniform(n)
    h = make_histogram(w)
    if n is not None and h.shape[0] != n:
        raise ShapeMismatch(f"histogram has length {h.shape[0]}, expected {n}")
    return h


def product_coupling(a, b) -> "Coupling":
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Coupling(np.outer(a, b), a, b)


def check_coupling(plan, a, b, tol: float = 1e-8) -> bool:
    """True when ``plan`` has marginals ``a``/``b`` and no entry below ``-tol``."""
    plan = np.asarray(plan, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if plan.ndim != 2 or plan.shape != (a.shape[0], b.shape[0]):
        raise ShapeMismatch(f"plan shape {plan.shape} vs marginals {a.shape}, {b.shape}")
    if plan.size and plan.min() < -tol:
        return False
    row = np.abs(plan.sum(axis=1) - a).max(initial=0.0)
    col = np.abs(plan.sum(axis=0) - b).max(initial=0.0)
    return bool(row <= tol and col <= tol)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud: support is n x d, weights a histogram of length n."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.support, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ShapeMismatch("support must be a matrix")
        w = as_histogram(self.weights, x.shape[0])
        object.__setattr__(self, "support", _frozen(x))
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, points, weights=None) -> "DiscreteMeasure":
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        return cls(x, as_histogram(weights, x.shape[0]))

    @property
    def n(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]


@dataclass(frozen=True)
class Coupling:
    """Transport plan together with the marginals it was built for.

    Entries in ``[-1e-15, 0)`` are clamped to zero. More negative entries are
    rejected. Marginal agreement is not enforced here (an entropic solver
    stopped at its iteration cap may be off), use :meth:`is_valid`.
    """

    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        p = np.array(self.plan, dtype=float)
        a = np.asarray(self.row_marginal, dtype=float).ravel()
        b = np.asarray(self.col_marginal, dtype=float).ravel()
        if p.ndim != 2 or p.shape != (a.shape[0], b.shape[0]):
            raise ShapeMismatch(f"plan shape {p.shape} vs marginals {a.shape}, {b.shape}")
        if p.size and p.min() < -CLAMP_TOL:
            raise ValidationError(f"plan has negative entry {p.min()!r}")
        p[p < 0] = 0.0
        object.__setattr__(self, "plan", _frozen(p))
        object.__setattr__(self, "row_marginal", _frozen(a))
        object.__setattr__(self, "col_marginal", _frozen(b))

    @property
    def shape(self):
        return self.plan.shape

    def is_valid(self, tol: float = 1e-8) -> bool:
        return check_coupling(self.plan, self.row_marginal, self.col_marginal, tol)

    def support_size(self, thresh: float = 1e-15) -> int:
        return int(np.count_nonzero(self.plan > thresh))


def symmetrize(C, tol: float = SYM_TOL) -> np.ndarray:
    """Return (C + C^T)/2, refusing matrices that are not symmetric within ``tol``."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got {C.shape}")
    if C.size and np.abs(C - C.T).max() > tol:
        raise NonSymmetric(f"asymmetry {np.abs(C - C.T).max():.3g} exceeds {tol}")
    return (C + C.T) / 2


@dataclass(frozen=True)
class StructuredObject:
    """Labeled graph: structure matrix C, node features and node weights h.

    ``features`` is either a float matrix (n x d) or a 1D integer vector of
    discrete labels.
    """

    structure: np.ndarray
    features: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        C = symmetrize(self.structure)
        n = C.shape[0]
        f = np.asarray(self.features)
        if f.ndim == 1 and np.issubdtype(f.dtype, np.integer):
            feats = _frozen(f, dtype=np.int64)
        else:
            f = np.asarray(f, dtype=float)
            if f.ndim == 1:
                f = f[:, None]
            feats = _frozen(f)
        if feats.shape[0] != n:
            raise ShapeMismatch(f"{feats.shape[0]} feature rows for {n} nodes")
        object.__setattr__(self, "structure", _frozen(C))
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "weights", as_histogram(self.weights, n))

    @property
    def n(self) -> int:
        return self.structure.shape[0]

    @property
    def has_labels(self) -> bool:
        return self.features.ndim == 1

    def permuted(self, perm) -> "StructuredObject":
        perm = np.asarray(perm)
        return StructuredObject(
            self.structure[np.ix_(perm, perm)], self.features[perm], self.weights[perm]
        )


@dataclass(frozen=True)
class DataMatrix:
    """Raw n x d data with sample weights w (n) and feature weights v (d)."""

    values: np.ndarray
    sample_weights: np.ndarray | None = None
    feature_weights: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.values, dtype=float)
        if X.ndim != 2:
            raise ShapeMismatch("data must be a matrix")
        object.__setattr__(self, "values", _frozen(X))
        object.__setattr__(self, "sample_weights", as_histogram(self.sample_weights, X.shape[0]))
        object.__setattr__(self, "feature_weights", as_histogram(self.feature_weights, X.shape[1]))

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class GaussianMeasure:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).ravel()
        S = symmetrize(self.covariance)
        if S.shape[0] != m.shape[0]:
            raise ShapeMismatch("mean and covariance dimensions differ")
        if S.size and np.linalg.eigvalsh(S).min() < -SYM_TOL:
            raise NotPositiveSemidefinite("covariance has a negative eigenvalue")
        object.__setattr__(self, "mean", _frozen(m))
        object.__setattr__(self, "covariance", _frozen(S))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]
