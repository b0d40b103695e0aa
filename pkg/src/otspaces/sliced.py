"""Sliced Gromov-Wasserstein and sliced Wasserstein.

In 1D with n atoms and uniform weights, the squared-loss GW problem is solved
by one of two permutations of the sorted samples: the identity or the
anti-identity. Each candidate is scored in O(n) with moment sums. SGW
averages that 1D value over random directions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, LengthMismatch, ShapeMismatch, UnsupportedWeights
from .linear.exact import wasserstein_1d_cost
from .stiefel import StiefelOptParams, pad_identity, stiefel_minimize

IDENTITY = "identity"
ANTI_IDENTITY = "anti_identity"
CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class SliceConfig:
    """Projection settings.

    ``delta`` (q x p) maps the lower-dimensional cloud into the other space.
    The default is zero padding. ``directions`` (q x L) overrides the random
    draw, which is useful for single-slice checks.
    """

    num_projections: int = 50
    seed: int = 0
    delta: np.ndarray | None = None
    directions: np.ndarray | None = None

    def __post_init__(self):
        if self.num_projections < 1:
            raise BadParams("num_projections must be >= 1")


def draw_directions(dim: int, L: int, seed: int) -> np.ndarray:
    """L unit vectors in R^dim (columns): normalized Gaussians from a Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    theta = rng.standard_normal((dim, L))
    return theta / np.linalg.norm(theta, axis=0, keepdims=True)


def gw_1d_moment_cost(x, y) -> float:
    """sum_{i,j} ((x_i - x_j)^2 - (y_i - y_j)^2)^2 for paired samples, in O(n).

    Binomial expansion in power sums of x, y and the mixed sums over pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    X1, X2, X3, X4 = (np.sum(x ** k) for k in (1, 2, 3, 4))
    Y1, Y2, Y3, Y4 = (np.sum(y ** k) for k in (1, 2, 3, 4))
    return float(
        2 * n * X4 - 8 * X3 * X1 + 6 * X2 ** 2
        + 2 * n * Y4 - 8 * Y3 * Y1 + 6 * Y2 ** 2
        - 4 * X2 * Y2
        - 4 * n * np.sum(x ** 2 * y ** 2)
        + 8 * (X1 * np.sum(x * y ** 2) + Y1 * np.sum(x ** 2 * y))
        - 8 * np.sum(x * y) ** 2
    )


def _factored_cost(x, y):
    """Same double sum through u = x - y, s = x + y, column-wise for 2D inputs.

    (x_i - x_j)^2 - (y_i - y_j)^2 = (u_i - u_j)(s_i - s_j), so the sum equals
    2n S(w^2) + 4 S(w)^2 - 4 S(u^2 s) S(s) - 4 S(u s^2) S(u) + 2 S(u^2) S(s^2)
    with w = u s. It vanishes exactly whenever u = 0 or s = 0.
    """
    n = x.shape[0]
    u = x - y
    s = x + y
    w = u * s
    Su, Ss, Sw = u.sum(0), s.sum(0), w.sum(0)
    return (2 * n * (w * w).sum(0) + 4 * Sw ** 2 - 4 * (w * u).sum(0) * Ss
            - 4 * (w * s).sum(0) * Su + 2 * (u * u).sum(0) * (s * s).sum(0))


def _anti_cost(x, y):
    """Factored cost of the anti-identity pairing, bitwise symmetric in (x, y).

    Swapping the inputs only negates u, but reverses the summation order of
    the reversed pairing, so both orders are evaluated and averaged.
    """
    xr = np.ascontiguousarray(x[::-1])
    yr = np.ascontiguousarray(y[::-1])
    return 0.5 * (_factored_cost(x, yr) + _factored_cost(xr, y))


def gw_1d_uniform(xs, ys):
    """1D GW with squared loss between uniform samples of equal size.

    Returns ``(cost, chosen)`` where cost is the GW value
    (1/n^2) sum_{i,j} ((x_i - x_j)^2 - (y_s(i) - y_s(j))^2)^2 for the better of the
    identity and anti-identity pairing of the sorted samples. Ties go to
    the identity.
    """
    x = np.sort(np.asarray(xs, dtype=float).ravel())
    y = np.sort(np.asarray(ys, dtype=float).ravel())
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.shape[0]} vs {y.shape[0]} samples")
    n = x.shape[0]
    x = x - x.mean()
    y = y - y.mean()
    c_id = float(_factored_cost(x, y))
    c_anti = float(_anti_cost(x, y))
    if c_id <= c_anti:
        return max(c_id, 0.0) / n ** 2, IDENTITY
    return max(c_anti, 0.0) / n ** 2, ANTI_IDENTITY


def _check_uniform(w, n):
    if w is None:
        return
    w = np.asarray(w, dtype=float)
    if w.shape != (n,) or np.ptp(w) > 1e-12 * max(abs(w).max(), 1e-300):
        raise UnsupportedWeights("sliced GW needs uniform weights")


def _lift(X, Y, delta):
    """Bring both clouds into the larger space: X -> X delta^T (n x q)."""
    p, q = X.shape[1], Y.shape[1]
    if delta is None:
        if p <= q:
            return X @ pad_identity(q, p).T, Y
        return X, Y @ pad_identity(p, q).T
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (q, p):
        raise ShapeMismatch(f"delta must be {q} x {p}, got {delta.shape}")
    return X @ delta.T, Y


def _slices(dim, cfg: SliceConfig):
    if cfg.directions is not None:
        theta = np.asarray(cfg.directions, dtype=float)
        if theta.ndim == 1:
            theta = theta[:, None]
        if theta.shape[0] != dim:
            raise ShapeMismatch("directions have the wrong dimension")
        return theta
    return draw_directions(dim, cfg.num_projections, cfg.seed)


def _per_slice_costs(Xl, Yl, theta):
    """Min over {Id, anti-Id} of the 1D double sum, for each column of theta."""
    n = Xl.shape[0]
    L = theta.shape[1]
    chunk = max(1, CHUNK_ELEMENTS // max(n, 1))
    out = np.empty(L)
    choice = np.empty(L, dtype=bool)  # True = anti-identity
    for s in range(0, L, chunk):
        th = theta[:, s:s + chunk]
        xp = np.sort(Xl @ th, axis=0)
        yp = np.sort(Yl @ th, axis=0)
        c_id = _factored_cost(xp, yp)
        c_anti = _anti_cost(xp, yp)
        choice[s:s + chunk] = c_anti < c_id
        out[s:s + chunk] = np.maximum(np.minimum(c_id, c_anti), 0.0)
    return out, choice


def sgw(X, Y, cfg: SliceConfig | None = None, a=None, b=None) -> float:
    """Sliced GW between two uniform clouds of the same size.

    X (n x p) and Y (n x q) may live in different dimensions. The smaller one
    is mapped into the larger space by ``cfg.delta`` (zero padding by
    default). The value is the mean over projections of the 1D GW value
    (squared loss, divided by n^2). Both clouds are centred first, which
    leaves the value unchanged and keeps the moment sums well conditioned.
    """
    cfg = cfg or SliceConfig()
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    n = X.shape[0]
    if Y.shape[0] != n:
        raise UnsupportedWeights("sliced GW needs the same number of samples on both sides")
    _check_uniform(a, n)
    _check_uniform(b, n)
    Xl, Yl = _lift(X - X.mean(0), Y - Y.mean(0), cfg.delta)
    theta = _slices(Xl.shape[1], cfg)
    costs, _ = _per_slice_costs(Xl, Yl, theta)
    return float(costs.mean() / n ** 2)


def _sgw_delta_grad(Xc, Yc, theta, delta):
    """SGW_delta and its gradient in delta (q x p) with the per-slice permutations held fixed."""
    n = Xc.shape[0]
    L = theta.shape[1]
    A = Xc @ delta.T @ theta            # n x L projections of the lifted X
    Bp = Yc @ theta
    ox = np.argsort(A, axis=0, kind="stable")
    oy = np.argsort(Bp, axis=0, kind="stable")
    xs = np.take_along_axis(A, ox, axis=0)
    ys = np.take_along_axis(Bp, oy, axis=0)
    c_id = _factored_cost(xs, ys)
    c_anti = _factored_cost(xs, ys[::-1])
    anti = c_anti < c_id
    value = float(np.where(anti, c_anti, c_id).mean() / n ** 2)

    ys_paired = np.where(anti[None, :], ys[::-1], ys)  # partner of the k-th smallest x
    b = np.empty_like(A)
    np.put_along_axis(b, ox, ys_paired, axis=0)         # partner of each original x
    a = A
    S1, S2, S3 = a.sum(0), (a ** 2).sum(0), (a ** 3).sum(0)
    T1, T2 = b.sum(0), (b ** 2).sum(0)
    U11, U12 = (a * b).sum(0), (a * b ** 2).sum(0)
    cubic = n * a ** 3 - 3 * a ** 2 * S1 + 3 * a * S2 - S3
    cross = b ** 2 * (n * a - S1) - 2 * b * (a * T1 - U11) + (a * T2 - U12)
    g = 8 * (cubic - cross) / (n ** 2 * L)              # d value / d a, per slice
    grad = theta @ (Xc.T @ g).T                          # q x p
    return value, grad


def risgw(X, Y, cfg: SliceConfig | None = None, opt: StiefelOptParams | None = None,
          init=None):
    """Rotation-invariant SGW: min over delta in V_p(R^q) of SGW_delta(X, Y).

    Projections are drawn once and kept fixed during the optimisation. The
    gradient holds each slice's optimal permutation fixed. The start is
    zero padding (identity when p = q) unless ``init`` is given. The descent
    stops early at a kink where no Armijo step exists. Returns
    ``(value, delta)``.
    """
    cfg = cfg or SliceConfig()
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    n, p = X.shape
    q = Y.shape[1]
    if Y.shape[0] != n:
        raise UnsupportedWeights("RISGW needs the same number of samples on both sides")
    if p > q:
        raise ShapeMismatch("RISGW needs dim(X) <= dim(Y)")
    Xc = X - X.mean(0)
    Yc = Y - Y.mean(0)
    theta = _slices(q, cfg)

    def fun(D):
        return _sgw_delta_grad(Xc, Yc, theta, D)[0]

    def grad(D):
        return _sgw_delta_grad(Xc, Yc, theta, D)[1]

    start = pad_identity(q, p) if init is None else init
    # the objective has kinks where a slice's sort order changes
    delta, value = stiefel_minimize(fun, grad, (q, p), opt, init=start, strict=False)
    return value, delta


def sliced_wasserstein(X, Y, p_exp: int = 2, cfg: SliceConfig | None = None, a=None, b=None) -> float:
    """Monte Carlo SW_p^p: mean over directions of W_p^p between the projected measures.

    Clouds of different dimensions are matched by ``cfg.delta`` or zero padding.
    """
    cfg = cfg or SliceConfig()
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[1] != Y.shape[1] or cfg.delta is not None:
        X, Y = _lift(X, Y, cfg.delta)
    theta = _slices(X.shape[1], cfg)
    costs = wasserstein_1d_cost(X @ theta, Y @ theta, a, b, p_exp)
    return float(np.mean(costs))
