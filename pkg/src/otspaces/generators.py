"""Seeded synthetic data: block matrices, community graphs, spirals, Gaussian clouds."""
from __future__ import annotations

import numpy as np

from .errors import BadParams
from .measures import StructuredObject


def _rng(seed):
    return np.random.default_rng(seed)


def block_data(n: int, d: int, g: int, m: int, noise: float = 1.0, separation: float = 2.0,
               seed: int = 0):
    """n x d matrix with g x m constant blocks plus Gaussian noise.

    Block means are a seeded permutation of separation * {0, ..., g m - 1}, so
    any two row (or column) clusters differ by at least ``separation`` in
    every block. Cluster sizes are as equal as possible. Rows and columns are
    shuffled. Returns ``(X, row_labels, col_labels, means)``.
    """
    if not (1 <= g <= n and 1 <= m <= d):
        raise BadParams("need 1 <= g <= n and 1 <= m <= d")
    if noise < 0 or separation <= 0:
        raise BadParams("noise must be >= 0 and separation > 0")
    rng = _rng(seed)
    means = separation * rng.permutation(g * m).reshape(g, m).astype(float)
    rows = rng.permutation(np.arange(n) % g)
    cols = rng.permutation(np.arange(d) % m)
    X = means[rows][:, cols]
    if noise > 0:
        X = X + noise * rng.standard_normal((n, d))
    return X, rows, cols, means


def sbm_graph(nodes: int, communities: int, p_in: float = 0.8, p_out: float = 0.05,
              label_noise: float = 0.0, seed: int = 0, max_tries: int = 100):
    """Connected stochastic block model graph with community labels as node labels.

    Returns ``(adjacency, labels)``. Resamples (up to ``max_tries``) until the
    graph is connected. ``label_noise`` is the probability of replacing a
    node's label with a uniform random community.
    """
    if communities < 1 or nodes < communities:
        raise BadParams("need 1 <= communities <= nodes")
    if not (0 <= p_out <= 1 and 0 <= p_in <= 1):
        raise BadParams("edge probabilities must lie in [0, 1]")
    from scipy.sparse.csgraph import connected_components

    rng = _rng(seed)
    z = np.sort(np.arange(nodes) % communities)
    probs = np.where(z[:, None] == z[None, :], p_in, p_out)
    for _ in range(max_tries):
        upper = np.triu(rng.random((nodes, nodes)) < probs, 1)
        A = upper | upper.T
        if connected_components(A, directed=False)[0] == 1:
            break
    else:
        raise BadParams("could not sample a connected graph; raise the edge probabilities")
    labels = z.copy()
    if label_noise > 0:
        flip = rng.random(nodes) < label_noise
        labels[flip] = rng.integers(0, communities, flip.sum())
    return A, labels


def sbm_object(nodes, communities, seed=0, **kw) -> StructuredObject:
    from .fgw.graphs import shortest_path_matrix

    A, labels = sbm_graph(nodes, communities, seed=seed, **kw)
    return StructuredObject(shortest_path_matrix(A), labels.astype(np.int64), None)


def spiral(n: int, dim: int = 2, noise: float = 0.0, turns: float = 2.0, seed: int = 0) -> np.ndarray:
    """Points along a spiral: planar for dim 2, a helix-like curve for dim 3."""
    if dim not in (2, 3):
        raise BadParams("spiral dimension must be 2 or 3")
    rng = _rng(seed)
    t = np.sort(rng.random(n)) * turns * 2 * np.pi
    r = 1.0 + t / (2 * np.pi)
    pts = [r * np.cos(t), r * np.sin(t)]
    if dim == 3:
        pts.append(t / (2 * np.pi))
    X = np.stack(pts, axis=1)
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    return X


def gaussian_cloud(n: int, dim: int, seed: int = 0, scale: float = 1.0):
    """Samples of a random centred Gaussian. Returns ``(X, covariance)``."""
    rng = _rng(seed)
    L = rng.standard_normal((dim, dim)) * scale / np.sqrt(dim)
    S = L @ L.T + 0.1 * np.eye(dim)
    X = rng.multivariate_normal(np.zeros(dim), S, size=n)
    return X, S
