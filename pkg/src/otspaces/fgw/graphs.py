"""Graph utilities: shortest paths, Weisfeiler-Lehman codes, adjacency recovery."""
from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..errors import DisconnectedGraph, NoConnectedCandidate, ShapeMismatch


def shortest_path_matrix(adjacency) -> np.ndarray:
    """All-pairs shortest-path lengths of an undirected graph.

    A boolean adjacency means unit edge lengths (breadth-first search). A real
    matrix gives edge lengths, with 0 meaning no edge.
    """
    A = np.asarray(adjacency)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch("adjacency must be square")
    unweighted = A.dtype == bool
    W = np.array(A, dtype=float)
    W = np.maximum(W, W.T)
    np.fill_diagonal(W, 0.0)
    D = shortest_path(W, method="D", directed=False, unweighted=unweighted)
    if not np.all(np.isfinite(D)):
        raise DisconnectedGraph("graph has unreachable node pairs")
    return (D + D.T) / 2


def adjacency_lists(adjacency):
    A = np.asarray(adjacency) != 0
    np.fill_diagonal(A, False)
    return [np.flatnonzero(A[i] | A[:, i]) for i in range(A.shape[0])]


def wl_relabel(labels, adjacency, H: int, codebook: dict | None = None) -> np.ndarray:
    """Weisfeiler-Lehman codes, one column per level 0..H.

    Column 0 holds the input labels. Column k is an injective code of the
    pair (own code, sorted neighbour codes) at level k - 1. Pass the same
    ``codebook`` dict to several calls to make codes comparable across graphs.
    """
    labels = np.asarray(labels, dtype=np.int64).ravel()
    nbrs = adjacency_lists(adjacency)
    if len(nbrs) != labels.shape[0]:
        raise ShapeMismatch("labels and adjacency sizes differ")
    if H < 0:
        raise ValueError("H must be >= 0")
    book = {} if codebook is None else codebook
    codes = np.empty((labels.shape[0], H + 1), dtype=np.int64)
    codes[:, 0] = labels
    for k in range(1, H + 1):
        prev = codes[:, k - 1]
        for i, nb in enumerate(nbrs):
            key = (k, int(prev[i]), tuple(sorted(int(c) for c in prev[nb])))
            if key not in book:
                book[key] = len(book)
            codes[i, k] = book[key]
    return codes


def wl_relabel_many(graphs, H: int):
    """WL codes for several ``(labels, adjacency)`` pairs with a shared codebook."""
    book: dict = {}
    return [wl_relabel(lab, adj, H, book) for lab, adj in graphs]


def adjacency_from_structure(C, sp_oracle=shortest_path_matrix):
    """Recover a graph whose shortest paths best match C.

    Tries every threshold t among the sorted unique off-diagonal values of C,
    with edges where C_ij <= t. Keeps the connected candidate minimising
    ||C - SP(A_t)||_F. Ties go to the smaller t. Returns ``(adjacency, t, error)``.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if n == 1:
        return np.zeros((1, 1), dtype=bool), 0.0, 0.0
    off = ~np.eye(n, dtype=bool)
    best = None
    for t in np.unique(C[off]):
        A = (C <= t) & off
        try:
            err = float(np.linalg.norm(C - sp_oracle(A)))
        except DisconnectedGraph:
            continue
        if best is None or err < best[2]:
            best = (A, float(t), err)
    if best is None:
        raise NoConnectedCandidate("every threshold gives a disconnected graph")
    return best
