"""Transportation simplex on the bipartite flow graph.

The basis is a spanning tree over n row nodes and m column nodes (node ``n + j``
is column j), rooted at row 0. Each non-root node stores its parent, its depth
and the flow on the edge to its parent. Supplies are perturbed
(a_i + delta, b_m + n*delta) so every basic solution is nondegenerate, which
rules out cycling whatever the entering rule. Once the optimal tree is found,
flows are recomputed from the unperturbed marginals on that tree.
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericalFailure

PERTURBATION = 1e-11
PRICING_RTOL = 1e-12
PIVOT_RULES = ("dantzig", "bland")


def _initial_tree(C, a, b):
    """Matrix-minimum start: greedily fill the cheapest admissible cell.

    Each fill exhausts exactly one line (row or column), which gives n + m - 1
    acyclic cells, i.e. a spanning tree.
    """
    n, m = C.shape
    ra = a.copy()
    rb = b.copy()
    row_alive = np.ones(n, dtype=bool)
    col_alive = np.ones(m, dtype=bool)
    rows_left, cols_left = n, m
    edges = []
    for flat in np.argsort(C, axis=None, kind="stable"):
        i, j = divmod(int(flat), m)
        if not (row_alive[i] and col_alive[j]):
            continue
        x = min(ra[i], rb[j])
        edges.append((i, j))
        ra[i] -= x
        rb[j] -= x
        if rows_left + cols_left == 2:
            break
        if (ra[i] <= rb[j] and rows_left > 1) or cols_left == 1:
            row_alive[i] = False
            rows_left -= 1
        else:
            col_alive[j] = False
            cols_left -= 1
    if len(edges) != n + m - 1:
        raise NumericalFailure("initial basis is not a spanning tree")
    return edges


def _root_tree(C, n, m, adj, supply):
    """Parents, depths, potentials and edge flows of the tree rooted at node 0."""
    N = n + m
    parent = [-1] * N
    depth = [0] * N
    pot = [0.0] * N  # alpha for rows, beta for columns
    order = [0]
    seen = [False] * N
    seen[0] = True
    k = 0
    while k < len(order):
        u = order[k]
        k += 1
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            parent[v] = u
            depth[v] = depth[u] + 1
            if v >= n:
                pot[v] = C[u, v - n] - pot[u]
            else:
                pot[v] = C[v, u - n] - pot[u]
            order.append(v)
    if len(order) != N:
        raise NumericalFailure("basis tree is disconnected")
    acc = list(supply)
    flow = [0.0] * N
    for v in reversed(order[1:]):
        # row -> column edges carry the net supply of the subtree below them
        flow[v] = acc[v] if v < n else -acc[v]
        acc[parent[v]] += acc[v]
    return parent, depth, pot, flow, order


def transport_simplex(C, a, b, pivot_rule: str = "dantzig", max_pivots: int | None = None):
    """Solve min <C, P> over couplings of (a, b).

    Returns ``(plan, alpha, beta, pivots)``. ``pivot_rule`` is ``"dantzig"``
    (most negative reduced cost, lowest row-major index on ties) or ``"bland"``
    (first improving cell in row-major order). Leaving-variable ties, which
    the perturbation makes vanishingly rare, go to the lowest index.
    """
    C = np.ascontiguousarray(C, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = C.shape
    if pivot_rule not in PIVOT_RULES:
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    if max_pivots is None:
        max_pivots = 50 * (n + m) ** 2 + 1000

    ap = a + PERTURBATION
    bp = b.copy()
    bp[-1] += n * PERTURBATION

    adj = [set() for _ in range(n + m)]
    for i, j in _initial_tree(C, ap, bp):
        adj[i].add(n + j)
        adj[n + j].add(i)
    parent, depth, pot, flow, _ = _root_tree(C, n, m, adj, np.concatenate([ap, -bp]))

    scale = np.abs(C).max() if C.size else 0.0
    tol = PRICING_RTOL * scale
    alpha = np.array(pot[:n])
    beta = np.array(pot[n:])

    pivots = 0
    while True:
        reduced = C - alpha[:, None]
        reduced -= beta[None, :]
        if pivot_rule == "bland":
            cand = np.flatnonzero(reduced.ravel() < -tol)
            if cand.size == 0:
                break
            flat = int(cand[0])
        else:
            flat = int(np.argmin(reduced))
            if not reduced.flat[flat] < -tol:
                break
        if pivots >= max_pivots:
            raise NumericalFailure(f"simplex exceeded {max_pivots} pivots")
        pivots += 1
        ei, ej = divmod(flat, m)
        rc = float(reduced.flat[flat])

        # cycle: tree path from column node (side u) and row node (side v) to their LCA.
        # Along the path starting at the column node the edges alternate -,+,-,...
        u, v = n + ej, ei
        left, right = [], []
        while u != v:
            if depth[u] >= depth[v]:
                left.append(u)
                u = parent[u]
            else:
                right.append(v)
                v = parent[v]
        # each path edge is identified by its child node; sign by position from the column end
        signed = [(x, k % 2 == 0) for k, x in enumerate(left)]
        kr = len(left) + len(right) - 1
        signed += [(x, (kr - k) % 2 == 0) for k, x in enumerate(right)]

        best = None
        for x, minus in signed:
            if not minus:
                continue
            y = parent[x]
            r, c = (x, y - n) if x < n else (y, x - n)
            key = (flow[x], r * m + c)
            if best is None or key < best[0]:
                best = (key, x)
        (theta, _), leave = best
        for x, minus in signed:
            flow[x] += -theta if minus else theta

        # detach the subtree under `leave`; the entering endpoint inside it becomes its root
        in_left = leave in left
        q, other = (n + ej, ei) if in_left else (ei, n + ej)
        old_parent_of_leave = parent[leave]
        adj[leave].discard(old_parent_of_leave)
        adj[old_parent_of_leave].discard(leave)
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)

        # reverse parent pointers along q -> leave, moving edge flows with them
        prev, prev_flow = other, theta
        x = q
        while True:
            nxt = parent[x]
            x_flow = flow[x]
            parent[x] = prev
            flow[x] = prev_flow
            if x == leave:
                break
            prev, prev_flow = x, x_flow
            x = nxt

        # potentials: restore C_ij = alpha_i + beta_j on the entering edge
        shift = rc if q < n else -rc
        stack = [q]
        depth[q] = depth[other] + 1
        while stack:
            x = stack.pop()
            if x < n:
                alpha[x] += shift
            else:
                beta[x - n] -= shift
            for y in adj[x]:
                if y != parent[x]:
                    depth[y] = depth[x] + 1
                    stack.append(y)

    # exact flows for the unperturbed marginals on the final tree
    parent, _, _, true_flow, order = _root_tree(C, n, m, adj, np.concatenate([a, -b]))
    plan = np.zeros((n, m))
    for v in order[1:]:
        p = parent[v]
        r, c = (v, p - n) if v < n else (p, v - n)
        plan[r, c] = true_flow[v]
    np.maximum(plan, 0.0, out=plan)
    return plan, alpha, beta, pivots
