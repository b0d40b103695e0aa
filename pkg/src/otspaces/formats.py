"""File formats: measures, graphs, data matrices, Gaussians and couplings.

Floats are written with 17 significant digits, which round-trips every
double exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import MixedFeatureKinds, NegativeWeight, ParseError, ValidationError
from .measures import DataMatrix, DiscreteMeasure, StructuredObject

COUPLING_MIN_MASS = 1e-15


# ---------------------------------------------------------------- JSON writing

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialise non-finite number {x}")
        s = format(x, ".17g")
        return s if any(c in s for c in ".eE") else s + ".0"
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, Path):
        return json.dumps(str(x))
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    """Compact JSON with 17-significant-digit floats."""
    return _fmt(obj)


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


# ---------------------------------------------------------------- reading helpers

def _load_json(path):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror or e}") from None


def _is_json(path, text=None) -> bool:
    if str(path).lower().endswith(".json"):
        return True
    text = _read(path) if text is None else text
    return text.lstrip().startswith(("{", "["))


def _number_matrix(rows, path, field):
    try:
        M = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: field {field!r} must be a matrix of numbers") from None
    if M.ndim == 1 and M.size and field == "points":
        M = M[:, None]
    if M.ndim != 2:
        raise ParseError(f"{path}: field {field!r} must be a rectangular matrix")
    if not np.all(np.isfinite(M)):
        raise ParseError(f"{path}: field {field!r} has non-finite entries")
    return M


def _weights(raw, n, path, field="weights"):
    if raw is None:
        return None
    try:
        w = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: field {field!r} must be a list of numbers") from None
    if w.ndim != 1 or w.shape[0] != n:
        raise ParseError(f"{path}: field {field!r} has {w.size} entries, expected {n}")
    if np.any(w < 0):
        raise NegativeWeight(f"{path}: field {field!r} has a negative entry")
    return w


def _csv_rows(path, text):
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    data = []
    for k, r in enumerate(rows, start=2 if header else 1):
        try:
            data.append([float(c) for c in r])
        except ValueError:
            raise ParseError(f"{path}: line {k}: non-numeric value") from None
        if len(data[-1]) != len(data[0]):
            raise ParseError(f"{path}: line {k}: expected {len(data[0])} columns")
    if not data:
        raise ParseError(f"{path}: no data rows")
    return header, np.array(data)


# ---------------------------------------------------------------- measures

def parse_measure(path) -> DiscreteMeasure:
    """Read a weighted point set.

    JSON: {"points": [[...], ...], "weights": [...]} with optional weights.
    CSV: one point per row; a last column with header "w" holds the weights.
    Weights default to uniform and are normalised.
    """
    text = _read(path)
    if _is_json(path, text):
        doc = _load_json(path)
        if not isinstance(doc, dict) or "points" not in doc:
            raise ParseError(f"{path}: expected an object with a 'points' field")
        X = _number_matrix(doc["points"], path, "points")
        w = _weights(doc.get("weights"), X.shape[0], path)
    else:
        header, data = _csv_rows(path, text)
        w = None
        if header and header[-1] == "w":
            w = _weights(data[:, -1], data.shape[0], path, "w")
            data = data[:, :-1]
        if data.shape[1] == 0:
            raise ParseError(f"{path}: no coordinate columns")
        X = data
    try:
        return DiscreteMeasure(X, w)
    except NegativeWeight:
        raise
    except ValidationError as e:
        raise ParseError(f"{path}: {e}") from None


def measure_document(measure: DiscreteMeasure) -> dict:
    return {"points": np.asarray(measure.support), "weights": np.asarray(measure.weights)}


def write_measure(measure: DiscreteMeasure, path) -> None:
    write_json(measure_document(measure), path)


# ---------------------------------------------------------------- graphs

def parse_graph(path) -> StructuredObject:
    """Read a labeled or attributed graph.

    {"nodes": [{"label": int} | {"features": [...]}, ...], "edges": [[i, j], ...],
     "weights": [...], "structure": "shortest_path" | "adjacency"}

    Edge lengths may be given as a third entry of each edge. ``weights`` are
    node weights (uniform by default).
    """
    from .fgw.graphs import shortest_path_matrix

    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise ParseError(f"{path}: expected an object with a 'nodes' list")
    nodes = doc["nodes"]
    n = len(nodes)
    if n == 0:
        raise ParseError(f"{path}: graph has no nodes")
    kinds = set()
    labels, feats = [], []
    for k, node in enumerate(nodes):
        if not isinstance(node, dict):
            raise ParseError(f"{path}: nodes[{k}] must be an object")
        if "label" in node:
            kinds.add("label")
            lab = node["label"]
            if isinstance(lab, bool) or not isinstance(lab, int):
                raise ParseError(f"{path}: nodes[{k}].label must be an integer")
            labels.append(lab)
        if "features" in node:
            kinds.add("features")
            f = node["features"]
            feats.append(f if isinstance(f, list) else [f])
        if "label" not in node and "features" not in node:
            raise ParseError(f"{path}: nodes[{k}] needs 'label' or 'features'")
    if len(kinds) > 1 or (kinds == {"label"} and len(labels) != n) or (kinds == {"features"} and len(feats) != n):
        raise MixedFeatureKinds(f"{path}: nodes mix labels and feature vectors")
    edges = doc.get("edges", [])
    if not isinstance(edges, list):
        raise ParseError(f"{path}: 'edges' must be a list")
    weighted = any(isinstance(e, list) and len(e) == 3 for e in edges)
    A = np.zeros((n, n), dtype=float if weighted else bool)
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise ParseError(f"{path}: edges[{k}] must be [i, j] or [i, j, length]")
        i, j = e[0], e[1]
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (i, j)):
            raise ParseError(f"{path}: edges[{k}] indices must be integers")
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"{path}: edges[{k}] index out of range for {n} nodes")
        length = float(e[2]) if len(e) == 3 else 1.0
        if length <= 0:
            raise ParseError(f"{path}: edges[{k}] length must be positive")
        A[i, j] = A[j, i] = length if weighted else True
    mode = doc.get("structure", "shortest_path")
    if mode == "shortest_path":
        C = shortest_path_matrix(A)
    elif mode == "adjacency":
        C = (A != 0).astype(float)
    else:
        raise ParseError(f"{path}: unknown structure {mode!r}")
    if kinds == {"label"}:
        F = np.array(labels, dtype=np.int64)
    else:
        F = _number_matrix(feats, path, "features")
    h = _weights(doc.get("weights"), n, path)
    return StructuredObject(C, F, h)


def graph_document(adjacency, labels=None, features=None, weights=None, structure="shortest_path") -> dict:
    A = np.asarray(adjacency)
    n = A.shape[0]
    iu = np.argwhere(np.triu(A != 0, 1))
    if labels is not None:
        nodes = [{"label": int(v)} for v in np.asarray(labels).ravel()]
    else:
        nodes = [{"features": np.atleast_1d(f)} for f in np.asarray(features, dtype=float).reshape(n, -1)]
    doc = {"nodes": nodes, "edges": [[int(i), int(j)] for i, j in iu], "structure": structure}
    if weights is not None:
        doc["weights"] = np.asarray(weights)
    return doc


# ---------------------------------------------------------------- matrices and Gaussians

def parse_matrix(path) -> DataMatrix:
    """Data matrix: JSON {"matrix": [[...]], "sample_weights": [...], "feature_weights": [...]}
    or a numeric CSV (an optional header line is skipped)."""
    text = _read(path)
    if _is_json(path, text):
        doc = _load_json(path)
        if not isinstance(doc, dict) or "matrix" not in doc:
            raise ParseError(f"{path}: expected an object with a 'matrix' field")
        X = _number_matrix(doc["matrix"], path, "matrix")
        w = _weights(doc.get("sample_weights"), X.shape[0], path, "sample_weights")
        v = _weights(doc.get("feature_weights"), X.shape[1], path, "feature_weights")
    else:
        _, X = _csv_rows(path, text)
        w = v = None
    try:
        return DataMatrix(X, w, v)
    except NegativeWeight:
        raise
    except ValidationError as e:
        raise ParseError(f"{path}: {e}") from None


def parse_covariance(path) -> np.ndarray:
    """Covariance from {"covariance": [[...]]}, or the weighted empirical covariance of a measure file."""
    text = _read(path)
    if _is_json(path, text):
        doc = _load_json(path)
        if isinstance(doc, dict) and "covariance" in doc:
            S = _number_matrix(doc["covariance"], path, "covariance")
            if S.shape[0] != S.shape[1]:
                raise ParseError(f"{path}: covariance must be square")
            return S
    mu = parse_measure(path)
    X, w = np.asarray(mu.support), np.asarray(mu.weights)
    Xc = X - w @ X
    return (Xc * w[:, None]).T @ Xc


# ---------------------------------------------------------------- couplings

def write_coupling(plan, path) -> int:
    """Write the entries above 1e-15 as CSV rows "i,j,mass". Returns the row count."""
    P = np.asarray(plan, dtype=float)
    idx = np.argwhere(P > COUPLING_MIN_MASS)
    lines = ["i,j,mass"] + [f"{i},{j},{format(float(P[i, j]), '.17g')}" for i, j in idx]
    Path(path).write_text("\n".join(lines) + "\n")
    return len(idx)


def read_coupling(path, shape) -> np.ndarray:
    header, data = _csv_rows(path, _read(path))
    P = np.zeros(shape)
    for i, j, m in data:
        P[int(i), int(j)] = m
    return P
