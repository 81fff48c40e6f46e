"""Weighted undirected graphs, the Max-Cut objective and node gains."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


class MalformedInputError(ValueError):
    """A graph file could not be parsed."""

    def __init__(self, path, lineno: int, message: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class InvalidInstanceError(ValueError):
    """The input parsed but does not describe a usable Max-Cut instance."""


class Graph:
    """Immutable simple undirected graph with nonnegative edge weights.

    Edges are stored twice: as a canonical edge list ``(u, v, w)`` with
    ``u < v`` sorted lexicographically, and as a symmetric CSR adjacency
    (``indptr``, ``indices``, ``data``) with sorted neighbor lists.
    Use :meth:`from_edges` to build one from raw, possibly messy, edges.
    """

    __slots__ = ("n", "u", "v", "w", "indptr", "indices", "data",
                 "labels", "dropped_self_loops")

    def __init__(self, n, u, v, w, labels=None, dropped_self_loops=0):
        if n < 1:
            raise InvalidInstanceError("graph must have at least one node")
        self.n = int(n)
        self.u = _frozen(np.asarray(u, dtype=np.int64))
        self.v = _frozen(np.asarray(v, dtype=np.int64))
        self.w = _frozen(np.asarray(w, dtype=np.float64))
        self.labels = labels
        self.dropped_self_loops = int(dropped_self_loops)

        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        vals = np.concatenate([self.w, self.w])
        order = np.lexsort((cols, rows))
        self.indices = _frozen(cols[order])
        self.data = _frozen(vals[order])
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=self.n), out=indptr[1:])
        self.indptr = _frozen(indptr)

    @classmethod
    def from_edges(cls, n, u, v, w=None, labels=None) -> "Graph":
        """Normalize raw edges: drop self-loops, merge duplicates by summing."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if w is None:
            w = np.ones(len(u))
        w = np.asarray(w, dtype=np.float64).ravel()
        if not (len(u) == len(v) == len(w)):
            raise ValueError("edge arrays differ in length")
        if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise InvalidInstanceError("edge endpoint out of range")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidInstanceError("edge weights must be finite and nonnegative")

        loops = u == v
        n_loops = int(loops.sum())
        if n_loops:
            log.warning("dropped %d self-loop(s)", n_loops)
        a = np.minimum(u, v)[~loops]
        b = np.maximum(u, v)[~loops]
        w = w[~loops]
        key = a * n + b
        uniq, inv = np.unique(key, return_inverse=True)
        merged = np.bincount(inv, weights=w, minlength=len(uniq))
        return cls(n, uniq // n, uniq % n, merged, labels=labels,
                   dropped_self_loops=n_loops)

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def total_weight(self) -> float:
        return float(self.w.sum())

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def weighted_degree(self) -> np.ndarray:
        return _wsum(self.u, self.w, self.n) + _wsum(self.v, self.w, self.n)

    def neighbors(self, i: int):
        """Return ``(nodes, weights)`` adjacent to node ``i``."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        A[self.u, self.v] = self.w
        A[self.v, self.u] = self.w
        return A

    def stats(self) -> dict:
        n, m = self.n, self.m
        return {
            "nodes": n,
            "edges": m,
            "avg_degree": 2.0 * m / n,
            "density": 2.0 * m / (n * (n - 1)) if n > 1 else 0.0,
            "total_weight": self.total_weight,
        }

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, total_weight={self.total_weight:g})"


def _wsum(idx, weights, n) -> np.ndarray:
    # bincount yields int64 for empty weights
    return np.bincount(idx, weights, n).astype(np.float64, copy=False)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cut_value(g: Graph, x) -> float:
    """Total weight of edges whose endpoints lie in different parts."""
    x = np.asarray(x)
    if x.shape != (g.n,):
        raise ValueError(f"assignment has length {x.size}, graph has {g.n} nodes")
    return float(g.w[x[g.u] != x[g.v]].sum())


def compute_gains(g: Graph, x) -> np.ndarray:
    """Change in cut value from flipping each node individually.

    An edge contributes ``+w`` to both endpoints' gains while uncut and
    ``-w`` once cut.
    """
    x = np.asarray(x)
    if x.shape != (g.n,):
        raise ValueError(f"assignment has length {x.size}, graph has {g.n} nodes")
    signed = np.where(x[g.u] == x[g.v], g.w, -g.w)
    return _wsum(g.u, signed, g.n) + _wsum(g.v, signed, g.n)


@dataclass
class CutAssignment:
    """Binary partition vector with its cut value and per-node gains.

    ``x[i] == 0`` puts node ``i`` in the first part. The cached fields are
    kept current by :func:`apply_flip`; build fresh ones with :meth:`from_x`.
    """

    x: np.ndarray
    objective: float
    gains: np.ndarray

    @classmethod
    def from_x(cls, g: Graph, x) -> "CutAssignment":
        x = np.array(x, dtype=np.int8)
        return cls(x, cut_value(g, x), compute_gains(g, x))

    def copy(self) -> "CutAssignment":
        return CutAssignment(self.x.copy(), self.objective, self.gains.copy())


def apply_flip(g: Graph, ca: CutAssignment, i: int) -> CutAssignment:
    """Move node ``i`` to the other part, updating ``ca`` in place in O(deg(i))."""
    nbr, w = g.neighbors(i)
    # uncut edges become cut: neighbor loses 2w; cut edges the reverse
    same = ca.x[nbr] == ca.x[i]
    ca.gains[nbr] += np.where(same, -2.0 * w, 2.0 * w)
    ca.objective += ca.gains[i]
    ca.gains[i] = -ca.gains[i]
    ca.x[i] ^= 1
    return ca


# ---------------------------------------------------------------------------
# file ingestion


def load_graph(path, format: str | None = None) -> Graph:
    """Read an edge list or Matrix Market file.

    ``format`` is ``"edgelist"`` or ``"mtx"``; when omitted it is inferred
    from the extension (``.mtx`` means Matrix Market) or a ``%%MatrixMarket``
    banner on the first line.
    """
    path = os.fspath(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if format is None:
        banner = lines[0].lower() if lines else ""
        mtx = path.endswith(".mtx") or banner.startswith("%%matrixmarket")
        format = "mtx" if mtx else "edgelist"
    if format in ("mtx", "matrix-market"):
        return _parse_mtx(path, lines)
    if format in ("edgelist", "edge-list"):
        return _parse_edgelist(path, lines)
    raise ValueError(f"unknown graph format {format!r}")


def _parse_edgelist(path, lines) -> Graph:
    src, dst, wts, linenos = [], [], [], []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        parts = s.split()
        if len(parts) not in (2, 3):
            raise MalformedInputError(path, lineno, f"expected 'u v [w]', got {s!r}")
        if len(parts) == 3:
            try:
                wts.append(float(parts[2]))
            except ValueError:
                raise MalformedInputError(path, lineno, f"bad weight {parts[2]!r}") from None
        else:
            wts.append(1.0)
        src.append(parts[0])
        dst.append(parts[1])
        linenos.append(lineno)
    if not src:
        raise InvalidInstanceError(f"{path}: no edges found")
    w = np.array(wts)
    if np.any(w < 0):
        k = int(np.argmax(w < 0))
        raise MalformedInputError(path, linenos[k], "negative edge weight")

    try:
        u = np.array([int(t) for t in src], dtype=np.int64)
        v = np.array([int(t) for t in dst], dtype=np.int64)
    except ValueError:
        # arbitrary string labels: number them in order of first appearance
        index: dict[str, int] = {}
        for a, b in zip(src, dst):
            index.setdefault(a, len(index))
            index.setdefault(b, len(index))
        u = np.array([index[t] for t in src], dtype=np.int64)
        v = np.array([index[t] for t in dst], dtype=np.int64)
        return Graph.from_edges(len(index), u, v, w, labels=list(index))

    lo = min(u.min(), v.min())
    if lo < 0:
        k = int(np.argmax((u < 0) | (v < 0)))
        raise MalformedInputError(path, linenos[k], "negative node id")
    offset = 0 if lo == 0 else 1
    u -= offset
    v -= offset
    n = int(max(u.max(), v.max())) + 1
    labels = np.arange(n) + offset if offset else None
    return Graph.from_edges(n, u, v, w, labels=labels)


def _parse_mtx(path, lines) -> Graph:
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise MalformedInputError(path, 1, "missing %%MatrixMarket banner")
    banner = lines[0].lower().split()
    if len(banner) < 5 or banner[1] != "matrix" or banner[2] != "coordinate":
        raise MalformedInputError(path, 1, "only 'matrix coordinate' files are supported")
    field, symmetry = banner[3], banner[4]
    if field not in ("real", "integer", "pattern"):
        raise MalformedInputError(path, 1, f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise MalformedInputError(path, 1, f"unsupported symmetry {symmetry!r}")

    body = ((k, ln.strip()) for k, ln in enumerate(lines[1:], 2))
    body = [(k, s) for k, s in body if s and not s.startswith("%")]
    if not body:
        raise MalformedInputError(path, len(lines), "missing size line")
    k0, size = body[0]
    try:
        rows, cols, nnz = (int(t) for t in size.split())
    except ValueError:
        raise MalformedInputError(path, k0, f"bad size line {size!r}") from None
    if rows != cols:
        raise InvalidInstanceError(f"{path}: adjacency matrix must be square, got {rows}x{cols}")
    if rows < 1:
        raise InvalidInstanceError(f"{path}: empty graph")
    if len(body) - 1 != nnz:
        raise MalformedInputError(path, body[-1][0], f"expected {nnz} entries, found {len(body) - 1}")

    ncol = 2 if field == "pattern" else 3
    u = np.empty(nnz, dtype=np.int64)
    v = np.empty(nnz, dtype=np.int64)
    w = np.ones(nnz)
    for t, (lineno, s) in enumerate(body[1:]):
        parts = s.split()
        if len(parts) != ncol:
            raise MalformedInputError(path, lineno, f"expected {ncol} columns, got {s!r}")
        try:
            u[t] = int(parts[0]) - 1
            v[t] = int(parts[1]) - 1
            if ncol == 3:
                w[t] = float(parts[2])
        except ValueError:
            raise MalformedInputError(path, lineno, f"cannot parse entry {s!r}") from None
        if not (0 <= u[t] < rows and 0 <= v[t] < rows):
            raise MalformedInputError(path, lineno, "index out of range")
        if w[t] < 0:
            raise MalformedInputError(path, lineno, "negative edge weight")
    # general matrices: (i, j) and (j, i) merge by summation in from_edges
    return Graph.from_edges(rows, u, v, w)
