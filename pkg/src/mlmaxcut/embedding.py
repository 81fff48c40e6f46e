"""Repulsive sphere embedding used as the Max-Cut coarsening distance.

Each node sits on the unit sphere in ``d`` dimensions and is pushed away
from its weighted neighbors, so nodes that end up close together are
loosely connected and safe to merge without losing cut weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .graph import Graph

COINCIDENT_EPS = 1e-12


@dataclass
class Embedding:
    positions: np.ndarray  # (n, d)
    iterations_run: int = 0
    objective_trace: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def to_csv(self, path, labels=None) -> None:
        ids = np.arange(self.n) if labels is None else np.asarray(labels)
        header = "node_id," + ",".join(f"p_{k + 1}" for k in range(self.d))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for node, row in zip(ids, self.positions):
                fh.write(f"{node}," + ",".join(repr(float(c)) for c in row) + "\n")


def _normalize_rows(P: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(P, axis=1)
    zero = norms == 0
    if zero.any():
        P[zero] = 0.0
        P[zero, 0] = 1.0
        norms[zero] = 1.0
    return P / norms[:, None]


def embedding_objective(g: Graph, e: Embedding) -> float:
    """Weighted sum of embedded edge lengths, each edge counted once."""
    P = e.positions
    if P.shape[0] != g.n:
        raise ValueError("embedding and graph disagree on node count")
    return float(np.sum(g.w * np.linalg.norm(P[g.u] - P[g.v], axis=1)))


def embed(g: Graph, d: int = 3, iters: int = 30, seed=None, tol: float = 1e-4) -> Embedding:
    """Spread neighbors apart on the unit sphere by in-place repulsion sweeps.

    Every sweep visits the nodes in a fresh random order and moves each one
    a single degree-normalized gradient step up the sum of weighted
    distances to its neighbors, then projects back onto the sphere. A step
    that would shrink that local sum is discarded, so the global objective
    never decreases. Stops after ``iters`` sweeps or once the mean
    displacement in a sweep drops below ``tol``.
    """
    if d < 1 or iters < 1:
        raise ValueError("need d >= 1 and iters >= 1")
    rng = np.random.default_rng(seed)
    P = _normalize_rows(rng.uniform(-1.0, 1.0, size=(g.n, d)))
    indptr, indices, data = g.indptr, g.indices, g.data
    wsum = g.weighted_degree()
    has_nbrs = np.diff(indptr) > 0

    e = Embedding(P)
    e.objective_trace.append(embedding_objective(g, e))
    for sweep in range(iters):
        moved = 0.0
        for i in rng.permutation(g.n):
            if not has_nbrs[i]:
                continue
            lo, hi = indptr[i], indptr[i + 1]
            nbr, w = indices[lo:hi], data[lo:hi]
            p = P[i]
            diff = p - P[nbr]
            dist = np.linalg.norm(diff, axis=1)
            before = w @ dist
            close = dist < COINCIDENT_EPS
            if close.any():
                # gradient undefined; any direction off the current point separates
                r = rng.normal(size=(int(close.sum()), d))
                r /= np.linalg.norm(r, axis=1)[:, None]
                flip = r @ p > 0
                r[flip] = -r[flip]
                diff[close] = r
                dist[close] = 1.0
            grad = (w / dist) @ diff
            cand = p + grad / wsum[i]
            norm = np.linalg.norm(cand)
            if norm < COINCIDENT_EPS:
                cand = grad
                norm = np.linalg.norm(cand)
                if norm < COINCIDENT_EPS:
                    continue
            cand = cand / norm
            after = w @ np.linalg.norm(cand - P[nbr], axis=1)
            if after < before:
                continue
            moved += np.linalg.norm(cand - p)
            P[i] = cand
        e.iterations_run = sweep + 1
        e.objective_trace.append(embedding_objective(g, e))
        if moved / g.n < tol:
            break
    return e


class NoCandidateError(LookupError):
    """Every other node is already paired."""


class UnpairedIndex:
    """Exact nearest-neighbor queries restricted to not-yet-paired nodes.

    Wraps a k-d tree over the live nodes. Queries widen ``k`` until a live
    candidate appears and every point at the same distance has been seen,
    so ties resolve to the smallest node id. The tree is rebuilt over the
    survivors whenever half of its points have been removed.
    """

    def __init__(self, positions: np.ndarray, alive=None):
        self.P = np.asarray(positions, dtype=float)
        self.alive = np.ones(len(self.P), dtype=bool) if alive is None else np.array(alive, dtype=bool)
        self.n_alive = int(self.alive.sum())
        self._rebuild()

    def _rebuild(self):
        self.ids = np.flatnonzero(self.alive)
        self.tree = cKDTree(self.P[self.ids]) if len(self.ids) else None

    def remove(self, i: int) -> None:
        if self.alive[i]:
            self.alive[i] = False
            self.n_alive -= 1
            if self.n_alive <= len(self.ids) // 2:
                self._rebuild()

    def nearest(self, i: int) -> int:
        others = self.n_alive - int(self.alive[i])
        if others <= 0:
            raise NoCandidateError(f"no unpaired node left for {i}")
        size = len(self.ids)
        k = min(8, size)
        while True:
            dist, pos = self.tree.query(self.P[i], k=k)
            dist, pos = np.atleast_1d(dist), np.atleast_1d(pos)
            cand = self.ids[pos]
            ok = self.alive[cand] & (cand != i)
            if ok.any():
                dmin = dist[ok].min()
                if k == size or dist[-1] > dmin:
                    return int(cand[ok & (dist == dmin)].min())
            if k == size:
                raise NoCandidateError(f"no unpaired node left for {i}")
            k = min(2 * k, size)


def nearest_unpaired(e: Embedding, i: int, used) -> int:
    """Closest node to ``i`` that is neither ``i`` nor in ``used``."""
    alive = np.ones(e.n, dtype=bool)
    alive[list(used)] = False
    return UnpairedIndex(e.positions, alive).nearest(i)
