"""Pairwise coarsening driven by the repulsive embedding.

Nodes are matched to their nearest unpaired neighbor in embedding space
and each pair is contracted into one coarse node, which is ``P^T A P``
with the diagonal dropped. Intra-pair edges vanish (their weight is
recorded as ``lost``), so any coarse cut interpolates to a fine cut of
exactly the same value.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._rng import child_rng
from .embedding import Embedding, NoCandidateError, UnpairedIndex, embed
from .graph import Graph

log = logging.getLogger(__name__)


@dataclass
class ContractionMap:
    fine_to_coarse: np.ndarray
    pairs: list
    singleton: int | None = None

    @property
    def n_fine(self) -> int:
        return len(self.fine_to_coarse)

    @property
    def n_coarse(self) -> int:
        return len(self.pairs) + (self.singleton is not None)

    def prolongation(self) -> np.ndarray:
        """Dense ``n_fine x n_coarse`` 0/1 matrix with one 1 per row."""
        P = np.zeros((self.n_fine, self.n_coarse))
        P[np.arange(self.n_fine), self.fine_to_coarse] = 1.0
        return P


@dataclass
class Hierarchy:
    levels: list            # Graph per level, finest first
    maps: list              # ContractionMap from level k to k + 1
    lost_weight: list       # intra-pair weight dropped contracting level k
    contracted: list        # graph actually contracted at level k (sparsified or not)
    removed_edges: list = field(default_factory=list)
    embeddings: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def coarsened(self) -> bool:
        return len(self.levels) > 1


def match_pairs(g: Graph, e: Embedding, seed=None, order=None) -> ContractionMap:
    """Greedy nearest-neighbor matching in random visiting order.

    Pairs get coarse ids in the order they form; with odd ``n`` the last
    unmatched node becomes a singleton with the highest coarse id.
    """
    if order is None:
        order = np.random.default_rng(seed).permutation(g.n)
    index = UnpairedIndex(e.positions)
    pairs = []
    singleton = None
    for i in order:
        i = int(i)
        if not index.alive[i]:
            continue
        index.remove(i)
        try:
            j = index.nearest(i)
        except NoCandidateError:
            singleton = i
            continue
        index.remove(j)
        pairs.append((i, j))

    F = np.empty(g.n, dtype=np.int64)
    for q, (i, j) in enumerate(pairs):
        F[i] = F[j] = q
    if singleton is not None:
        F[singleton] = len(pairs)
    return ContractionMap(F, pairs, singleton)


def contract(g_f: Graph, m: ContractionMap):
    """Coarse graph from ``P^T A_f P`` without its diagonal, plus the dropped weight."""
    F = m.fine_to_coarse
    cu, cv = F[g_f.u], F[g_f.v]
    intra = cu == cv
    lost = float(g_f.w[intra].sum())
    keep = ~intra
    g_c = Graph.from_edges(m.n_coarse, cu[keep], cv[keep], g_f.w[keep])
    return g_c, lost


def sparsify(g: Graph, e: Embedding, fraction: float) -> Graph:
    """Drop the shortest edges, handing each one's weight to a neighbor edge.

    Edges are ranked once by weighted embedded length ``w * |p_u - p_v|``.
    The ``floor(fraction * m)`` shortest are visited in ascending order and
    each moves its weight to the surviving edge sharing an endpoint with
    the greatest embedded length (ties to the lower edge id). An edge with
    no surviving neighbor stays. Total weight is preserved.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    quota = int(np.floor(fraction * g.m))
    if quota == 0:
        return g

    P = e.positions
    length = np.linalg.norm(P[g.u] - P[g.v], axis=1)
    order = np.argsort(g.w * length, kind="stable")[:quota]

    # incident edge ids per node, longest first, ties by id
    eid = np.concatenate([np.arange(g.m), np.arange(g.m)])
    node = np.concatenate([g.u, g.v])
    srt = np.lexsort((eid, -length[eid], node))
    inc = eid[srt]
    start = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(node, minlength=g.n), out=start[1:])
    ptr = start[:-1].copy()

    w = g.w.copy()
    removed = np.zeros(g.m, dtype=bool)

    def longest_other(a, skip):
        k = ptr[a]
        while k < start[a + 1] and removed[inc[k]]:
            k += 1
        ptr[a] = k
        while k < start[a + 1] and (removed[inc[k]] or inc[k] == skip):
            k += 1
        return inc[k] if k < start[a + 1] else -1

    for k in order:
        best = -1
        for a in (g.u[k], g.v[k]):
            c = longest_other(a, k)
            if c >= 0 and (best < 0 or length[c] > length[best]
                           or (length[c] == length[best] and c < best)):
                best = c
        if best < 0:
            continue
        w[best] += w[k]
        removed[k] = True

    keep = ~removed
    return Graph(g.n, g.u[keep], g.v[keep], w[keep], labels=g.labels)


def build_hierarchy(g: Graph, K: int, d: int = 3, sparsify_fraction: float = 0.0,
                    seed=0, embed_iters: int = 30, embed_tol: float = 1e-4,
                    keep_embeddings: bool = False) -> Hierarchy:
    """Coarsen until the coarsest level has fewer than ``K`` nodes."""
    if K < 2:
        raise ValueError("subproblem size K must be at least 2")
    h = Hierarchy([g], [], [], [])
    level = 0
    while h.levels[-1].n >= K:
        G = h.levels[-1]
        e = embed(G, d=d, iters=embed_iters, seed=child_rng(seed, level, 0), tol=embed_tol)
        Gs = sparsify(G, e, sparsify_fraction) if sparsify_fraction > 0 else G
        m = match_pairs(Gs, e, seed=child_rng(seed, level, 1))
        g_c, lost = contract(Gs, m)
        log.debug("level %d: %d nodes, %d edges -> %d nodes, %d edges (lost %g)",
                  level, G.n, G.m, g_c.n, g_c.m, lost)
        h.levels.append(g_c)
        h.maps.append(m)
        h.lost_weight.append(lost)
        h.contracted.append(Gs)
        h.removed_edges.append(G.m - Gs.m)
        if keep_embeddings:
            h.embeddings.append(e)
        level += 1
    return h
