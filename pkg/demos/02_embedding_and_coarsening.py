"""
Embedding and coarsening
========================

Nodes are placed on the unit sphere so that neighbors repel each other.
Nodes that end up close together share little edge weight, so merging
them costs little of the cut. Merging nearest pairs halves the graph, and
repeating that builds a hierarchy.
"""
import numpy as np

from mlmaxcut import (CutAssignment, Graph, build_hierarchy, contract, cut_value, embed,
                      interpolate, match_pairs)

rng = np.random.default_rng(0)
n = 400
iu, iv = np.triu_indices(n, 1)
keep = rng.random(len(iu)) < 0.03
g = Graph.from_edges(n, iu[keep], iv[keep])
print(f"graph: {g.n} nodes, {g.m} edges")

# The embedding objective (weighted edge length) never goes down.
e = embed(g, d=3, iters=30, seed=1)
print(f"embedding: {e.iterations_run} sweeps, objective "
      f"{e.objective_trace[0]:.1f} -> {e.objective_trace[-1]:.1f}")

# One coarsening step. Weight between merged partners becomes a self-loop,
# which no cut can ever cross, so it is set aside as lost weight.
m = match_pairs(g, e, seed=2)
gc, lost = contract(g, m)
print(f"coarse graph: {gc.n} nodes, {gc.m} edges, lost weight {lost:g} "
      f"of {g.total_weight:g}")

# Copying a coarse cut back to the fine nodes keeps its value exactly.
xc = CutAssignment.from_x(gc, rng.integers(0, 2, gc.n))
xf = interpolate(xc, m, g)
print("coarse cut", xc.objective, "== fine cut", cut_value(g, xf.x))

# The full hierarchy stops once a level is smaller than the subproblem size.
h = build_hierarchy(g, K=40, seed=3)
print("level sizes:", [G.n for G in h.levels])
