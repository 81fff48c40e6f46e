"""
Graphs, cuts and gains
======================

A cut splits the nodes into part 0 and part 1 and is worth the total
weight of the edges that cross. The gain of a node is how much the cut
changes if that node switches sides.
"""
import numpy as np

from mlmaxcut import CutAssignment, Graph, apply_flip, compute_gains, cut_value

# A 4-cycle 0-1-2-3-0 with unit weights. Alternating sides cut every edge.
g = Graph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])
print(g.stats())
print("alternating cut:", cut_value(g, [0, 1, 0, 1]))
print("pairs cut:      ", cut_value(g, [0, 0, 1, 1]))

# Gains are positive where a flip helps. From the all-zero assignment every
# node would cut both of its edges.
print("gains at all-zero:", compute_gains(g, np.zeros(4, dtype=np.int8)))

# CutAssignment keeps the objective and the gain table current after each
# flip, touching only the flipped node's neighbors.
x = CutAssignment.from_x(g, [0, 0, 0, 0])
for node in (0, 2):
    apply_flip(g, x, node)
    print(f"flip {node}: x={x.x.tolist()} objective={x.objective} gains={x.gains.tolist()}")

# Duplicate edges merge by adding their weights and self-loops are dropped.
h = Graph.from_edges(3, [0, 1, 2, 0], [1, 0, 2, 2], [1.0, 2.5, 4.0, 1.0])
print("merged edges:", list(zip(h.u.tolist(), h.v.tolist(), h.w.tolist())),
      "dropped self-loops:", h.dropped_self_loops)
