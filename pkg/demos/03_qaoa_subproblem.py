"""
Solving a subproblem with simulated QAOA
========================================

A subproblem frees a handful of nodes and pins the rest. The pinned
nodes turn into a linear bias on each free node. With 12 free nodes the
whole objective fits in a 4096-entry vector, which is exactly the diagonal
cost Hamiltonian a QAOA circuit needs.
"""
import numpy as np

from mlmaxcut import (Graph, SolverRequest, build_hamiltonian, build_subproblem, evolve,
                      optimize_angles, solve_exact, solve_qaoa)

rng = np.random.default_rng(4)
n = 40
iu, iv = np.triu_indices(n, 1)
keep = rng.random(len(iu)) < 0.2
g = Graph.from_edges(n, iu[keep], iv[keep], rng.integers(1, 11, keep.sum()).astype(float))
x = rng.integers(0, 2, n)
free = rng.choice(n, 12, replace=False)
sp = build_subproblem(g, x, free)
print(f"subproblem: {sp.K} free nodes, {len(sp.iw)} internal edges, constant {sp.constant:g}")

values = build_hamiltonian(sp)
print(f"objective range over all {len(values)} assignments: {values.min():g} .. {values.max():g}")

# Deeper circuits reach a higher expected objective.
for p in (1, 2, 3):
    angles = optimize_angles(values, p, seed=0)
    probs = np.abs(evolve(values, angles)) ** 2
    print(f"p={p}: <H> = {angles.expectation:.2f}, "
          f"probability of an optimal bitstring {probs[values == values.max()].sum():.3f}")

# The solver samples shots from the tuned state and keeps the best one.
req = SolverRequest(sp, x[free], seed=0)
q, ex = solve_qaoa(req, p=3, shots=1024), solve_exact(req)
print(f"qaoa {q.objective:g} vs exact {ex.objective:g} (ratio {q.objective / ex.objective:.4f})")
print(sp.to_qubo_text().splitlines()[0])
