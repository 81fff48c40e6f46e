"""Local Max-Cut subproblems over a chosen set of free nodes.

Every node outside the chosen set keeps its current side. The fixed nodes
of each side act as one pinned super-node, which shows up here as a linear
bias on each free node: ``bias0[i]`` is collected when free node ``i`` sits
in part 1 (opposite the part-0 super-node) and ``bias1[i]`` when it sits in
part 0. Cut weight among fixed nodes is a constant, so the subproblem
objective is the full-graph cut value of the merged assignment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import CutAssignment, Graph, _wsum, apply_flip


@dataclass
class Subproblem:
    free_nodes: np.ndarray
    iu: np.ndarray          # internal edges in local indices, iu < iv
    iv: np.ndarray
    iw: np.ndarray
    bias0: np.ndarray
    bias1: np.ndarray
    constant: float = 0.0
    _dense: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def K(self) -> int:
        return len(self.free_nodes)

    @property
    def total_weight(self) -> float:
        return float(self.iw.sum() + self.bias0.sum() + self.bias1.sum())

    def dense(self) -> np.ndarray:
        """Symmetric ``K x K`` internal weight matrix (cached)."""
        if self._dense is None:
            W = np.zeros((self.K, self.K))
            W[self.iu, self.iv] = self.iw
            W[self.iv, self.iu] = self.iw
            self._dense = W
        return self._dense

    def objective(self, y) -> float:
        y = np.asarray(y)
        if y.shape != (self.K,):
            raise ValueError(f"expected {self.K} bits, got shape {y.shape}")
        cut = self.iw[y[self.iu] != y[self.iv]].sum()
        return float(self.constant + y @ self.bias0 + (1 - y) @ self.bias1 + cut)

    def evaluate_batch(self, Y: np.ndarray) -> np.ndarray:
        """Objective of every row of a ``B x K`` 0/1 matrix."""
        Y = np.asarray(Y, dtype=np.float64)
        out = self.constant + Y @ (self.bias0 - self.bias1) + self.bias1.sum()
        if len(self.iw):
            out += (Y[:, self.iu] != Y[:, self.iv]) @ self.iw
        return out

    @classmethod
    def whole_graph(cls, g: Graph) -> "Subproblem":
        """Pin-free subproblem spanning every node of ``g``."""
        return build_subproblem(g, np.zeros(g.n, dtype=np.int8), np.arange(g.n))

    # QUBO text form, for cross-checking with external solvers

    def qubo_terms(self):
        """``(offset, linear, quadratic)`` with ``f(y) = offset + a.y + sum b_ij y_i y_j``."""
        linear = self.bias0 - self.bias1
        linear = linear + _wsum(self.iu, self.iw, self.K) + _wsum(self.iv, self.iw, self.K)
        quad = [(int(i), int(j), -2.0 * float(w)) for i, j, w in zip(self.iu, self.iv, self.iw)]
        return self.constant + float(self.bias1.sum()), linear, quad

    def to_qubo_text(self) -> str:
        offset, linear, quad = self.qubo_terms()
        lines = ["# maximize offset + sum_i l_i y_i + sum_{i<j} q_ij y_i y_j over y in {0,1}^K",
                 f"K {self.K}", f"c {offset!r}"]
        lines += [f"l {i} {float(a)!r}" for i, a in enumerate(linear) if a != 0]
        lines += [f"q {i} {j} {b!r}" for i, j, b in quad]
        return "\n".join(lines) + "\n"


def parse_qubo_text(text: str):
    """Inverse of :meth:`Subproblem.to_qubo_text`: ``(offset, linear, Q)``.

    ``Q`` is upper triangular.
    """
    K, offset, linear, Q = None, 0.0, None, None
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        if tag == "K":
            K = int(parts[1])
            linear, Q = np.zeros(K), np.zeros((K, K))
        elif tag == "c":
            offset = float(parts[1])
        elif tag == "l":
            linear[int(parts[1])] += float(parts[2])
        elif tag == "q":
            i, j = sorted((int(parts[1]), int(parts[2])))
            Q[i, j] += float(parts[3])
        else:
            raise ValueError(f"unknown QUBO line {line!r}")
    return offset, linear, Q


def build_subproblem(g: Graph, x, chosen) -> Subproblem:
    """Subproblem freeing ``chosen`` while every other node keeps its side in ``x``."""
    xv = x.x if isinstance(x, CutAssignment) else np.asarray(x)
    chosen = np.asarray(chosen, dtype=np.int64)
    K = len(chosen)
    local = np.full(g.n, -1, dtype=np.int64)
    local[chosen] = np.arange(K)
    if np.count_nonzero(local >= 0) != K:
        raise ValueError("chosen nodes must be distinct")

    starts = g.indptr[chosen]
    counts = g.indptr[chosen + 1] - starts
    total = int(counts.sum())
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
    idx = offsets + np.arange(total)
    row = np.repeat(np.arange(K), counts)
    nbr = g.indices[idx]
    w = g.data[idx]
    col = local[nbr]

    internal = col > row
    external = col < 0
    side = xv[nbr]
    bias0 = _wsum(row[external & (side == 0)], w[external & (side == 0)], K)
    bias1 = _wsum(row[external & (side == 1)], w[external & (side == 1)], K)

    fixed = (local[g.u] < 0) & (local[g.v] < 0)
    constant = float(g.w[fixed & (xv[g.u] != xv[g.v])].sum())
    return Subproblem(chosen, row[internal], col[internal], w[internal],
                      bias0, bias1, constant)


def merge_solution(g: Graph, x: CutAssignment, sp: Subproblem, y) -> CutAssignment:
    """Write ``y`` onto the free nodes of ``x`` in place, keeping gains current."""
    y = np.asarray(y)
    if y.shape != (sp.K,):
        raise ValueError(f"expected {sp.K} bits, got shape {y.shape}")
    for k in np.flatnonzero(y != x.x[sp.free_nodes]):
        apply_flip(g, x, int(sp.free_nodes[k]))
    return x
