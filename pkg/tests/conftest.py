import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from mlmaxcut.graph import Graph


def random_graph(rng, n, p=0.5, weights="int", wmax=10):
    """Erdos-Renyi style graph; ``weights`` is "int", "float" or "unit"."""
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    iu, iv = iu[keep], iv[keep]
    if weights == "int":
        w = rng.integers(1, wmax + 1, len(iu)).astype(float)
    elif weights == "float":
        w = rng.uniform(0.1, 5.0, len(iu))
    else:
        w = np.ones(len(iu))
    return Graph.from_edges(n, iu, iv, w)


def brute_cut(edges, bits):
    """Plain-Python cut value over ``(i, j, w)`` triples."""
    return sum(w for i, j, w in edges if bits[i] != bits[j])


def brute_force_maxcut(g):
    """Exhaustive 2^n enumeration, written without numpy on purpose."""
    edges = list(zip(g.u.tolist(), g.v.tolist(), g.w.tolist()))
    best, best_bits = -1.0, None
    for bits in itertools.product((0, 1), repeat=g.n):
        val = brute_cut(edges, bits)
        if val > best:
            best, best_bits = val, bits
    return best, np.array(best_bits)


def brute_force_subproblem(sp):
    """Enumerate a subproblem through its scalar objective only."""
    best = -np.inf
    for bits in itertools.product((0, 1), repeat=sp.K):
        best = max(best, sp.objective(np.array(bits)))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [0, 1, 0], [1, 2, 2])


@pytest.fixture
def square():
    # 4-cycle 0-1-2-3-0
    return Graph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])


def dense_evolve(values, angles):
    """Oracle: full matrix exponentials of the diagonal cost and the summed X mixer."""
    K = int(np.log2(len(values)))
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    B = np.zeros((1 << K, 1 << K), dtype=complex)
    for q in range(K):
        # qubit q is bit q of z, i.e. the q-th factor counted from the right
        ops = [np.eye(2)] * K
        ops[K - 1 - q] = X
        term = ops[0]
        for op in ops[1:]:
            term = np.kron(term, op)
        B += term
    psi = np.full(1 << K, 2 ** (-K / 2), dtype=complex)
    for g, b in zip(angles.gamma, angles.beta):
        psi = expm(-1j * b * B) @ (expm(-1j * g * np.diag(values)) @ psi)
    return psi
