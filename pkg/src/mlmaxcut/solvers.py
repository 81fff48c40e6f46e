"""Subproblem solvers sharing one request/result contract.

A solver receives a :class:`SolverRequest` and must return a
:class:`SolverResult` whose objective is the subproblem objective of its
bitstring and is never below the warm start's. :func:`checked_solve`
enforces both on every call.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from .subproblem import Subproblem

EXACT_MAX_K = 22


class CapacityError(ValueError):
    """Subproblem is too large for the requested solver."""


class SolverContractError(RuntimeError):
    """A solver returned a result that violates the solver contract."""


class UnknownSolverError(ValueError):
    pass


@dataclass
class SolverRequest:
    subproblem: Subproblem
    warm_start: np.ndarray
    time_limit: float | None = None
    max_iters: int | None = None
    seed: object = 0

    def __post_init__(self):
        self.warm_start = np.asarray(self.warm_start, dtype=np.int8)
        if self.warm_start.shape != (self.subproblem.K,):
            raise ValueError("warm start length must equal the subproblem size")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class SolverResult:
    y: np.ndarray
    objective: float
    solver_name: str
    evaluations: int = 0


def _floor_at_warm_start(req: SolverRequest, y, name: str, evaluations: int) -> SolverResult:
    sp = req.subproblem
    y = np.asarray(y, dtype=np.int8)
    obj = sp.objective(y)
    warm = sp.objective(req.warm_start)
    if obj < warm:
        y, obj = req.warm_start.copy(), warm
    return SolverResult(y, obj, name, evaluations)


def _bits(z: np.ndarray, K: int) -> np.ndarray:
    return ((z[:, None] >> np.arange(K)) & 1).astype(np.int8)


def solve_exact(req: SolverRequest, chunk: int = 1 << 14) -> SolverResult:
    """Enumerate all ``2^K`` assignments; ties go to the smallest ``sum y_i 2^i``.

    The objective splits over the low and high halves of ``z``: each half
    has its own table of values, and the edges between halves add a
    bilinear term, so every block of ``2^lo`` values is one small matrix
    product instead of a row-by-row evaluation.
    """
    sp = req.subproblem
    K = sp.K
    if K > EXACT_MAX_K:
        raise CapacityError(f"exact solver handles K <= {EXACT_MAX_K}, got {K}; use 'tabu'")
    # f(y) = c + a.y - y^T W y with W symmetric and zero on the diagonal
    W = sp.dense()
    a = sp.bias0 - sp.bias1 + W.sum(axis=1)
    c = sp.constant + float(sp.bias1.sum())
    lo = K // 2
    Ylo = _bits(np.arange(1 << lo), lo).astype(np.float64)
    Flo = Ylo @ a[:lo] - np.einsum("ri,ij,rj->r", Ylo, W[:lo, :lo], Ylo)
    cross = -2.0 * (W[lo:, :lo] @ Ylo.T)                   # (K - lo) x 2^lo
    rows = max(1, chunk >> lo)
    best_z, best_val = 0, -np.inf
    for start in range(0, 1 << (K - lo), rows):
        h = np.arange(start, min(start + rows, 1 << (K - lo)))
        Yhi = _bits(h, K - lo).astype(np.float64)
        Fhi = c + Yhi @ a[lo:] - np.einsum("ri,ij,rj->r", Yhi, W[lo:, lo:], Yhi)
        block = Fhi[:, None] + Flo[None, :] + Yhi @ cross
        k = int(np.argmax(block))
        if block.flat[k] > best_val:
            best_val = block.flat[k]
            best_z = (int(h[k // (1 << lo)]) << lo) | (k % (1 << lo))
    y = _bits(np.array([best_z]), K)[0]
    return _floor_at_warm_start(req, y, "exact", 1 << K)


def solve_tabu(req: SolverRequest) -> SolverResult:
    """One-flip tabu search from the warm start.

    Each step flips the best allowed variable (largest gain, lowest index on
    ties). A flipped variable stays tabu for ``max(5, K // 10)`` steps
    unless flipping it would beat the best objective seen. After ``50 K``
    steps without a new best the search restarts from a random assignment,
    keeping the incumbent. Stops when ``max_iters`` steps are done or the
    time limit passes, whichever comes first; without either it runs
    ``100 K`` steps.
    """
    sp = req.subproblem
    K = sp.K
    rng = np.random.default_rng(req.seed)
    max_iters = req.max_iters
    if max_iters is None:
        max_iters = 1 << 62 if req.time_limit is not None else 100 * K
    deadline = np.inf if req.time_limit is None else time.perf_counter() + req.time_limit
    tenure = min(max(5, K // 10), K - 1)
    restart_after = 50 * K

    W = sp.dense()
    h = sp.bias0 - sp.bias1

    def reset(y):
        s = 1.0 - 2.0 * y
        field = W @ s
        return s, field, s * (h + field), sp.objective(y)

    y = req.warm_start.copy()
    s, field, gains, cur = reset(y)
    best, best_y = cur, y.copy()
    tabu_until = np.zeros(K, dtype=np.int64)
    stale = 0
    step = 0
    while step < max_iters:
        if step & 63 == 0 and time.perf_counter() > deadline:
            break
        allowed = (tabu_until <= step) | (cur + gains > best)
        k = int(np.argmax(np.where(allowed, gains, -np.inf)))
        cur += gains[k]
        field -= (2.0 * s[k]) * W[:, k]
        s[k] = -s[k]
        y[k] ^= 1
        np.multiply(s, h + field, out=gains)
        tabu_until[k] = step + tenure + 1
        step += 1
        if cur > best:
            best, best_y = cur, y.copy()
            stale = 0
        else:
            stale += 1
            if stale >= restart_after:
                y = rng.integers(0, 2, K, dtype=np.int8)
                s, field, gains, cur = reset(y)
                tabu_until[:] = 0
                stale = 0
    return _floor_at_warm_start(req, best_y, "tabu", step)


def _qaoa(req, **opts):
    from .qaoa import solve_qaoa
    return solve_qaoa(req, **opts)


SOLVERS = {"exact": solve_exact, "tabu": solve_tabu, "qaoa": _qaoa}


def get_solver(name: str, **options):
    """Look up a solver by name, binding any solver-specific options."""
    try:
        fn = SOLVERS[name]
    except KeyError:
        raise UnknownSolverError(
            f"unknown solver {name!r}; available: {', '.join(sorted(SOLVERS))}") from None
    return partial(fn, **options) if options else fn


def checked_solve(solver, req: SolverRequest, rtol: float = 1e-9) -> SolverResult:
    """Run ``solver`` and verify the result against the request."""
    res = solver(req)
    sp = req.subproblem
    actual = sp.objective(res.y)
    if abs(actual - res.objective) > rtol * max(1.0, abs(actual)):
        raise SolverContractError(
            f"{res.solver_name}: reported objective {res.objective} but y evaluates to {actual}")
    warm = sp.objective(req.warm_start)
    if actual < warm:
        raise SolverContractError(
            f"{res.solver_name}: objective {actual} is below the warm start's {warm}")
    return res
