"""Dense statevector QAOA for pinned Max-Cut subproblems.

Qubit ``q`` carries free variable ``y_q`` and is bit ``q`` of the basis
index ``z``, so the problem Hamiltonian is the diagonal vector of
subproblem objectives over all ``z``. Each layer applies the phase
``exp(-i gamma H)`` and then the transverse-field mixer ``exp(-i beta X)``
on every qubit. Angles are tuned by multistart Nelder-Mead to maximize
``<H>``, and the answer is the best of a batch of sampled bitstrings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .solvers import CapacityError, SolverRequest, SolverResult, _bits, _floor_at_warm_start
from .subproblem import Subproblem

DEFAULT_MAX_QUBITS = 16


@dataclass
class QaoaAngles:
    gamma: np.ndarray
    beta: np.ndarray
    expectation: float | None = None

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if len(self.gamma) != len(self.beta) or len(self.gamma) < 1:
            raise ValueError("gamma and beta need the same length p >= 1")

    @property
    def p(self) -> int:
        return len(self.gamma)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta])

    @classmethod
    def from_vector(cls, theta, expectation=None) -> "QaoaAngles":
        theta = np.asarray(theta, dtype=float)
        p = len(theta) // 2
        return cls(theta[:p], theta[p:], expectation)


def build_hamiltonian(sp: Subproblem, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Subproblem objective for every basis state ``z`` in ``[0, 2^K)``."""
    K = sp.K
    if K > max_qubits:
        raise CapacityError(f"QAOA simulator is capped at {max_qubits} qubits, got K={K}; use 'tabu'")
    z = np.arange(1 << K, dtype=np.int64)
    return sp.evaluate_batch(_bits(z, K))


def uniform_state(K: int) -> np.ndarray:
    return np.full(1 << K, (1 << K) ** -0.5, dtype=np.complex128)


def _popcount_xor(k: int) -> np.ndarray:
    a = np.arange(1 << k)
    x = a[:, None] ^ a[None, :]
    return np.array([bin(t).count("1") for t in range(1 << k)])[x]


_POPCOUNT: dict[int, np.ndarray] = {}


def rx_power(beta: float, k: int) -> np.ndarray:
    """``exp(-i beta X)`` tensored over ``k`` qubits as a dense ``2^k`` matrix."""
    if k not in _POPCOUNT:
        _POPCOUNT[k] = _popcount_xor(k)
    flips = _POPCOUNT[k]
    c, s = np.cos(beta), -1j * np.sin(beta)
    return (c ** np.arange(k, -1, -1) * s ** np.arange(k + 1))[flips]


def apply_mixer(state: np.ndarray, beta: float, K: int) -> np.ndarray:
    """``exp(-i beta X)`` on every qubit, in place.

    The mixer factorizes over the low and high halves of the qubits, so it
    is two small matrix products on the state viewed as ``2^hi x 2^lo``.
    """
    lo = K // 2
    hi = K - lo
    S = state.reshape(1 << hi, 1 << lo)
    S[...] = rx_power(beta, hi) @ S @ rx_power(beta, lo)
    return state


def evolve(values: np.ndarray, angles: QaoaAngles, callback=None) -> np.ndarray:
    """Prepare ``|gamma, beta>`` from the uniform superposition.

    ``callback(layer, state)`` runs after every layer if given.
    """
    K = int(np.log2(len(values)))
    state = uniform_state(K)
    phase = np.empty(len(values), dtype=np.complex128)
    for layer, (g, b) in enumerate(zip(angles.gamma, angles.beta)):
        theta = g * values
        phase.real = np.cos(theta)
        phase.imag = -np.sin(theta)
        state *= phase
        apply_mixer(state, b, K)
        if callback is not None:
            callback(layer, state)
    return state


def expectation(values: np.ndarray, state: np.ndarray) -> float:
    return float(values @ (state.real ** 2 + state.imag ** 2))


class _BudgetExhausted(Exception):
    pass


def optimize_angles(values: np.ndarray, p: int, seed=None, eval_budget: int | None = None,
                    starts: int = 10, initial=()) -> QaoaAngles:
    """Maximize ``<H>`` over ``2p`` angles with Nelder-Mead from several starts.

    Random starts draw ``gamma`` from ``[0, 2pi)`` and ``beta`` from
    ``[0, pi)``; any vectors in ``initial`` are tried first. Each start gets
    ``eval_budget`` energy evaluations (default ``200 p``); a budget of one
    only scores the start. Returns the best angles seen anywhere.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    eval_budget = 200 * p if eval_budget is None else int(eval_budget)
    if eval_budget < 1:
        raise ValueError("eval_budget must be >= 1")
    rng = np.random.default_rng(seed)
    x0s = [np.asarray(t, dtype=float) for t in initial]
    for _ in range(starts):
        x0s.append(np.concatenate([rng.uniform(0, 2 * np.pi, p), rng.uniform(0, np.pi, p)]))

    best_theta, best_val = None, -np.inf
    for x0 in x0s:
        count = 0

        def energy(theta):
            nonlocal count, best_theta, best_val
            if count >= eval_budget:
                raise _BudgetExhausted
            count += 1
            val = expectation(values, evolve(values, QaoaAngles.from_vector(theta)))
            if val > best_val:
                best_theta, best_val = np.array(theta, dtype=float), val
            return -val

        energy(x0)
        if eval_budget == 1:
            continue
        simplex = np.vstack([x0, x0 + 0.25 * np.eye(2 * p)])
        try:
            minimize(energy, x0, method="Nelder-Mead",
                     options={"maxfev": eval_budget, "initial_simplex": simplex,
                              "xatol": 1e-6, "fatol": 1e-9})
        except _BudgetExhausted:
            pass
    return QaoaAngles.from_vector(best_theta, best_val)


def solve_qaoa(req: SolverRequest, p: int = 3, shots: int = 1024,
               max_qubits: int = DEFAULT_MAX_QUBITS, starts: int = 10,
               eval_budget: int | None = None) -> SolverResult:
    """Best of ``shots`` samples from an optimized depth-``p`` QAOA state.

    Falls back to the warm start when no sample beats it.
    """
    values = build_hamiltonian(req.subproblem, max_qubits)
    rng = np.random.default_rng(req.seed)
    angles = optimize_angles(values, p, seed=rng.integers(1 << 62), eval_budget=eval_budget,
                             starts=starts)
    probs = np.abs(evolve(values, angles)) ** 2
    probs /= probs.sum()
    samples = rng.choice(len(values), size=shots, p=probs)
    z = int(samples[np.argmax(values[samples])])
    y = _bits(np.array([z]), req.subproblem.K)[0]
    budget = 200 * p if eval_budget is None else eval_budget
    return _floor_at_warm_start(req, y, "qaoa", starts * budget + shots)
