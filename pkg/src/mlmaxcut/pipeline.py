"""Multilevel solve: coarsen, solve the coarsest graph, then uncoarsen.

At each level the coarse solution is copied onto the fine nodes and then
improved by several independent refinement instances, keeping the best.
"""
from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._rng import child_seed
from .coarsening import ContractionMap, Hierarchy, build_hierarchy
from .graph import CutAssignment, Graph, cut_value
from .qaoa import DEFAULT_MAX_QUBITS
from .solvers import (SOLVERS, CapacityError, SolverRequest, UnknownSolverError,
                      checked_solve, get_solver, solve_exact, solve_tabu)
from .subproblem import Subproblem, build_subproblem, merge_solution

log = logging.getLogger(__name__)

EXACT_COARSEST_MAX = 20


@dataclass
class RunConfig:
    K: int = 100
    multistarts: int = 40
    d: int = 3
    sparsify_fraction: float = 0.0
    solver: str = "tabu"
    seed: int = 0
    coarsest_budget: float = 5.0
    subproblem_budget: float = 0.1
    no_improve_limit: int = 3
    embed_iters: int = 30
    coarsest_iters: int = 20000
    subproblem_iters: int = 1000
    qaoa_p: int = 3
    qaoa_shots: int = 1024
    qaoa_max_qubits: int = DEFAULT_MAX_QUBITS

    def validate(self) -> "RunConfig":
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if self.multistarts < 1:
            raise ValueError("multistarts must be at least 1")
        if self.no_improve_limit < 1:
            raise ValueError("no_improve_limit must be at least 1")
        if not 0.0 <= self.sparsify_fraction < 1.0:
            raise ValueError("sparsify_fraction must lie in [0, 1)")
        if self.solver not in SOLVERS:
            raise UnknownSolverError(
                f"unknown solver {self.solver!r}; available: {', '.join(sorted(SOLVERS))}")
        if self.solver == "qaoa" and self.K > self.qaoa_max_qubits:
            raise ValueError(f"K={self.K} exceeds the QAOA qubit cap of {self.qaoa_max_qubits}")
        return self

    def make_solver(self):
        if self.solver == "qaoa":
            return get_solver("qaoa", p=self.qaoa_p, shots=self.qaoa_shots,
                              max_qubits=self.qaoa_max_qubits)
        return get_solver(self.solver)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class RefineResult:
    assignment: CutAssignment
    trace: list          # objective after every iteration, starting value first
    iterations: int = 0
    solves: int = 0
    failures: int = 0

    @property
    def objective(self) -> float:
        return self.assignment.objective


@dataclass
class RunReport:
    best_objective: float
    best_assignment: np.ndarray
    per_level: list
    coarse_ratio: float | None
    wall_time: float
    config: RunConfig
    coarsened: bool = True
    hierarchy: Hierarchy | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "objective": self.best_objective,
            "assignment": [int(b) for b in self.best_assignment],
            "coarse_ratio": self.coarse_ratio,
            "coarsened": self.coarsened,
            "per_level": self.per_level,
            "wall_time": self.wall_time,
            "config": asdict(self.config),
            "seed": self.config.seed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def write_partition(self, path, labels=None) -> None:
        ids = range(len(self.best_assignment)) if labels is None else labels
        with open(path, "w") as fh:
            for node, part in zip(ids, self.best_assignment):
                fh.write(f"{node} {int(part)}\n")


def interpolate(x_c: CutAssignment, m: ContractionMap, g_f: Graph) -> CutAssignment:
    """Give every fine node the side of the coarse node it was merged into."""
    return CutAssignment.from_x(g_f, x_c.x[m.fine_to_coarse])


def _solve_one(solver, req):
    try:
        return checked_solve(solver, req)
    except CapacityError:
        log.info("subproblem of size %d over solver capacity, using tabu", req.subproblem.K)
        return checked_solve(solve_tabu, req)


def refine_level(g: Graph, x0: CutAssignment, cfg: RunConfig, instance_seed=None,
                 solver=None) -> RefineResult:
    """Improve ``x0`` by repeatedly re-solving subproblems on high-gain nodes.

    Each iteration samples ``max(0.2 |V|, 2K)`` nodes (capped at ``|V|``),
    frees the ``K`` of them with the largest gain and solves the resulting
    subproblem. The answer is kept whenever it does not lower the
    objective. Stops after ``cfg.no_improve_limit`` consecutive iterations
    without a strict improvement.
    """
    rng = np.random.default_rng(instance_seed)
    solver = cfg.make_solver() if solver is None else solver
    x = x0.copy()
    n, K = g.n, cfg.K
    size = min(n, math.ceil(max(0.2 * n, 2 * K)))
    res = RefineResult(x, [x.objective])
    stale = 0
    while stale < cfg.no_improve_limit:
        res.iterations += 1
        subset = rng.choice(n, size=size, replace=False)
        if size > K:
            order = np.lexsort((subset, -x.gains[subset]))
            subset = subset[order[:K]]
        sp = build_subproblem(g, x, subset)
        y0 = x.x[subset].copy()
        req = SolverRequest(sp, y0, time_limit=cfg.subproblem_budget,
                            max_iters=cfg.subproblem_iters, seed=int(rng.integers(1 << 62)))
        try:
            out = _solve_one(solver, req)
        except Exception:
            log.warning("subproblem solve failed; skipping iteration", exc_info=True)
            res.failures += 1
            stale += 1
            res.trace.append(x.objective)
            continue
        res.solves += 1
        before = sp.objective(y0)
        if out.objective >= before:
            # merge into a copy so an equal-value move whose incremental
            # sum rounds a hair lower cannot pull the objective down
            cand = merge_solution(g, x.copy(), sp, out.y)
            if cand.objective >= x.objective:
                x = res.assignment = cand
        stale = 0 if out.objective > before else stale + 1
        res.trace.append(x.objective)
    final = cut_value(g, x.x)
    if abs(final - x.objective) > 1e-9 * max(1.0, abs(final)):
        raise RuntimeError(f"refined objective {x.objective} drifted from {final}")
    return res


def _refine_task(args):
    g, x0, cfg, seed = args
    return refine_level(g, x0, cfg, seed)


def multistart_refine(g: Graph, x0: CutAssignment, cfg: RunConfig, level: int = 0,
                      executor=None):
    """Run ``cfg.multistarts`` independent refinements; return ``(best, all)``.

    Instance ``r`` draws from the stream ``(cfg.seed, level, r)``, so the
    outcome does not depend on scheduling. Ties go to the lowest index.
    Instances that raise are logged and left out of the selection (their
    slot in ``all`` is ``None``); if every instance fails a
    ``RuntimeError`` chained to the last failure is raised.
    """
    seeds = [child_seed(cfg.seed, level, r) for r in range(cfg.multistarts)]
    tasks = [(g, x0, cfg, s) for s in seeds]
    if executor is None:
        outcomes = []
        for t in tasks:
            try:
                outcomes.append(_refine_task(t))
            except Exception as exc:
                outcomes.append(exc)
    else:
        futures = [executor.submit(_refine_task, t) for t in tasks]
        outcomes = [f.exception() or f.result() for f in futures]
    results = [None if isinstance(o, Exception) else o for o in outcomes]
    ok = [r for r, res in enumerate(results) if res is not None]
    for r, o in enumerate(outcomes):
        if isinstance(o, Exception):
            log.warning("refinement instance %d on level %d failed: %s", r, level, o)
    if not ok:
        raise RuntimeError(f"all {len(tasks)} refinement instances failed on level {level}") \
            from outcomes[-1]
    best = max(ok, key=lambda r: (results[r].objective, -r))
    return results[best], results


def _threads() -> int:
    env = os.environ.get("MLMC_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def solve(g: Graph, cfg: RunConfig | None = None, threads: int | None = None,
          keep_embeddings: bool = False) -> RunReport:
    """Full multilevel run on ``g``. ``threads`` caps concurrent refinements."""
    cfg = (cfg or RunConfig()).validate()
    t0 = time.perf_counter()
    h = build_hierarchy(g, cfg.K, d=cfg.d, sparsify_fraction=cfg.sparsify_fraction,
                        seed=cfg.seed, embed_iters=cfg.embed_iters,
                        keep_embeddings=keep_embeddings)
    L = h.depth - 1
    threads = _threads() if threads is None else threads
    executor = ProcessPoolExecutor(threads) if threads > 1 and cfg.multistarts > 1 else None
    try:
        coarse = h.levels[L]
        sp = Subproblem.whole_graph(coarse)
        coarse_solver = solve_exact if coarse.n <= EXACT_COARSEST_MAX else solve_tabu
        req = SolverRequest(sp, np.zeros(coarse.n, dtype=np.int8),
                            time_limit=cfg.coarsest_budget, max_iters=cfg.coarsest_iters,
                            seed=child_seed(cfg.seed, L, 1 << 20))
        out = checked_solve(coarse_solver, req)
        x = CutAssignment.from_x(coarse, out.y)
        coarsest_objective = x.objective
        per_level = []
        for k in range(L, -1, -1):
            G = h.levels[k]
            if k < L:
                x = interpolate(x, h.maps[k], G)
            start = x.objective
            best, runs = multistart_refine(G, x, cfg, level=k, executor=executor)
            runs = [r for r in runs if r is not None]
            x = best.assignment
            stats = G.stats()
            per_level.append({
                "level": k,
                "nodes": stats["nodes"],
                "edges": stats["edges"],
                "avg_degree": stats["avg_degree"],
                "density": stats["density"],
                "lost_weight": h.lost_weight[k] if k < L else 0.0,
                "sparsified_edges": h.removed_edges[k] if k < L else 0,
                "coarse_objective": start,
                "refined_objective": x.objective,
                "iterations": sum(r.iterations for r in runs),
                "subproblem_solves": sum(r.solves for r in runs),
                "solver_failures": sum(r.failures for r in runs),
            })
    finally:
        if executor is not None:
            executor.shutdown()

    final = cut_value(g, x.x)
    if abs(final - x.objective) > 1e-9 * max(1.0, abs(final)):
        raise RuntimeError(f"final objective {x.objective} does not match recomputed {final}")
    ratio = coarsest_objective / final if final > 0 else None
    return RunReport(final, x.x.copy(), per_level, ratio, time.perf_counter() - t0,
                     cfg, coarsened=h.coarsened, hierarchy=h)
