import json

import numpy as np
import pytest

from mlmaxcut._rng import child_seed
from mlmaxcut.coarsening import ContractionMap, build_hierarchy, contract
from mlmaxcut.graph import CutAssignment, Graph, cut_value
from mlmaxcut.pipeline import RunConfig, interpolate, multistart_refine, refine_level, solve
from mlmaxcut.solvers import solve_tabu

from conftest import brute_force_maxcut, random_graph

FAST = dict(multistarts=3, embed_iters=5, subproblem_iters=200, coarsest_iters=2000)


class TestInterpolate:
    def test_square(self, square):
        m = ContractionMap(np.array([0, 0, 1, 1]), [(0, 1), (2, 3)])
        gc, _ = contract(square, m)
        xc = CutAssignment.from_x(gc, [0, 1])
        xf = interpolate(xc, m, square)
        assert xf.x.tolist() == [0, 0, 1, 1]
        assert xc.objective == xf.objective == 2.0

    def test_all_zero(self, rng):
        g = random_graph(rng, 30, 0.3)
        h = build_hierarchy(g, K=4, seed=0, embed_iters=3)
        xc = CutAssignment.from_x(h.levels[1], np.zeros(h.levels[1].n))
        xf = interpolate(xc, h.maps[0], g)
        assert not xf.x.any() and xf.objective == 0

    def test_every_level_exact(self, rng):
        for _ in range(20):
            g = random_graph(rng, int(rng.integers(10, 120)), 0.1)
            h = build_hierarchy(g, K=4, seed=int(rng.integers(100)), embed_iters=3)
            x = CutAssignment.from_x(h.levels[-1], rng.integers(0, 2, h.levels[-1].n))
            for k in range(h.depth - 2, -1, -1):
                xf = interpolate(x, h.maps[k], h.levels[k])
                assert xf.objective == x.objective
                x = xf


def recording(solver, log):
    def wrapped(req):
        out = solver(req)
        log.append((req.subproblem.objective(req.warm_start), out.objective))
        return out
    return wrapped


class TestRefineLevel:
    def test_whole_graph_exact_is_optimal(self, rng):
        g = random_graph(rng, 12, 0.5, "int")
        cfg = RunConfig(K=20, solver="exact", no_improve_limit=2)
        res = refine_level(g, CutAssignment.from_x(g, np.zeros(12)), cfg, instance_seed=1)
        assert res.objective == brute_force_maxcut(g)[0]
        # first solve finds the optimum, then two non-improving iterations
        assert res.iterations == 3

    def test_optimal_start_unchanged(self, rng):
        g = random_graph(rng, 10, 0.5, "int")
        best, bits = brute_force_maxcut(g)
        cfg = RunConfig(K=4, solver="exact")
        res = refine_level(g, CutAssignment.from_x(g, bits), cfg, instance_seed=0)
        assert res.objective == best

    def test_monotone_trace(self, rng):
        for seed in range(20):
            g = random_graph(rng, 60, 0.1, "float")
            calls = []
            cfg = RunConfig(K=10, subproblem_iters=100)
            res = refine_level(g, CutAssignment.from_x(g, rng.integers(0, 2, 60)), cfg,
                               instance_seed=seed, solver=recording(solve_tabu, calls))
            assert np.all(np.diff(res.trace) >= 0)
            assert all(after >= before for before, after in calls)
            assert res.objective == pytest.approx(cut_value(g, res.assignment.x), abs=1e-9)

    def test_deterministic(self, rng):
        g = random_graph(rng, 80, 0.1)
        x0 = CutAssignment.from_x(g, np.zeros(80))
        cfg = RunConfig(K=10, subproblem_iters=100)
        a = refine_level(g, x0, cfg, instance_seed=4)
        b = refine_level(g, x0, cfg, instance_seed=4)
        assert np.array_equal(a.assignment.x, b.assignment.x) and a.trace == b.trace

    def test_solver_failure_counts_as_stale(self, triangle):
        def broken(req):
            raise RuntimeError("boom")
        cfg = RunConfig(K=2, no_improve_limit=3)
        x0 = CutAssignment.from_x(triangle, np.zeros(3))
        res = refine_level(triangle, x0, cfg, instance_seed=0, solver=broken)
        assert res.failures == 3 and res.iterations == 3 and res.objective == 0


class TestMultistart:
    def test_single_instance_matches_refine_level(self, rng):
        g = random_graph(rng, 70, 0.1)
        x0 = CutAssignment.from_x(g, np.zeros(70))
        cfg = RunConfig(K=10, multistarts=1, seed=11, subproblem_iters=100)
        best, _ = multistart_refine(g, x0, cfg, level=2)
        ref = refine_level(g, x0, cfg, instance_seed=child_seed(11, 2, 0))
        assert np.array_equal(best.assignment.x, ref.assignment.x)

    def test_best_of(self, rng):
        g = random_graph(rng, 70, 0.1, "float")
        x0 = CutAssignment.from_x(g, np.zeros(70))
        cfg = RunConfig(K=8, multistarts=5, subproblem_iters=50)
        best, runs = multistart_refine(g, x0, cfg)
        objs = [r.objective for r in runs]
        assert best.objective == max(objs)
        assert best is runs[objs.index(max(objs))]

    def test_all_failing_raises(self, triangle, monkeypatch):
        import mlmaxcut.pipeline as pl

        def boom(args):
            raise MemoryError("no")
        monkeypatch.setattr(pl, "_refine_task", boom)
        with pytest.raises(RuntimeError, match="all 2 refinement instances failed"):
            multistart_refine(triangle, CutAssignment.from_x(triangle, [0, 0, 0]),
                              RunConfig(multistarts=2))


class TestSolve:
    def test_small_graph_exact(self, rng):
        for _ in range(5):
            n = int(rng.integers(5, 15))
            g = random_graph(rng, n, 0.5, "int")
            rep = solve(g, RunConfig(K=16, solver="exact", multistarts=2), threads=1)
            assert rep.best_objective == brute_force_maxcut(g)[0]
            assert not rep.coarsened and rep.coarse_ratio == 1.0

    def test_edgeless(self):
        rep = solve(Graph.from_edges(5, [], []), RunConfig(K=2, **FAST), threads=1)
        assert rep.best_objective == 0 and rep.coarse_ratio is None

    def test_multilevel_report(self, rng):
        g = random_graph(rng, 200, 0.05)
        rep = solve(g, RunConfig(K=20, seed=3, **FAST), threads=1)
        assert rep.coarsened
        assert 0 < rep.coarse_ratio <= 1
        assert rep.best_objective == cut_value(g, rep.best_assignment)
        levels = [r["level"] for r in rep.per_level]
        assert levels == list(range(len(levels) - 1, -1, -1))
        for row in rep.per_level:
            assert row["refined_objective"] >= row["coarse_objective"]
        d = json.loads(rep.to_json())
        assert d["objective"] == rep.best_objective
        assert RunConfig.from_dict(d["config"]) == rep.config

    def test_deterministic(self, rng):
        g = random_graph(rng, 150, 0.05)
        cfg = RunConfig(K=16, seed=5, **FAST)
        a, b = solve(g, cfg, threads=1), solve(g, cfg, threads=1)
        da, db = a.to_dict(), b.to_dict()
        da.pop("wall_time"), db.pop("wall_time")
        assert da == db

    def test_parallel_matches_serial(self, rng):
        g = random_graph(rng, 120, 0.05)
        cfg = RunConfig(K=16, seed=2, **FAST)
        assert np.array_equal(solve(g, cfg, threads=1).best_assignment,
                              solve(g, cfg, threads=2).best_assignment)

    def test_partition_file(self, tmp_path, triangle):
        rep = solve(triangle, RunConfig(K=4, solver="exact", multistarts=1), threads=1)
        path = tmp_path / "part.txt"
        rep.write_partition(path, ["a", "b", "c"])
        lines = path.read_text().split("\n")[:-1]
        assert [l.split()[0] for l in lines] == ["a", "b", "c"]
        assert [int(l.split()[1]) for l in lines] == rep.best_assignment.tolist()

    @pytest.mark.parametrize("bad", [dict(K=1), dict(multistarts=0), dict(no_improve_limit=0),
                                     dict(solver="cplex"), dict(solver="qaoa", K=20)])
    def test_invalid_config(self, triangle, bad):
        with pytest.raises(ValueError):
            solve(triangle, RunConfig(**bad))
