import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from mlmaxcut.cli import build_parser, config_from_args, config_to_argv, run
from mlmaxcut.pipeline import RunConfig

from conftest import random_graph

FAST = ["--multistarts", "2", "--embed-iters", "3", "--sub-iters", "100", "--coarsest-iters", "500"]


def write_edges(path, g, one_based=True):
    off = int(one_based)
    with open(path, "w") as fh:
        fh.write("# test graph\n")
        for u, v, w in zip(g.u, g.v, g.w):
            fh.write(f"{u + off} {v + off} {int(w)}\n")
    return path


@pytest.fixture
def graph_file(tmp_path, rng):
    return write_edges(tmp_path / "g.edges", random_graph(rng, 60, 0.1, "int"))


def run_json(argv, capsys):
    assert run(argv) == 0
    out = capsys.readouterr()
    return json.loads(out.out), out.err


def test_solve_reruns_identical(graph_file, capsys):
    argv = ["solve", str(graph_file), "--k", "10", "--solver", "tabu", "--seed", "7"] + FAST
    a, err = run_json(argv, capsys)
    b, _ = run_json(argv, capsys)
    assert err.startswith("objective=") and "coarse_ratio=" in err and "wall_time=" in err
    a.pop("wall_time"), b.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["config"]["seed"] == a["seed"] == 7
    assert len(a["assignment"]) == 60


def test_qaoa_run(tmp_path, rng, capsys):
    path = write_edges(tmp_path / "small.edges", random_graph(rng, 14, 0.4, "int"))
    rep, _ = run_json(["solve", str(path), "--solver", "qaoa", "--qaoa-p", "1",
                       "--qaoa-shots", "64", "--multistarts", "1"], capsys)
    assert rep["config"]["K"] == 12 and rep["config"]["solver"] == "qaoa"
    assert rep["objective"] > 0


def test_qaoa_over_cap_rejected(graph_file, capsys):
    assert run(["solve", str(graph_file), "--solver", "qaoa", "--k", "20"]) == 2
    assert "qubit cap" in capsys.readouterr().err


def test_bench_csv(tmp_path, rng):
    d = tmp_path / "graphs"
    d.mkdir()
    write_edges(d / "a.edges", random_graph(rng, 30, 0.2, "int"))
    write_edges(d / "b.txt", random_graph(rng, 25, 0.2, "int"))
    (d / "notes.md").write_text("ignored\n")
    out = tmp_path / "res.csv"
    assert run(["bench", str(d), "--out", str(out), "--k", "8"] + FAST) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["name"] for r in rows] == ["a", "b"]
    assert rows[0]["nodes"] == "30" and float(rows[0]["objective"]) > 0
    assert set(rows[0]) == {"name", "nodes", "edges", "objective", "coarse_ratio", "time"}


def test_outputs_written(graph_file, tmp_path, capsys):
    out, part, emb = tmp_path / "r.json", tmp_path / "p.txt", tmp_path / "e.csv"
    assert run(["solve", str(graph_file), "--k", "10", "--out", str(out),
                "--partition-out", str(part), "--dump-embedding", str(emb)] + FAST) == 0
    assert capsys.readouterr().out.startswith("objective=")
    rep = json.loads(out.read_text())
    lines = part.read_text().splitlines()
    # one-based input ids come back unchanged
    assert [int(l.split()[0]) for l in lines] == list(range(1, 61))
    assert [int(l.split()[1]) for l in lines] == rep["assignment"]
    header, *rows = emb.read_text().splitlines()
    assert header == "node_id,p_1,p_2,p_3" and len(rows) == 60
    assert np.allclose([np.linalg.norm([float(c) for c in r.split(",")[1:]]) for r in rows], 1.0)


@pytest.mark.parametrize("argv", [["solve"], ["solve", "g.edges", "--bogus"],
                                  ["solve", "g.edges", "--solver", "cplex"],
                                  ["solve", "g.edges", "--k", "1"], ["frobnicate"]])
def test_bad_flags_exit_2(argv, capsys):
    assert run(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_load_error_names_stage(tmp_path, capsys):
    bad = tmp_path / "bad.edges"
    bad.write_text("1 2\n3 4 heavy\n")
    assert run(["solve", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "load failed" in err and "bad.edges:2:" in err


def test_missing_file(tmp_path, capsys):
    assert run(["solve", str(tmp_path / "nope.edges")]) == 1
    assert "load failed" in capsys.readouterr().err


def test_flag_round_trip():
    cfg = RunConfig(K=17, multistarts=5, d=2, sparsify_fraction=0.25, solver="exact", seed=99,
                    coarsest_budget=1.5, subproblem_budget=0.05, no_improve_limit=4)
    args = build_parser().parse_args(["solve", "g"] + config_to_argv(cfg))
    assert config_from_args(args) == cfg


def test_defaults_echoed(graph_file, capsys):
    rep, _ = run_json(["solve", str(graph_file)] + FAST, capsys)
    echoed = RunConfig.from_dict(rep["config"])
    assert set(rep["config"]) == set(RunConfig().__dataclass_fields__)
    assert echoed.K == 100 and echoed.solver == "tabu"


def test_module_entry_point(graph_file):
    proc = subprocess.run([sys.executable, "-m", "mlmaxcut", "solve", str(graph_file),
                           "--k", "10"] + FAST, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["objective"] > 0
