"""Command-line entry point.

    mlmaxcut solve GRAPH [options]       run the multilevel solver on one graph
    mlmaxcut bench DIR --out FILE.csv    run it on every graph file in DIR
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .graph import load_graph
from .pipeline import RunConfig, solve
from .solvers import SOLVERS

# flag, RunConfig field, type
CONFIG_FLAGS = [
    ("--k", "K", int),
    ("--multistarts", "multistarts", int),
    ("--dim", "d", int),
    ("--sparsify", "sparsify_fraction", float),
    ("--solver", "solver", str),
    ("--seed", "seed", int),
    ("--coarsest-budget", "coarsest_budget", float),
    ("--sub-budget", "subproblem_budget", float),
    ("--no-improve-limit", "no_improve_limit", int),
    ("--embed-iters", "embed_iters", int),
    ("--coarsest-iters", "coarsest_iters", int),
    ("--sub-iters", "subproblem_iters", int),
    ("--qaoa-p", "qaoa_p", int),
    ("--qaoa-shots", "qaoa_shots", int),
    ("--qaoa-max-qubits", "qaoa_max_qubits", int),
]
QAOA_DEFAULT_K = 12
GRAPH_SUFFIXES = {".mtx", ".edges", ".txt", ".el", ".edgelist"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    defaults = RunConfig()
    for flag, name, typ in CONFIG_FLAGS:
        kw = {"type": typ, "default": None, "dest": name,
              "help": f"default {getattr(defaults, name)}"}
        if name == "solver":
            kw["choices"] = sorted(SOLVERS)
        if name == "K":
            kw["help"] = f"subproblem size (default {defaults.K}, or {QAOA_DEFAULT_K} with --solver qaoa)"
        p.add_argument(flag, **kw)
    p.add_argument("--format", choices=["edgelist", "mtx"], default=None,
                   help="input format (default: from extension)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlmaxcut", description="Multilevel weighted Max-Cut solver")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one graph")
    ps.add_argument("graph")
    _add_config_flags(ps)
    ps.add_argument("--out", help="write the JSON report here (default: stdout)")
    ps.add_argument("--partition-out", help="write 'node part' lines here")
    ps.add_argument("--dump-embedding", metavar="CSV",
                    help="write the finest-level embedding as CSV")

    pb = sub.add_parser("bench", help="solve every graph in a directory")
    pb.add_argument("directory")
    _add_config_flags(pb)
    pb.add_argument("--out", help="CSV output (default: stdout)")
    return parser


def config_from_args(args) -> RunConfig:
    given = {name: getattr(args, name) for _, name, _ in CONFIG_FLAGS
             if getattr(args, name) is not None}
    if given.get("solver") == "qaoa" and "K" not in given:
        given["K"] = QAOA_DEFAULT_K
    return RunConfig(**given).validate()


def config_to_argv(cfg: RunConfig) -> list[str]:
    """Flags that reproduce ``cfg`` exactly."""
    argv = []
    for flag, name, _ in CONFIG_FLAGS:
        argv += [flag, str(getattr(cfg, name))]
    return argv


def _summary(report) -> str:
    ratio = "n/a" if report.coarse_ratio is None else f"{report.coarse_ratio:.4f}"
    return (f"objective={report.best_objective:g} coarse_ratio={ratio} "
            f"wall_time={report.wall_time:.2f}s")


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except Exception as exc:
        raise _StageError(f"{name} failed: {exc}") from exc


class _StageError(RuntimeError):
    pass


def _run_solve(args, cfg) -> None:
    g = _stage("load", load_graph, args.graph, args.format)
    report = _stage("solve", solve, g, cfg, keep_embeddings=bool(args.dump_embedding))
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(_summary(report))
    else:
        print(text)
        print(_summary(report), file=sys.stderr)
    if args.partition_out:
        report.write_partition(args.partition_out, g.labels)
    if args.dump_embedding:
        h = report.hierarchy
        if h.embeddings:
            h.embeddings[0].to_csv(args.dump_embedding, g.labels)
        else:
            logging.warning("graph was not coarsened; no embedding to dump")


def _run_bench(args, cfg) -> None:
    files = sorted(p for p in Path(args.directory).iterdir()
                   if p.is_file() and p.suffix in GRAPH_SUFFIXES)
    if not files:
        raise _StageError(f"load failed: no graph files in {args.directory}")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["name", "nodes", "edges", "objective", "coarse_ratio", "time"])
        for path in files:
            g = _stage(f"load {path.name}", load_graph, path, args.format)
            r = _stage(f"solve {path.name}", solve, g, cfg)
            w.writerow([path.stem, g.n, g.m, r.best_objective,
                        "" if r.coarse_ratio is None else f"{r.coarse_ratio:.6f}",
                        f"{r.wall_time:.3f}"])
            logging.info("%s: %s", path.name, _summary(r))
    finally:
        if out is not sys.stdout:
            out.close()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"mlmaxcut: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "solve":
            _run_solve(args, cfg)
        else:
            _run_bench(args, cfg)
    except _StageError as exc:
        print(f"mlmaxcut: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


# keep the flag table honest
assert {name for _, name, _ in CONFIG_FLAGS} == {f.name for f in fields(RunConfig)}
