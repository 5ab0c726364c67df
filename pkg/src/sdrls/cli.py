"""Command-line entry point: ``sdrls run|sweep|compare|graph|plotdata|summary``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harness, stats
from .algorithms import config_from_token
from .core import RandomSource
from .graphs import GraphError, erdos_renyi, tg_graph, write_edge_list
from .harness import ConfigError, ExperimentConfig, ProblemSpec


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on errors; route that through ``main`` instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _int(text: str) -> int:
    try:
        value = float(text) if any(c in text for c in ".eE") else int(text)
        if value != int(value):
            raise ValueError
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdrls", description="Stagnation-detection local search experiments.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    run = sub.add_parser("run", help="run an experiment config file and write its CSV")
    run.add_argument("config")
    run.add_argument("--out", help="override the configured output path")
    run.add_argument("--workers", type=_int)
    run.add_argument("--no-timing", action="store_true", help="leave wall_time_ms empty")

    sw = sub.add_parser("sweep", help="one problem over a range of n, several algorithms")
    sw.add_argument("--problem", required=True, choices=harness.PROBLEM_NAMES)
    sw.add_argument("--n", required=True, help="list '80,100' or inclusive range '80:160:20'")
    sw.add_argument("--m", type=_int)
    sw.add_argument("--algos", required=True, help="comma-separated algorithm names")
    sw.add_argument("--reps", type=_int, default=100)
    sw.add_argument("--budget", type=_int)
    sw.add_argument("--seed", type=_int, default=0)
    sw.add_argument("--out", required=True)
    sw.add_argument("--workers", type=_int, default=1)
    sw.add_argument("--graph", choices=("tg", "er"), default="tg")
    sw.add_argument("--graph-seed", type=_int, default=0)
    sw.add_argument("--init", choices=("random", "tree"), default="random")
    sw.add_argument("--id", default="sweep")
    sw.add_argument("--trace", action="store_true")
    sw.add_argument("--no-timing", action="store_true")

    cmp_ = sub.add_parser("compare", help="Mann-Whitney U test between two cells of a CSV")
    cmp_.add_argument("--a", required=True, help="ALGO, ALGO@N or ALGO@PROBLEM@N")
    cmp_.add_argument("--b", required=True)
    cmp_.add_argument("--csv", required=True)
    cmp_.add_argument("--exact", action="store_true", help="exact permutation p-value (small samples)")

    gr = sub.add_parser("graph", help="write a generated graph as an edge list")
    gr.add_argument("--kind", required=True, choices=("tg", "er"))
    gr.add_argument("--n", required=True, type=_int)
    gr.add_argument("--seed", type=_int, default=0)
    gr.add_argument("--a", type=_int, help="TG weight scale (default n^2)")
    gr.add_argument("--out", help="output path (default stdout)")

    pd = sub.add_parser("plotdata", help="per-n per-algorithm mean evaluations table")
    pd.add_argument("--csv", required=True)
    pd.add_argument("--out", help="output path (default stdout)")
    pd.add_argument("--successes-only", action="store_true")

    sm = sub.add_parser("summary", help="per-cell summary statistics of a CSV")
    sm.add_argument("--csv", required=True)
    sm.add_argument("--out")
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _progress(ci, cell):
    spec, algo = cell
    print(f"done: {algo.name} on {spec.label} n={spec.n}", file=sys.stderr)


def cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    if args.out:
        cfg.output = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    if args.no_timing:
        cfg.timing = False
    cfg.validate()
    harness.run_to_file(cfg, progress=_progress)
    print(f"wrote {cfg.output}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    ns = harness.parse_int_list(args.n, "--n")
    if not ns:
        raise ConfigError(f"--n: empty range {args.n!r}")
    algos = []
    for token in args.algos.split(","):
        if token.strip():
            try:
                algos.append(config_from_token(token))
            except ValueError as exc:
                raise ConfigError(f"--algos: {exc}") from None
    specs = [ProblemSpec(args.problem, n, args.m, args.graph, args.graph_seed, None, args.init) for n in ns]
    budget = args.budget or harness.DEFAULT_BUDGET.get(args.problem, harness.FALLBACK_BUDGET)
    cfg = ExperimentConfig(args.id, specs, algos, args.reps, budget, args.seed,
                           trace=args.trace, output=args.out, workers=args.workers,
                           timing=not args.no_timing)
    cfg.validate()
    harness.run_to_file(cfg, progress=_progress)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    records = harness.read_records(args.csv)
    a = harness.select_cell(records, args.a)
    b = harness.select_cell(records, args.b)
    for flag, cell, rows in (("--a", args.a, a), ("--b", args.b, b)):
        if not rows:
            raise ConfigError(f"{flag}: no rows match {cell!r}")
    xa = [r.evaluations for r in a]
    xb = [r.evaluations for r in b]
    res = stats.mann_whitney_exact(xa, xb) if args.exact else stats.mann_whitney_u(xa, xb)
    print(f"a={args.a} count={len(xa)} mean={stats.mean(xa):.6g} median={stats.median(xa):.6g}")
    print(f"b={args.b} count={len(xb)} mean={stats.mean(xb):.6g} median={stats.median(xb):.6g}")
    print(f"U={res.U:g} p={res.p:.6g}")
    return 0


def cmd_graph(args) -> int:
    if args.kind == "tg":
        g = tg_graph(args.n, args.a)
    else:
        g = erdos_renyi(args.n, RandomSource(args.seed))
    buf = io.StringIO()
    write_edge_list(g, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_plotdata(args) -> int:
    header, rows = harness.plot_table(harness.read_records(args.csv), censored=not args.successes_only)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_summary(args) -> int:
    _emit(harness.summaries_to_csv(harness.summarize(harness.read_records(args.csv))), args.out)
    return 0


COMMANDS = {
    "run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare,
    "graph": cmd_graph, "plotdata": cmd_plotdata, "summary": cmd_summary,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ConfigError, GraphError, ValueError, OSError) as exc:
        print(f"sdrls: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
