"""Compiled loop versus pure-Python loop: time per fitness evaluation.

Usage: python benchmarks/bench_kernel.py [--budget N] [--seeds K]

Both engines run the same trials (same seeds, same budget) and must agree on
every result, so the timings compare identical work.
"""

import argparse
import time

from sdrls.algorithms import KERNEL_AVAILABLE, config_from_token, run_trial
from sdrls.graphs import tg_graph
from sdrls.problems import Jump, MSTProblem, NeedGlobalMut, OneMax

CASES = [
    ("onemax n=2000", lambda: OneMax(2000), "sd-rls"),
    ("jump n=60 m=4", lambda: Jump(60, 4), "sd-rls-star"),
    ("jump n=60 m=4", lambda: Jump(60, 4), "ea"),
    ("jump n=60 m=4", lambda: Jump(60, 4), "fea1.5"),
    ("needglobalmut n=36", lambda: NeedGlobalMut(36), "sd-ea"),
    ("mst tg n=24", lambda: MSTProblem(tg_graph(24)), "sd-rls-star"),
    ("mst tg n=24", lambda: MSTProblem(tg_graph(24)), "rls12"),
]


def timed(config, problem, budget, seeds, engine):
    start = time.perf_counter()
    results = [run_trial(config, problem, budget, seed, engine=engine) for seed in seeds]
    elapsed = time.perf_counter() - start
    evals = sum(r.evaluations for r in results)
    return results, elapsed, evals


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=200_000)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args(argv)
    if not KERNEL_AVAILABLE:
        raise SystemExit("compiled kernel is not built; run `pip install -e . --no-build-isolation`")

    seeds = list(range(1, args.seeds + 1))
    print(f"{'case':<22}{'algorithm':<14}{'python ns/eval':>16}{'kernel ns/eval':>16}{'speedup':>10}")
    for label, build, token in CASES:
        problem, config = build(), config_from_token(token)
        py, py_t, py_n = timed(config, problem, args.budget, seeds, "python")
        kn, kn_t, kn_n = timed(config, problem, args.budget, seeds, "kernel")
        assert [(r.evaluations, r.best_fitness) for r in py] == [(r.evaluations, r.best_fitness) for r in kn]
        py_ns, kn_ns = 1e9 * py_t / py_n, 1e9 * kn_t / kn_n
        print(f"{label:<22}{token:<14}{py_ns:>16.0f}{kn_ns:>16.1f}{py_ns / kn_ns:>9.0f}x")


if __name__ == "__main__":
    main()
