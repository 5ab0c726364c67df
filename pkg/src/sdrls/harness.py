"""Experiment runner: configs, seeded trial batches, CSV records, summaries."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

from .algorithms import SD_VARIANTS, AlgorithmConfig, Params, Variant, config_from_token, run_trial
from .core import RandomSource, derive
from .graphs import erdos_renyi, random_spanning_tree, tg_graph
from .problems import Jump, MSTProblem, NeedGlobalMut, OneMax, Problem
from . import stats

PROBLEM_NAMES = ("onemax", "jump", "needglobalmut", "mst")
DEFAULT_BUDGET = {"mst": 10 ** 8}
FALLBACK_BUDGET = 10 ** 9


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    n: int
    m: Optional[int] = None
    graph: str = "tg"
    graph_seed: int = 0
    a: Optional[int] = None
    init: str = "random"

    @property
    def label(self) -> str:
        return f"mst-{self.graph}" if self.name == "mst" else self.name

    def build(self) -> Problem:
        return _build_problem(self)

    def initializer(self, problem: Problem):
        if self.name == "mst" and self.init == "tree":
            graph = problem.graph
            return lambda rng: random_spanning_tree(graph, rng)
        return None

    def validate(self) -> None:
        if self.name not in PROBLEM_NAMES:
            raise ConfigError(f"problem: unknown problem {self.name!r}")
        if self.n < 1:
            raise ConfigError(f"n: must be positive, got {self.n}")
        if self.name == "jump" and (self.m is None or not 1 <= self.m <= self.n):
            raise ConfigError(f"m: jump size must lie in [1, n], got {self.m}")
        if self.name == "mst":
            if self.graph not in ("tg", "er"):
                raise ConfigError(f"graph: expected 'tg' or 'er', got {self.graph!r}")
            if self.graph == "tg" and (self.n < 8 or self.n % 4):
                raise ConfigError(f"n: TG graphs need n divisible by 4 and >= 8, got {self.n}")
            if self.graph == "er" and self.n < 3:
                raise ConfigError(f"n: Erdos-Renyi graphs need n >= 3, got {self.n}")
            if self.init not in ("random", "tree"):
                raise ConfigError(f"init: expected 'random' or 'tree', got {self.init!r}")
        try:
            self.build()
        except ValueError as exc:
            raise ConfigError(f"n: {exc}") from exc


@lru_cache(maxsize=64)
def _build_problem(spec: ProblemSpec) -> Problem:
    if spec.name == "onemax":
        return OneMax(spec.n)
    if spec.name == "jump":
        return Jump(spec.n, spec.m)
    if spec.name == "needglobalmut":
        return NeedGlobalMut(spec.n)
    if spec.graph == "tg":
        graph = tg_graph(spec.n, spec.a)
    else:
        graph = erdos_renyi(spec.n, RandomSource(spec.graph_seed))
    return MSTProblem(graph)


@dataclass
class ExperimentConfig:
    experiment_id: str
    problems: list[ProblemSpec]
    algorithms: list[AlgorithmConfig]
    repetitions: int
    budget: int
    base_seed: int = 0
    trace: bool = False
    output: Optional[str] = None
    workers: int = 1
    timing: bool = True

    def cells(self) -> list[tuple[ProblemSpec, AlgorithmConfig]]:
        """Problem-major ordering; the position is the cell index."""
        return [(p, a) for p in self.problems for a in self.algorithms]

    def trial_seed(self, cell_index: int, trial_index: int) -> int:
        return derive(self.base_seed, cell_index * self.repetitions + trial_index)

    def validate(self) -> None:
        if not self.experiment_id or not self.experiment_id.isprintable():
            raise ConfigError(f"id: experiment id must be non-empty printable text, got {self.experiment_id!r}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions: must be >= 1, got {self.repetitions}")
        if self.budget < 1:
            raise ConfigError(f"budget: must be >= 1, got {self.budget}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if not self.problems:
            raise ConfigError("problem: no problem instance configured")
        if not self.algorithms:
            raise ConfigError("algorithms: no algorithm configured")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigError(f"algorithms: duplicate algorithm names {names}")
        for spec in self.problems:
            spec.validate()
            problem = spec.build()
            for algo in self.algorithms:
                try:
                    Params.resolve(algo, problem)
                except ValueError as exc:
                    raise ConfigError(f"algorithm {algo.name}: {exc}") from exc


# -- trial records and CSV ---------------------------------------------------

@dataclass
class TrialRecord:
    experiment_id: str
    algorithm: str
    problem: str
    n: int
    m: Optional[int]
    R: Optional[float]
    beta: Optional[float]
    rate: Optional[float]
    seed: int
    trial_index: int
    evaluations: int
    success: bool
    censored: bool
    strict_improvements: int
    max_strength_seen: int
    wall_time_ms: Optional[float]


CSV_COLUMNS = [f.name for f in fields(TrialRecord)]
_INT_COLUMNS = {"n", "m", "seed", "trial_index", "evaluations", "strict_improvements", "max_strength_seen"}
_FLOAT_COLUMNS = {"R", "beta", "rate", "wall_time_ms"}
_BOOL_COLUMNS = {"success", "censored"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(column: str, text: str):
    if column in _BOOL_COLUMNS:
        if text not in ("true", "false"):
            raise ValueError(f"column {column}: expected true/false, got {text!r}")
        return text == "true"
    if text == "" and column not in ("experiment_id", "algorithm", "problem"):
        return None
    if column in _INT_COLUMNS:
        return int(text)
    if column in _FLOAT_COLUMNS:
        return float(text)
    return text


def write_header(out: TextIO) -> None:
    out.write(",".join(CSV_COLUMNS) + "\n")


def write_records(records: Iterable[TrialRecord], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    for rec in records:
        writer.writerow([_fmt(getattr(rec, c)) for c in CSV_COLUMNS])


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    write_header(buf)
    write_records(records, buf)
    return buf.getvalue()


def read_records(source: TextIO | str | Path) -> list[TrialRecord]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_records(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    return [TrialRecord(**{c: _parse(c, v) for c, v in zip(CSV_COLUMNS, row)}) for row in reader]


# -- running -----------------------------------------------------------------

def _record_fields(spec: ProblemSpec, problem: Problem, algo: AlgorithmConfig) -> dict:
    params = Params.resolve(algo, problem)
    v = algo.variant
    if spec.name == "mst":
        n, m = spec.n, problem.n
    else:
        n, m = spec.n, getattr(problem, "m", None)
    return dict(
        algorithm=algo.name,
        problem=spec.label,
        n=n,
        m=m,
        R=float(params.R) if v in SD_VARIANTS else None,
        beta=float(algo.beta) if v is Variant.FEA_BETA else None,
        rate=params.rate if v is Variant.EA_ONE_ONE else None,
    )


def _run_chunk(config: ExperimentConfig, cell_index: int, trials: Sequence[int]):
    spec, algo = config.cells()[cell_index]
    problem = spec.build()
    init = spec.initializer(problem)
    common = _record_fields(spec, problem, algo)
    rows, traces = [], []
    for t in trials:
        seed = config.trial_seed(cell_index, t)
        start = time.perf_counter()
        res = run_trial(algo, problem, config.budget, seed, init=init, trace=config.trace)
        elapsed = (time.perf_counter() - start) * 1000.0
        rows.append(TrialRecord(
            experiment_id=config.experiment_id, seed=seed, trial_index=t,
            evaluations=res.evaluations, success=res.success, censored=res.censored,
            strict_improvements=res.strict_improvements, max_strength_seen=res.max_strength_seen,
            wall_time_ms=elapsed if config.timing else None, **common,
        ))
        if config.trace:
            traces.append({
                "cell": cell_index, "algorithm": algo.name, "trial_index": t,
                "events": [[e.evaluation, e.event.name, e.strength, e.radius, e.counter, list(e.flips)]
                           for e in res.trace],
            })
    return cell_index, list(trials), rows, traces


def _chunks(reps: int, workers: int) -> list[range]:
    size = max(1, math.ceil(reps / (4 * workers))) if workers > 1 else reps
    return [range(i, min(reps, i + size)) for i in range(0, reps, size)]


def run_experiment(config: ExperimentConfig, sink: TextIO | None = None,
                   workers: Optional[int] = None, progress=None) -> list[TrialRecord]:
    """Run every cell x repetition; rows come back ordered by (cell, trial_index).

    With ``sink`` set, the header is written first and each cell's rows are
    appended once that cell and all earlier cells are complete.
    """
    config.validate()
    workers = config.workers if workers is None else workers
    cells = config.cells()
    pending = {ci: {} for ci in range(len(cells))}
    done_rows: dict[int, list[TrialRecord]] = {}
    all_traces: list[dict] = []
    next_cell = 0
    out: list[TrialRecord] = []
    if sink is not None:
        write_header(sink)

    def absorb(ci, trials, rows, traces):
        nonlocal next_cell
        for t, row in zip(trials, rows):
            pending[ci][t] = row
        all_traces.extend(traces)
        if len(pending[ci]) == config.repetitions:
            done_rows[ci] = [pending[ci][t] for t in range(config.repetitions)]
            if progress:
                progress(ci, cells[ci])
        while next_cell in done_rows:
            rows_c = done_rows.pop(next_cell)
            out.extend(rows_c)
            if sink is not None:
                write_records(rows_c, sink)
                sink.flush()
            next_cell += 1

    tasks = [(ci, chunk) for ci in range(len(cells)) for chunk in _chunks(config.repetitions, workers)]
    if workers == 1:
        for ci, chunk in tasks:
            absorb(*_run_chunk(config, ci, chunk))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, ci, list(chunk)) for ci, chunk in tasks]
            for fut in as_completed(futures):
                absorb(*fut.result())
    if config.trace and config.output:
        all_traces.sort(key=lambda d: (d["cell"], d["trial_index"]))
        with open(str(config.output) + ".trace.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for item in all_traces:
                fh.write(json.dumps(item) + "\n")
    return out


def run_to_file(config: ExperimentConfig, path: Optional[str] = None, **kw) -> list[TrialRecord]:
    path = path or config.output
    if not path:
        raise ConfigError("output: no output path configured")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        return run_experiment(replace(config, output=path), sink=fh, **kw)


# -- summaries ---------------------------------------------------------------

@dataclass
class CellSummary:
    algorithm: str
    problem: str
    n: int
    m: Optional[int]
    count: int
    successes: int
    censored: int
    mean_success: Optional[float]
    median_success: Optional[float]
    std_success: Optional[float]
    mean_all: float
    median_all: float
    std_all: float


def summarize(records: Sequence[TrialRecord]) -> list[CellSummary]:
    """One row per (algorithm, problem instance), in first-appearance order.

    ``*_success`` statistics cover successful runs only (``None`` when there
    are none); ``*_all`` count censored runs at their final evaluation count,
    which is the budget.
    """
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.algorithm, r.problem, r.n, r.m), []).append(r)
    out = []
    for (algo, prob, n, m), rows in groups.items():
        ok = [r.evaluations for r in rows if r.success]
        every = [r.evaluations for r in rows]
        out.append(CellSummary(
            algorithm=algo, problem=prob, n=n, m=m, count=len(rows), successes=len(ok),
            censored=sum(r.censored for r in rows),
            mean_success=stats.mean(ok) if ok else None,
            median_success=stats.median(ok) if ok else None,
            std_success=stats.pstdev(ok) if ok else None,
            mean_all=stats.mean(every), median_all=stats.median(every), std_all=stats.pstdev(every),
        ))
    return out


def summaries_to_csv(rows: Sequence[CellSummary]) -> str:
    buf = io.StringIO()
    cols = [f.name for f in fields(CellSummary)]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(getattr(row, c)) for c in cols])
    return buf.getvalue()


def plot_table(records: Sequence[TrialRecord], censored: bool = True) -> tuple[list[str], list[list]]:
    """Per-``n`` rows with one mean-evaluations column per algorithm."""
    algos: list[str] = []
    cells: dict[int, dict[str, list[int]]] = {}
    for r in records:
        if r.algorithm not in algos:
            algos.append(r.algorithm)
        if censored or r.success:
            cells.setdefault(r.n, {}).setdefault(r.algorithm, []).append(r.evaluations)
    header = ["n"] + algos
    rows = []
    for n in sorted(cells):
        rows.append([n] + [stats.mean(cells[n][a]) if a in cells[n] else None for a in algos])
    return header, rows


def select_cell(records: Sequence[TrialRecord], cell: str) -> list[TrialRecord]:
    """Rows matching ``algorithm``, ``algorithm@n`` or ``algorithm@problem@n``."""
    parts = cell.split("@")
    algo = parts[0]
    problem = n = None
    if len(parts) == 2:
        n = int(parts[1])
    elif len(parts) == 3:
        problem, n = parts[1], int(parts[2])
    elif len(parts) > 3:
        raise ValueError(f"cannot parse cell {cell!r}")
    return [r for r in records
            if r.algorithm == algo and (n is None or r.n == n) and (problem is None or r.problem == problem)]


# -- config files ------------------------------------------------------------

_ALGO_KEYS = {"variant", "s", "rate", "rate_factor", "gap_rate", "beta", "r", "threshold_multiplier"}
_EXPERIMENT_KEYS = {"id", "problem", "n", "m", "graph", "graph_seed", "a", "init", "repetitions",
                    "budget", "base_seed", "trace", "output", "workers", "timing", "algorithms"}


def _num(section: str, key: str, text: str, kind=int):
    try:
        if kind is int:
            value = float(text) if any(c in text for c in ".eE") else int(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} in [{section}]") from None


def _bool(section: str, key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean in [{section}], got {text!r}")


def parse_int_list(text: str, key: str = "n") -> list[int]:
    """``"80, 100"`` or ``"80:160:20"`` (inclusive stop)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"{key}: cannot parse range {text!r}")
        lo, hi = _num("", key, parts[0]), _num("", key, parts[1])
        step = _num("", key, parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise ConfigError(f"{key}: range step must be positive in {text!r}")
        return list(range(lo, hi + 1, step))
    return [_num("", key, t.strip()) for t in text.split(",") if t.strip()]


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base_dir=Path(path).parent)


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse the INI experiment format described in the README."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc}") from exc
    if not cp.has_section("experiment"):
        raise ConfigError("experiment: missing [experiment] section")
    ex = cp["experiment"]
    for key in ex:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"{key}: unknown key in [experiment]")
    if "problem" not in ex:
        raise ConfigError("problem: missing")
    if "n" not in ex:
        raise ConfigError("n: missing")
    name = ex["problem"].strip().lower()
    m = _num("experiment", "m", ex["m"]) if "m" in ex else None
    ns = parse_int_list(ex["n"])
    specs = [ProblemSpec(
        name=name, n=n, m=m,
        graph=ex.get("graph", "tg").strip().lower(),
        graph_seed=_num("experiment", "graph_seed", ex.get("graph_seed", "0")),
        a=_num("experiment", "a", ex["a"]) if "a" in ex else None,
        init=ex.get("init", "random").strip().lower(),
    ) for n in ns]

    algos: list[AlgorithmConfig] = []
    if "algorithms" in ex:
        for token in ex["algorithms"].split(","):
            if token.strip():
                try:
                    algos.append(config_from_token(token))
                except ValueError as exc:
                    raise ConfigError(f"algorithms: {exc}") from exc
    for section in cp.sections():
        if section == "experiment":
            continue
        if not section.startswith("algorithm"):
            raise ConfigError(f"{section}: unknown section")
        algos.append(_parse_algorithm(section, cp[section]))

    output = ex.get("output")
    if output and base_dir is not None and not os.path.isabs(output):
        output = str(base_dir / output)
    reps = _num("experiment", "repetitions", ex["repetitions"]) if "repetitions" in ex else None
    if reps is None:
        raise ConfigError("repetitions: missing")
    budget_default = DEFAULT_BUDGET.get(name, FALLBACK_BUDGET)
    return ExperimentConfig(
        experiment_id=ex.get("id", "experiment").strip(),
        problems=specs,
        algorithms=algos,
        repetitions=reps,
        budget=_num("experiment", "budget", ex["budget"]) if "budget" in ex else budget_default,
        base_seed=_num("experiment", "base_seed", ex.get("base_seed", "0")),
        trace=_bool("experiment", "trace", ex.get("trace", "false")),
        output=output,
        workers=_num("experiment", "workers", ex.get("workers", "1")),
        timing=_bool("experiment", "timing", ex.get("timing", "true")),
    )


def _parse_algorithm(section: str, body) -> AlgorithmConfig:
    label = section[len("algorithm"):].strip() or None
    for key in body:
        if key not in _ALGO_KEYS:
            raise ConfigError(f"{key}: unknown key in [{section}]")
    if "variant" not in body:
        raise ConfigError(f"variant: missing in [{section}]")
    try:
        variant = Variant(body["variant"].strip().upper())
    except ValueError:
        raise ConfigError(f"variant: unknown variant {body['variant']!r} in [{section}]") from None
    kw = {"variant": variant, "label": label}
    if "s" in body:
        kw["s"] = _num(section, "s", body["s"])
    for key, attr in (("rate", "rate"), ("rate_factor", "rate_factor"), ("beta", "beta"),
                      ("r", "R"), ("threshold_multiplier", "threshold_multiplier")):
        if key in body:
            kw[attr] = _num(section, key, body[key], float)
    if "gap_rate" in body:
        kw["gap_rate"] = _bool(section, "gap_rate", body["gap_rate"])
    try:
        return AlgorithmConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc
