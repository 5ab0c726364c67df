"""Elitist (1+1)-style heuristics as explicit state machines.

Every variant shares one trial loop: start from a point, mutate, keep the
offspring if it is not worse (some variants only accept equal fitness at the
lowest strength), and stop at the optimum or the evaluation budget.

The step functions here are the reference implementation and the pure-Python
engine. ``sdrls._kernel`` runs the same machines compiled; both consume the
random stream identically, so a seed gives the same :class:`RunResult` on
either engine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

from .core import (
    NEVER,
    RandomSource,
    choose_positions,
    power_law_cdf,
    random_bits,
    sample_alpha,
    sd_ea_threshold,
    sd_triggers,
    trigger_count,
)
from .problems import Problem

try:
    from . import _kernel
except ImportError:  # pragma: no cover - exercised when the extension is not built
    _kernel = None

KERNEL_AVAILABLE = _kernel is not None


class Variant(enum.Enum):
    RLS_STATIC = "RLS_STATIC"
    SD_RLS = "SD_RLS"
    SD_RLS_STAR = "SD_RLS_STAR"
    EA_ONE_ONE = "EA_ONE_ONE"
    FEA_BETA = "FEA_BETA"
    SD_EA = "SD_EA"
    RLS_12 = "RLS_12"


VARIANT_CODES = {v: i for i, v in enumerate(Variant)}
SD_VARIANTS = (Variant.SD_RLS, Variant.SD_RLS_STAR, Variant.SD_EA)


class Event(enum.IntEnum):
    IMPROVE = 0
    EQUAL_MOVE = 1
    STRENGTH_UP = 2
    STRENGTH_DOWN = 3
    RADIUS_UP = 4
    RADIUS_TO_N = 5
    RESET = 6


class TraceEvent(NamedTuple):
    """One trace entry.

    ``strength``, ``radius`` and ``counter`` are the values in effect when the
    event fired (before any reset). ``flips`` lists the flipped positions for
    IMPROVE and EQUAL_MOVE, so the visited points can be replayed.
    """

    evaluation: int
    event: Event
    strength: int
    radius: int
    counter: int
    flips: tuple = ()


@dataclass(frozen=True)
class AlgorithmConfig:
    variant: Variant
    s: int = 1
    rate: Optional[float] = None
    rate_factor: Optional[float] = None
    gap_rate: bool = False
    beta: float = 1.5
    R: Optional[float] = None
    threshold_multiplier: float = 1.0
    label: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))
        if self.R is not None and self.R <= 1:
            raise ValueError(f"R must exceed 1, got {self.R}")
        if self.variant is Variant.FEA_BETA and self.beta <= 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if self.variant is Variant.RLS_STATIC and self.s < 1:
            raise ValueError(f"static strength must be >= 1, got {self.s}")
        if self.rate is not None and not 0 < self.rate <= 1:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")
        if self.threshold_multiplier <= 0:
            raise ValueError("threshold_multiplier must be positive")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return {
            Variant.RLS_STATIC: f"rls-s{self.s}" if self.s != 1 else "rls",
            Variant.SD_RLS: "sd-rls",
            Variant.SD_RLS_STAR: "sd-rls-star",
            Variant.EA_ONE_ONE: "ea-m" if self.gap_rate else "ea",
            Variant.FEA_BETA: f"fea{self.beta:g}",
            Variant.SD_EA: "sd-ea",
            Variant.RLS_12: "rls12",
        }[self.variant]


def config_from_token(token: str) -> AlgorithmConfig:
    """Parse a short algorithm name: ``rls``, ``rls-s3``, ``sd-rls``, ``sd-rls-star``,
    ``ea``, ``ea-m``, ``fea1.5``, ``sd-ea``, ``rls12``."""
    t = token.strip().lower()
    fixed = {
        "rls": AlgorithmConfig(Variant.RLS_STATIC),
        "sd-rls": AlgorithmConfig(Variant.SD_RLS),
        "sd-rls-star": AlgorithmConfig(Variant.SD_RLS_STAR),
        "ea": AlgorithmConfig(Variant.EA_ONE_ONE),
        "ea-m": AlgorithmConfig(Variant.EA_ONE_ONE, gap_rate=True),
        "sd-ea": AlgorithmConfig(Variant.SD_EA),
        "rls12": AlgorithmConfig(Variant.RLS_12),
    }
    if t in fixed:
        return fixed[t]
    try:
        if t.startswith("rls-s"):
            return AlgorithmConfig(Variant.RLS_STATIC, s=int(t[5:]))
        if t.startswith("fea"):
            return AlgorithmConfig(Variant.FEA_BETA, beta=float(t[3:]))
    except ValueError:
        pass
    raise ValueError(f"unknown algorithm {token!r}")


@dataclass
class RunResult:
    """Outcome of one trial.

    ``max_strength_seen`` is the largest strength (SD-RLS, SD-RLS*), rate
    strength (SD-EA), power-law draw (FEA) or flip count (RLS, RLS^{1,2}) used;
    the (1+1) EA reports 1.
    """

    evaluations: int
    success: bool
    censored: bool
    best_fitness: float
    strict_improvements: int
    max_strength_seen: int
    trace: Optional[list] = None
    final_point: Optional[bytes] = None


@dataclass
class Params:
    """A config resolved against one problem: rates, thresholds, tables."""

    variant: Variant
    n: int
    s: int
    rate: float
    R: float
    triggers: list
    rmax: int
    alpha_cdf: list

    @classmethod
    def resolve(cls, config: AlgorithmConfig, problem: Problem) -> "Params":
        n = problem.n
        v = config.variant
        R = config.R if config.R is not None else problem.default_R(v)
        rate = 0.0
        triggers = [NEVER]
        rmax = 1
        cdf = [1.0]
        if v is Variant.RLS_STATIC and config.s > n:
            raise ValueError(f"static strength {config.s} exceeds n={n}")
        if v is Variant.RLS_12 and n < 2:
            raise ValueError("RLS^{1,2} needs n >= 2")
        if v is Variant.EA_ONE_ONE:
            if config.rate is not None:
                rate = config.rate
            elif config.gap_rate:
                if problem.gap_m is None:
                    raise ValueError(f"rate m/n needs a problem with a gap size, got {problem!r}")
                rate = problem.gap_m / n
            else:
                rate = (config.rate_factor or 1.0) / n
            if not 0 < rate <= 1:
                raise ValueError(f"rate {rate} outside (0, 1]")
        elif v in (Variant.SD_RLS, Variant.SD_RLS_STAR):
            triggers = sd_triggers(n, R)
        elif v is Variant.SD_EA:
            if n < 2:
                raise ValueError("SD-(1+1) EA needs n >= 2")
            rmax = n // 2
            triggers = [NEVER] + [
                trigger_count(sd_ea_threshold(n, r, R) * config.threshold_multiplier)
                for r in range(1, rmax + 1)
            ]
        elif v is Variant.FEA_BETA:
            cdf = power_law_cdf(n, config.beta)
        return cls(v, n, config.s, rate, R, triggers, rmax, cdf)


@dataclass
class AlgorithmState:
    x: bytearray
    fx: float
    budget: int
    s: int = 1
    r: int = 1
    u: int = 0
    evaluations: int = 1
    strict_improvements: int = 0
    max_strength_seen: int = 1
    perm: list = field(default_factory=list)
    residual: int = -1
    residual_key: int = -1
    trace: Optional[list] = None

    def __post_init__(self):
        if not self.perm:
            self.perm = list(range(len(self.x)))


# -- shared pieces -----------------------------------------------------------

def _bernoulli_flips(state: AlgorithmState, key: int, rate: float, rng: RandomSource) -> list:
    """Standard-bit-mutation flips, continuing one Bernoulli stream while the rate is fixed.

    Gaps between flipped positions are geometric and memoryless, so the unused
    part of a gap can carry into the next step at the same rate; on a rate
    change it is discarded and redrawn.
    """
    n = len(state.x)
    log_q = math.log1p(-rate)
    if state.residual_key != key:
        state.residual = rng.geometric(log_q)
        state.residual_key = key
    pos = state.residual
    flips = []
    while pos < n:
        flips.append(pos)
        pos += 1 + rng.geometric(log_q)
    state.residual = pos - n
    return flips


def _evaluate_offspring(state: AlgorithmState, flips: Sequence[int], problem: Problem):
    if not flips:
        return state.fx
    x = state.x
    for i in flips:
        x[i] ^= 1
    return problem.evaluate(x)


def _revert(state: AlgorithmState, flips: Sequence[int]) -> None:
    x = state.x
    for i in flips:
        x[i] ^= 1


def _record(state, event, flips=()):
    if state.trace is not None:
        state.trace.append(TraceEvent(state.evaluations, event, state.s, state.r, state.u, tuple(flips)))


def _elitist(state: AlgorithmState, flips, problem: Problem) -> bool:
    """Accept-if-not-worse selection. Returns True on a strict improvement."""
    fy = _evaluate_offspring(state, flips, problem)
    state.evaluations += 1
    if problem.better(fy, state.fx):
        state.fx = fy
        state.strict_improvements += 1
        _record(state, Event.IMPROVE, flips)
        return True
    if fy == state.fx:
        if flips:
            _record(state, Event.EQUAL_MOVE, flips)
        return False
    _revert(state, flips)
    return False


# -- the seven machines ------------------------------------------------------

def rls_static_step(state: AlgorithmState, params: Params, rng: RandomSource, problem: Problem) -> bool:
    flips = choose_positions(state.perm, params.s, rng)
    state.max_strength_seen = max(state.max_strength_seen, params.s)
    return _elitist(state, flips, problem)


def rls12_step(state, params, rng, problem) -> bool:
    s = 1 + rng.bit()
    state.s = s
    state.max_strength_seen = max(state.max_strength_seen, s)
    return _elitist(state, choose_positions(state.perm, s, rng), problem)


def ea_one_one_step(state, params, rng, problem) -> bool:
    n = len(state.x)
    if state.residual_key == 0 and state.residual >= n:
        # whole steps without a flip: y == x, accepted, nothing changes
        skip = min(state.residual // n, state.budget - state.evaluations)
        state.evaluations += skip
        state.residual -= skip * n
        return False
    return _elitist(state, _bernoulli_flips(state, 0, params.rate, rng), problem)


def fea_step(state, params, rng, problem) -> bool:
    alpha = sample_alpha(params.alpha_cdf, rng)
    state.max_strength_seen = max(state.max_strength_seen, alpha)
    flips = _bernoulli_flips(state, alpha, alpha / params.n, rng)
    return _elitist(state, flips, problem)


def sd_rls_step(state, params, rng, problem) -> bool:
    flips = choose_positions(state.perm, state.s, rng)
    fy = _evaluate_offspring(state, flips, problem)
    state.evaluations += 1
    state.u += 1
    if problem.better(fy, state.fx):
        state.fx = fy
        state.strict_improvements += 1
        _record(state, Event.IMPROVE, flips)
        _record(state, Event.RESET)
        state.s, state.u = 1, 0
        return True
    if fy == state.fx and state.s == 1:
        _record(state, Event.EQUAL_MOVE, flips)
    else:
        _revert(state, flips)
    if state.u >= params.triggers[state.s]:
        _record(state, Event.STRENGTH_UP)
        state.s = min(state.s + 1, params.n)
        state.u = 0
        state.max_strength_seen = max(state.max_strength_seen, state.s)
    return False


def sd_rls_star_step(state, params, rng, problem) -> bool:
    n = params.n
    flips = choose_positions(state.perm, state.s, rng)
    fy = _evaluate_offspring(state, flips, problem)
    state.evaluations += 1
    state.u += 1
    if problem.better(fy, state.fx):
        state.fx = fy
        state.strict_improvements += 1
        _record(state, Event.IMPROVE, flips)
        _record(state, Event.RESET)
        state.s, state.r, state.u = 1, 1, 0
        return True
    if fy == state.fx and state.r == 1:
        _record(state, Event.EQUAL_MOVE, flips)
    else:
        _revert(state, flips)
    if state.u >= params.triggers[state.s]:
        if state.s == 1:
            if 2 * state.r < n:
                _record(state, Event.RADIUS_UP)
                state.r += 1
            else:
                _record(state, Event.RADIUS_TO_N)
                state.r = n
            state.s = state.r
            state.max_strength_seen = max(state.max_strength_seen, state.s)
        else:
            _record(state, Event.STRENGTH_DOWN)
            state.s -= 1
        state.u = 0
    return False


def sd_ea_step(state, params, rng, problem) -> bool:
    r = state.r
    flips = _bernoulli_flips(state, r, r / params.n, rng)
    fy = _evaluate_offspring(state, flips, problem)
    state.evaluations += 1
    state.u += 1
    if problem.better(fy, state.fx):
        state.fx = fy
        state.strict_improvements += 1
        _record(state, Event.IMPROVE, flips)
        _record(state, Event.RESET)
        state.r, state.u = 1, 0
        return True
    if fy == state.fx and r == 1:
        if flips:
            _record(state, Event.EQUAL_MOVE, flips)
    else:
        _revert(state, flips)
    if state.u >= params.triggers[r]:
        _record(state, Event.STRENGTH_UP)
        state.r = min(r + 1, params.rmax)
        state.u = 0
        state.max_strength_seen = max(state.max_strength_seen, state.r)
    return False


STEPS: dict[Variant, Callable] = {
    Variant.RLS_STATIC: rls_static_step,
    Variant.SD_RLS: sd_rls_step,
    Variant.SD_RLS_STAR: sd_rls_star_step,
    Variant.EA_ONE_ONE: ea_one_one_step,
    Variant.FEA_BETA: fea_step,
    Variant.SD_EA: sd_ea_step,
    Variant.RLS_12: rls12_step,
}


def _python_loop(state: AlgorithmState, params: Params, rng: RandomSource, problem: Problem) -> bool:
    step = STEPS[params.variant]
    opt = problem.optimum_value
    while state.evaluations < state.budget:
        if step(state, params, rng, problem):
            if (state.fx == opt) if opt is not None else problem.is_optimum(state.x):
                return True
    return False


def _kernel_loop(state: AlgorithmState, params: Params, rng: RandomSource, problem: Problem, spec) -> bool:
    kind, iparams, eu, ev, ew = spec
    out = _kernel.run_loop(
        VARIANT_CODES[params.variant], state.x, int(state.fx), state.evaluations, state.budget,
        rng.state, params.s, params.rate, params.alpha_cdf, params.triggers, params.rmax,
        kind, iparams, eu, ev, ew, problem.sign, int(problem.optimum_value),
        state.trace is not None,
    )
    (state.evaluations, state.fx, state.strict_improvements, state.max_strength_seen,
     success, raw_trace, rng.state) = out
    if raw_trace is not None:
        state.trace.extend(
            TraceEvent(e, Event(c), s, r, u, tuple(f)) for e, c, s, r, u, f in raw_trace
        )
    return bool(success)


Init = Union[None, Sequence[int], Callable[[RandomSource], Sequence[int]]]


def run_trial(config: AlgorithmConfig, problem: Problem, budget: int, seed: int, *,
              init: Init = None, trace: bool = False, engine: str = "auto",
              keep_point: bool = False) -> RunResult:
    """Run one trial until the optimum or ``budget`` fitness evaluations.

    ``init`` is ``None`` (uniform random start), a fixed bit string, or a
    callable drawing the start point from the trial's random source. The start
    point's evaluation counts as evaluation 1.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    params = Params.resolve(config, problem)
    rng = RandomSource(seed)
    if init is None:
        x = random_bits(problem.n, rng)
    elif callable(init):
        x = bytearray(init(rng))
    else:
        x = bytearray(init)
    if len(x) != problem.n:
        raise ValueError(f"initial point has length {len(x)}, expected {problem.n}")
    state = AlgorithmState(x=x, fx=problem.evaluate(x), budget=budget, trace=[] if trace else None)
    if config.variant is Variant.RLS_STATIC:
        state.s = config.s
        state.max_strength_seen = config.s
    success = problem.is_optimum(state.x)
    if not success and budget > 1:
        spec = problem.kernel_spec() if problem.optimum_value is not None else None
        use_kernel = engine == "kernel" or (engine == "auto" and KERNEL_AVAILABLE and spec is not None)
        if use_kernel:
            if not KERNEL_AVAILABLE:
                raise RuntimeError("compiled kernel is not built")
            if spec is None:
                raise ValueError(f"{problem!r} has no kernel encoding")
            success = _kernel_loop(state, params, rng, problem, spec)
        elif engine in ("auto", "python"):
            success = _python_loop(state, params, rng, problem)
        else:
            raise ValueError(f"unknown engine {engine!r}")
    return RunResult(
        evaluations=state.evaluations,
        success=success,
        censored=not success,
        best_fitness=state.fx,
        strict_improvements=state.strict_improvements,
        max_strength_seen=state.max_strength_seen,
        trace=state.trace,
        final_point=bytes(state.x) if keep_point else None,
    )
