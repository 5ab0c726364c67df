"""Randomized local search with stagnation detection, and a benchmark harness."""

from .algorithms import (
    KERNEL_AVAILABLE,
    AlgorithmConfig,
    Event,
    RunResult,
    TraceEvent,
    Variant,
    run_trial,
)
from .core import RandomSource, bits, derive, hamming, s_flip, sd_threshold
from .graphs import WeightedGraph, erdos_renyi, kruskal, tg_graph
from .problems import Jump, MSTProblem, NeedGlobalMut, OneMax, gap_oracle

__all__ = [
    "KERNEL_AVAILABLE",
    "AlgorithmConfig",
    "Event",
    "Jump",
    "MSTProblem",
    "NeedGlobalMut",
    "OneMax",
    "RandomSource",
    "RunResult",
    "TraceEvent",
    "Variant",
    "WeightedGraph",
    "bits",
    "derive",
    "erdos_renyi",
    "gap_oracle",
    "hamming",
    "kruskal",
    "run_trial",
    "s_flip",
    "sd_threshold",
    "tg_graph",
]
