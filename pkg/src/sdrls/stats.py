"""Mann-Whitney U test and small descriptive helpers."""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence


class MannWhitneyResult(NamedTuple):
    U: float
    p: float


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _u_statistic(ranks_a: Sequence[float], n_a: int) -> float:
    return math.fsum(ranks_a) - n_a * (n_a + 1) / 2.0


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """``U`` of sample ``a`` and the two-sided p-value.

    Normal approximation with tie correction and continuity correction.
    """
    n_a, n_b = len(a), len(b)
    if n_a < 1 or n_b < 1:
        raise ValueError("both samples need at least one value")
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    u_a = _u_statistic(ranks[:n_a], n_a)
    N = n_a + n_b
    mu = n_a * n_b / 2.0
    tie_term = 0
    for _, group in itertools.groupby(sorted(pooled)):
        t = sum(1 for _ in group)
        tie_term += t ** 3 - t
    var = n_a * n_b / 12.0 * ((N + 1) - tie_term / (N * (N - 1))) if N > 1 else 0.0
    if var <= 0:
        return MannWhitneyResult(u_a, 1.0)
    u_big = max(u_a, n_a * n_b - u_a)
    z = (u_big - mu - 0.5) / math.sqrt(var)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return MannWhitneyResult(u_a, p)


def mann_whitney_exact(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """Two-sided permutation p-value over every split of the pooled midranks.

    Counts splits whose ``|U - n_a n_b / 2|`` is at least the observed one.
    Enumerates ``C(n_a + n_b, n_a)`` splits, so keep samples small.
    """
    n_a, n_b = len(a), len(b)
    if n_a < 1 or n_b < 1:
        raise ValueError("both samples need at least one value")
    if math.comb(n_a + n_b, n_a) > 2_000_000:
        raise ValueError("samples too large for exact enumeration")
    ranks = midranks(list(a) + list(b))
    mu = n_a * n_b / 2.0
    observed = _u_statistic(ranks[:n_a], n_a)
    dev = abs(observed - mu)
    hits = total = 0
    for idx in itertools.combinations(range(n_a + n_b), n_a):
        u = _u_statistic([ranks[i] for i in idx], n_a)
        total += 1
        if abs(u - mu) >= dev - 1e-9:
            hits += 1
    return MannWhitneyResult(observed, hits / total)


def mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs) if xs else math.nan


def median(xs: Sequence[float]) -> float:
    if not xs:
        return math.nan
    s = sorted(xs)
    mid = len(s) // 2
    return float(s[mid]) if len(s) % 2 else (s[mid - 1] + s[mid]) / 2.0


def pstdev(xs: Sequence[float]) -> float:
    if not xs:
        return math.nan
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))
