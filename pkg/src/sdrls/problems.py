"""Benchmark fitness functions behind one ``Problem`` interface."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import ones_count
from .graphs import DisjointSet, WeightedGraph, kruskal

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

# kernel problem codes; keep in sync with _kernel.pyx
KIND_ONEMAX, KIND_JUMP, KIND_NGM, KIND_MST = 0, 1, 2, 3

_INT64_SAFE = 1 << 62


class Problem:
    """A pseudo-boolean fitness function with the metadata the algorithms need.

    Subclasses set ``n``, ``direction``, ``image_size_bound`` and
    ``optimum_value`` and implement :meth:`evaluate`. ``is_optimum`` defaults to
    comparing against ``optimum_value``.
    """

    name = "problem"
    n: int
    direction: str = MAXIMIZE
    image_size_bound: int
    optimum_value: Optional[int] = None

    def evaluate(self, x: Sequence[int]) -> int:
        raise NotImplementedError

    def __call__(self, x: Sequence[int]) -> int:
        return self.evaluate(x)

    def is_optimum(self, x: Sequence[int]) -> bool:
        if self.optimum_value is None:
            raise NotImplementedError(f"{self.name} has no optimum value")
        return self.evaluate(x) == self.optimum_value

    @property
    def sign(self) -> int:
        return 1 if self.direction == MAXIMIZE else -1

    def better(self, a: float, b: float) -> bool:
        """``a`` strictly better than ``b`` under this problem's direction."""
        return a > b if self.direction == MAXIMIZE else a < b

    def default_R(self, variant) -> float:
        """Stagnation-detection parameter used when a config leaves ``R`` unset."""
        from .algorithms import Variant

        if variant is Variant.SD_RLS_STAR:
            return float(self.n ** 3 * self.image_size_bound)
        return float(self.image_size_bound)

    def kernel_spec(self):
        """``(kind, params, eu, ev, ew)`` for the compiled loop, or ``None``."""
        return None

    @property
    def gap_m(self) -> Optional[int]:
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class OneMax(Problem):
    name = "onemax"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.image_size_bound = n + 1
        self.optimum_value = n

    def evaluate(self, x):
        return ones_count(x)

    def kernel_spec(self):
        return KIND_ONEMAX, [self.n], [], [], []


def jump_value(ones: int, n: int, m: int) -> int:
    if ones <= n - m or ones == n:
        return m + ones
    return n - ones


class Jump(Problem):
    name = "jump"

    def __init__(self, n: int, m: int):
        if not 1 <= m <= n:
            raise ValueError(f"jump size m={m} outside [1, {n}]")
        self.n, self.m = n, m
        self.image_size_bound = n + 1
        self.optimum_value = n + m

    def evaluate(self, x):
        return jump_value(ones_count(x), self.n, self.m)

    def default_R(self, variant):
        return float(self.n ** 4)

    def kernel_spec(self):
        return KIND_JUMP, [self.n, self.m], [], [], []

    @property
    def gap_m(self):
        return self.m

    def __repr__(self):
        return f"Jump(n={self.n}, m={self.m})"


def _ceil_root(n: int, k: int) -> int:
    """Smallest integer ``r`` with ``r**k >= n``."""
    r = max(1, round(n ** (1.0 / k)))
    while r ** k < n:
        r += 1
    while r > 1 and (r - 1) ** k >= n:
        r -= 1
    return r


@dataclass(frozen=True)
class NeedGlobalMutLayout:
    n: int
    block_size: int
    block_count: int

    @classmethod
    def for_length(cls, n: int) -> "NeedGlobalMutLayout":
        b = _ceil_root(n, 4)
        blocks = 1
        while 9 * blocks * blocks < n:  # ceil(sqrt(n) / 3)
            blocks += 1
        layout = cls(n, b, blocks)
        if layout.prefix_length < 1 or layout.boundary >= layout.prefix_length:
            raise ValueError(f"n={n} is too small for a NeedGlobalMut layout")
        return layout

    @property
    def suffix_length(self) -> int:
        return self.block_size * self.block_count

    @property
    def prefix_length(self) -> int:
        return self.n - self.suffix_length

    @property
    def boundary(self) -> int:
        return 9 * self.prefix_length // 10

    def local_optimum_value(self) -> int:
        n, B = self.n, self.block_count
        return n * n * B + self.prefix_length + B - n - 1

    def global_optimum_value(self) -> int:
        return self.n * self.n * self.block_count + self.boundary

    def case_value(self, pre: int, suff: int) -> int:
        """Fitness of a valid point with the given PRE and SUFF values."""
        n = self.n
        if pre <= self.boundary:
            return n * n * suff + pre
        return n * n * self.block_count + pre + suff - n - 1

    def point(self, pre: int, suff: int) -> bytes:
        """Canonical valid point; active blocks carry their ones in the first two slots."""
        b = self.block_size
        prefix = [1] * pre + [0] * (self.prefix_length - pre)
        block_on = [1, 1] + [0] * (b - 2)
        suffix = block_on * suff + [0] * (b * (self.block_count - suff))
        return bytes(prefix + suffix)


def prefix_suffix_values(x: Sequence[int], layout: NeedGlobalMutLayout):
    """``(PRE, SUFF)`` of ``x``, with ``None`` for an invalid part."""
    plen = layout.prefix_length
    lead = 0
    while lead < plen and x[lead]:
        lead += 1
    pre = lead if not any(x[lead:plen]) else None
    suff = 0
    inactive_seen = False
    b = layout.block_size
    for k in range(layout.block_count):
        start = plen + k * b
        c = sum(x[start:start + b])
        if c == 2:
            if inactive_seen:
                return pre, None
            suff += 1
        elif c == 0:
            inactive_seen = True
        else:
            return pre, None
    return pre, suff


class NeedGlobalMut(Problem):
    """Leading-ones prefix with a two-bit block suffix and a trap past the boundary.

    The second-case constant multiplies ``n^2`` by the block count, so points
    past the boundary sit just below the global optimum.
    """

    name = "needglobalmut"

    def __init__(self, n: int):
        self.n = n
        self.layout = NeedGlobalMutLayout.for_length(n)
        lay = self.layout
        self.m = lay.suffix_length
        self.image_size_bound = (lay.prefix_length + 1) * (lay.block_count + 1) + n + 1
        self.optimum_value = lay.global_optimum_value()

    def evaluate(self, x):
        pre, suff = prefix_suffix_values(x, self.layout)
        if pre is None or suff is None:
            return -ones_count(x)
        return self.layout.case_value(pre, suff)

    def kernel_spec(self):
        lay = self.layout
        return KIND_NGM, [self.n, lay.prefix_length, lay.block_size, lay.block_count, lay.boundary], [], [], []


class MSTProblem(Problem):
    """Minimum spanning tree with penalties for disconnected and cyclic selections.

    Fitness ``(c-1)*P^2 + max(0, e-(V-1))*P + w`` with ``P = V^2 * w_max``,
    ``c`` components, ``e`` selected edges and ``w`` their total weight.
    Minimized.
    """

    name = "mst"
    direction = MINIMIZE

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.n = graph.edge_count
        V = graph.vertex_count
        self.penalty = V * V * graph.max_weight
        P = self.penalty
        self.mst_weight, self.mst_edges = kruskal(graph)
        self.optimum_value = self.mst_weight
        total_w = sum(e.w for e in graph.edges)
        self.image_size_bound = (V - 1) * P * P + self.n * P + total_w + 1
        self._eu = [e.u for e in graph.edges]
        self._ev = [e.v for e in graph.edges]
        self._ew = [e.w for e in graph.edges]

    def parts(self, x: Sequence[int]) -> tuple[int, int, int]:
        """``(components, selected edges, selected weight)``."""
        ds = DisjointSet(self.graph.vertex_count)
        e = w = 0
        for i, bit in enumerate(x):
            if bit:
                e += 1
                w += self._ew[i]
                ds.union(self._eu[i], self._ev[i])
        return ds.sets, e, w

    def evaluate(self, x):
        c, e, w = self.parts(x)
        P = self.penalty
        return (c - 1) * P * P + max(0, e - (self.graph.vertex_count - 1)) * P + w

    def default_R(self, variant):
        return float(self.n ** 4)

    def kernel_spec(self):
        if self.image_size_bound >= _INT64_SAFE:
            return None
        return KIND_MST, [self.graph.vertex_count, self.penalty], self._eu, self._ev, self._ew

    def __repr__(self):
        return f"MSTProblem(V={self.graph.vertex_count}, E={self.n})"


class FunctionProblem(Problem):
    """Wrap a plain callable; runs only on the pure-Python loop."""

    def __init__(self, n: int, fn: Callable[[Sequence[int]], int], *, optimum_value=None,
                 is_optimum: Callable | None = None, image_size_bound: int | None = None,
                 direction: str = MAXIMIZE, name: str = "function"):
        self.n = n
        self.fn = fn
        self.optimum_value = optimum_value
        self._is_optimum = is_optimum
        self.image_size_bound = image_size_bound or (1 << n)
        self.direction = direction
        self.name = name

    def evaluate(self, x):
        return self.fn(x)

    def is_optimum(self, x):
        if self._is_optimum is not None:
            return self._is_optimum(x)
        return super().is_optimum(x)


def gap_oracle(problem: Problem, x: Sequence[int], max_n: int = 20) -> Optional[int]:
    """Smallest Hamming distance to a strictly better point, ``None`` if ``x`` is optimal.

    Searches Hamming spheres of growing radius; exponential, test use only.
    """
    n = problem.n
    if n > max_n:
        raise ValueError(f"gap_oracle limited to n <= {max_n}")
    fx = problem.evaluate(x)
    y = bytearray(x)
    for radius in range(1, n + 1):
        for positions in itertools.combinations(range(n), radius):
            for i in positions:
                y[i] ^= 1
            better = problem.better(problem.evaluate(y), fx)
            for i in positions:
                y[i] ^= 1
            if better:
                return radius
    return None
