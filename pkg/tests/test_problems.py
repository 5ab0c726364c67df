from itertools import combinations, product

import numpy as np
import pytest

from sdrls.algorithms import Variant
from sdrls.core import RandomSource, bits, random_bits
from sdrls.graphs import WeightedGraph, components, is_connected
from sdrls.problems import (
    FunctionProblem, Jump, MSTProblem, NeedGlobalMut, NeedGlobalMutLayout, OneMax,
    gap_oracle, jump_value, prefix_suffix_values,
)


def all_points(n):
    return [bytes(p) for p in product((0, 1), repeat=n)]


# -- OneMax / Jump ----------------------------------------------------------

def test_onemax_examples():
    f = OneMax(4)
    assert f(bits("1111")) == 4 and f(bits("0000")) == 0 and f(bits("0101")) == 2
    assert f.image_size_bound == 5 and f.optimum_value == 4


@pytest.mark.parametrize("ones,value", [(10, 13), (7, 10), (9, 1), (8, 2), (0, 3)])
def test_jump_examples(ones, value):
    assert jump_value(ones, 10, 3) == value
    f = Jump(10, 3)
    assert f(bytes([1] * ones + [0] * (10 - ones))) == value


def test_jump_is_shifted_onemax_below_gap():
    for n in range(1, 15):
        for m in range(1, n + 1):
            for k in range(0, n - m + 1):
                assert jump_value(k, n, m) == k + m


def test_jump_rejects_bad_m():
    with pytest.raises(ValueError):
        Jump(5, 6)
    with pytest.raises(ValueError):
        Jump(5, 0)


def test_default_R():
    assert OneMax(10).default_R(Variant.SD_RLS) == 11
    assert OneMax(10).default_R(Variant.SD_RLS_STAR) == 1000 * 11
    assert Jump(20, 2).default_R(Variant.SD_RLS_STAR) == 20 ** 4


# -- NeedGlobalMut ------------------------------------------------------------

def test_layout_n36():
    lay = NeedGlobalMutLayout.for_length(36)
    assert (lay.block_size, lay.block_count, lay.suffix_length) == (3, 2, 6)
    assert (lay.prefix_length, lay.boundary) == (30, 27)
    assert lay.local_optimum_value() == 2587 and lay.global_optimum_value() == 2619


def test_ngm_examples_n36():
    f = NeedGlobalMut(36)
    assert f(bits("1" * 30 + "110110")) == 1296 * 2 + 30 + 2 - 37 == 2587
    assert f(bits("1" * 27 + "000" + "110110")) == 1296 * 2 + 27 == 2619
    assert f(bits("01" + "0" * 34)) == -1
    assert f.optimum_value == 2619


def test_ngm_suffix_rules():
    lay = NeedGlobalMutLayout.for_length(36)
    pre = "1" * 5 + "0" * 25
    assert prefix_suffix_values(bits(pre + "110000"), lay) == (5, 1)
    assert prefix_suffix_values(bits(pre + "000110"), lay)[1] is None  # active after inactive
    assert prefix_suffix_values(bits(pre + "100000"), lay)[1] is None  # one-bit block
    assert prefix_suffix_values(bits(pre + "111000"), lay)[1] is None  # three-bit block
    assert prefix_suffix_values(bits(pre + "011101"), lay) == (5, 2)  # any two bits count


def test_ngm_point_roundtrip():
    lay = NeedGlobalMutLayout.for_length(40)
    f = NeedGlobalMut(40)
    for pre in range(lay.prefix_length + 1):
        for suff in range(lay.block_count + 1):
            x = lay.point(pre, suff)
            assert prefix_suffix_values(x, lay) == (pre, suff)
            assert f(x) == lay.case_value(pre, suff)


@pytest.mark.parametrize("n", range(16, 65))
def test_ngm_optimum_ordering(n):
    lay = NeedGlobalMutLayout.for_length(n)
    B, plen = lay.block_count, lay.prefix_length
    glob = lay.case_value(lay.boundary, B)
    local = lay.case_value(plen, B)
    assert glob > local
    for pre in range(plen + 1):
        for suff in range(B + 1):
            v = lay.case_value(pre, suff)
            if pre > lay.boundary and pre < plen:
                assert local > v
            if pre <= lay.boundary and suff < B:
                assert local > v
            if (pre, suff) != (lay.boundary, B):
                assert glob > v


def test_ngm_optimum_is_global_exhaustive_small():
    f = NeedGlobalMut(12)
    values = [f(x) for x in all_points(12)]
    assert max(values) == f.optimum_value
    assert len(set(values)) <= f.image_size_bound


# -- MST fitness --------------------------------------------------------------

K3 = WeightedGraph.from_triples(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)])


def test_mst_examples_triangle():
    f = MSTProblem(K3)
    assert f.penalty == 27
    assert f(bits("110")) == 3
    assert f(bits("111")) == 27 + 6
    assert f(bits("100")) == 27 ** 2 + 1
    assert f.optimum_value == 3 and f.direction == "minimize"
    assert f.better(3, 4) and not f.better(4, 3)


def _small_graphs():
    rng = RandomSource(99)
    out = [K3]
    # random connected graphs with 6..12 edges on 5..6 vertices
    while len(out) < 12:
        V = 5 + rng.below(2)
        pairs = list(combinations(range(V), 2))
        rng.shuffle(pairs)
        E = 6 + rng.below(7)
        if E > len(pairs):
            continue
        triples = [(u, v, 1 + rng.below(9)) for u, v in pairs[:E]]
        g = WeightedGraph.from_triples(V, triples)
        if is_connected(g):
            out.append(g)
    return out


@pytest.mark.parametrize("g", _small_graphs())
def test_mst_spanning_trees_dominate(g):
    f = MSTProblem(g)
    V = g.vertex_count
    tree_vals, other_vals = [], []
    for x in all_points(g.edge_count):
        c, e, _ = f.parts(x)
        assert c == components(g, x)
        (tree_vals if c == 1 and e == V - 1 else other_vals).append(f(x))
    assert max(tree_vals) < min(other_vals)
    assert min(tree_vals) == f.optimum_value
    assert len(set(tree_vals + other_vals)) <= f.image_size_bound


# -- gap oracle -----------------------------------------------------------------

def test_gap_examples():
    f = OneMax(6)
    assert gap_oracle(f, bits("101111")) == 1
    assert gap_oracle(f, bits("111111")) is None
    j = Jump(8, 2)
    assert gap_oracle(j, bits("11111100")) == 2
    assert gap_oracle(j, bits("11011100")) == 1


def _brute_gaps(problem):
    """Exact gap for every point: fitness table plus a full pairwise distance matrix."""
    n = problem.n
    pts = all_points(n)
    f = np.array([problem.evaluate(p) for p in pts], dtype=np.int64) * problem.sign
    idx = np.arange(1 << n, dtype=np.int64)
    out = {}
    for i, p in enumerate(pts):
        # enumeration order maps bit positions to index bits, so popcount of XOR is distance
        dist = _popcount(idx ^ i)
        mask = f > f[i]
        out[p] = int(dist[mask].min()) if mask.any() else None
    return out


def _popcount(a):
    a = a.copy()
    c = np.zeros_like(a)
    while a.any():
        c += a & 1
        a >>= 1
    return c


@pytest.mark.parametrize("problem", [OneMax(8), Jump(8, 3), NeedGlobalMut(10)])
def test_gap_oracle_matches_scan_exhaustive(problem):
    truth = _brute_gaps(problem)
    for x, g in truth.items():
        assert gap_oracle(problem, x) == g


@pytest.mark.parametrize("problem", [OneMax(12), Jump(12, 4), NeedGlobalMut(12)])
def test_gap_oracle_matches_scan_n12(problem):
    truth = _brute_gaps(problem)
    rng = RandomSource(3)
    sample = [random_bits(12, rng) for _ in range(150)]
    sample += [bytes(12), bytes([1] * 12)]
    if isinstance(problem, Jump):
        sample.append(bytes([1] * 8 + [0] * 4))
    if isinstance(problem, NeedGlobalMut):
        lay = problem.layout
        sample += [lay.point(lay.prefix_length, lay.block_count), lay.point(lay.boundary, lay.block_count)]
    for x in sample:
        assert gap_oracle(problem, x) == truth[bytes(x)]


def test_gap_oracle_size_limit():
    with pytest.raises(ValueError):
        gap_oracle(OneMax(30), bytes(30))


def test_function_problem_wrapper():
    f = FunctionProblem(3, lambda x: -sum(x), optimum_value=0, direction="maximize")
    assert f(bits("000")) == 0 and f.is_optimum(bits("000")) and not f.is_optimum(bits("100"))
    assert f.kernel_spec() is None
