import io
import math
from itertools import combinations

import networkx as nx
import pytest

from sdrls.core import RandomSource
from sdrls.graphs import (
    DisjointSet, GraphError, WeightedGraph, components, erdos_renyi, is_connected, kruskal,
    random_spanning_tree, rank_potential, read_edge_list, tg_graph, weight_ranks, write_edge_list,
)

K3 = WeightedGraph.from_triples(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)])


def brute_mst(g):
    """Minimum over every (V-1)-subset of edges that connects the graph."""
    best = None
    for subset in combinations(range(g.edge_count), g.vertex_count - 1):
        sel = [0] * g.edge_count
        for i in subset:
            sel[i] = 1
        if components(g, sel) == 1:
            w = sum(g.edges[i].w for i in subset)
            best = w if best is None else min(best, w)
    return best


def test_graph_validation():
    with pytest.raises(GraphError):
        WeightedGraph.from_triples(2, [(0, 0, 1)])
    with pytest.raises(GraphError):
        WeightedGraph.from_triples(2, [(0, 1, 1), (1, 0, 2)])
    with pytest.raises(GraphError):
        WeightedGraph.from_triples(2, [(0, 1, 0)])
    with pytest.raises(GraphError):
        WeightedGraph.from_triples(2, [(0, 2, 1)])


def test_disjoint_set():
    ds = DisjointSet(5)
    assert ds.union(0, 1) and ds.union(3, 4) and not ds.union(1, 0)
    assert ds.sets == 3 and ds.find(0) == ds.find(1) and ds.find(2) != ds.find(3)


def test_components_examples():
    assert components(K3, [0, 0, 0]) == 3
    assert components(K3, [1, 1, 1]) == 1
    assert components(K3, [1, 0, 0]) == 2


def test_kruskal_examples():
    assert kruskal(K3) == (3, [0, 1])
    path = WeightedGraph.from_triples(5, [(0, 1, 4), (1, 2, 7), (2, 3, 1), (3, 4, 9)])
    assert kruskal(path) == (21, [0, 1, 2, 3])
    with pytest.raises(GraphError):
        kruskal(WeightedGraph.from_triples(4, [(0, 1, 1), (2, 3, 1)]))


def _random_graph(rng, V, E):
    pairs = list(combinations(range(V), 2))
    rng.shuffle(pairs)
    return WeightedGraph.from_triples(V, [(u, v, 1 + rng.below(6)) for u, v in pairs[:E]])


def test_kruskal_matches_exhaustive_minimum():
    rng = RandomSource(5)
    checked = 0
    while checked < 60:
        V = 3 + rng.below(4)
        E = min(V - 1 + rng.below(6), V * (V - 1) // 2, 10)
        g = _random_graph(rng, V, E)
        if not is_connected(g):
            continue
        weight, ids = kruskal(g)
        assert weight == brute_mst(g)
        assert len(ids) == V - 1 and components(g, [int(i in ids) for i in range(E)]) == 1
        checked += 1


def test_kruskal_matches_networkx():
    for seed in range(5):
        g = erdos_renyi(30, RandomSource(seed))
        ref = nx.Graph()
        ref.add_weighted_edges_from((e.u, e.v, e.w) for e in g.edges)
        expected = sum(d["weight"] for *_, d in nx.minimum_spanning_edges(ref, data=True))
        assert kruskal(g)[0] == expected


def test_kruskal_below_random_trees():
    g = erdos_renyi(20, RandomSource(8))
    best, _ = kruskal(g)
    rng = RandomSource(9)
    for _ in range(1000):
        sel = random_spanning_tree(g, rng)
        assert sum(sel) == 19 and components(g, sel) == 1
        assert sum(e.w for e, b in zip(g.edges, sel) if b) >= best


def test_weight_ranks():
    g = WeightedGraph.from_triples(3, [(0, 1, 5), (1, 2, 1), (0, 2, 3)])
    assert weight_ranks(g) == [3, 1, 2]
    g2 = WeightedGraph.from_triples(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)])
    assert weight_ranks(g2) == [1, 2, 3]
    g3 = erdos_renyi(25, RandomSource(1))
    r = weight_ranks(g3)
    assert sorted(r) == list(range(1, g3.edge_count + 1))
    assert rank_potential(g2, [1, 0, 1]) == 4


def test_tg_n24():
    g = tg_graph(24)
    assert g.vertex_count == 24 and g.edge_count == 84
    weights = sorted({e.w for e in g.edges})
    assert weights == [1, 1152, 1728]
    assert sum(e.w == 1728 for e in g.edges) == 6 and sum(e.w == 1152 for e in g.edges) == 12
    assert kruskal(g)[0] == 6 * 4 * 576 + 11 == 13835


def test_tg_chain_brute_force_small():
    # a = 1 keeps weights small; n = 8 has 2 triangles and a 4-clique (12 edges)
    g = tg_graph(8, a=1)
    assert g.edge_count == 12
    assert kruskal(g)[0] == brute_mst(g) == 2 * 4 + 3


@pytest.mark.parametrize("n", range(8, 65, 4))
def test_tg_closed_forms(n):
    g = tg_graph(n)
    assert g.vertex_count == n
    assert g.edge_count == 3 * n // 4 + math.comb(n // 2, 2)
    assert is_connected(g)
    assert kruskal(g)[0] == (n // 4) * 4 * n * n + n // 2 - 1


def test_tg_rejects_bad_n():
    with pytest.raises(GraphError):
        tg_graph(10)


def test_erdos_renyi_properties():
    n = 16
    assert 2 * math.log(n) / n == pytest.approx(0.3466, abs=1e-4)
    for seed in range(20):
        g = erdos_renyi(n, RandomSource(seed))
        assert is_connected(g)
        assert all(1 <= e.w <= 256 for e in g.edges)
    assert erdos_renyi(n, RandomSource(3)) == erdos_renyi(n, RandomSource(3))


def test_erdos_renyi_retry_cap():
    # tiny n is almost never connected at this density; a single attempt must be reported
    with pytest.raises(GraphError):
        for seed in range(200):
            erdos_renyi(3, RandomSource(seed), max_attempts=1)


def test_edge_list_roundtrip(tmp_path):
    g = tg_graph(12)
    buf = io.StringIO()
    write_edge_list(g, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "12 24"
    assert read_edge_list(io.StringIO(text)) == g
    path = tmp_path / "g.txt"
    path.write_text(text)
    assert read_edge_list(path) == g


def test_edge_list_rejects_bad_counts():
    with pytest.raises((GraphError, ValueError)):
        read_edge_list(io.StringIO("3 2\n0 1 1\n"))
