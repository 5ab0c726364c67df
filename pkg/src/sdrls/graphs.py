"""Weighted graphs, the TG and Erdos-Renyi generators, and reference MSTs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from .core import RandomSource


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    w: int


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph; an edge's id is its position in ``edges``."""

    vertex_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if not (0 <= e.u < self.vertex_count and 0 <= e.v < self.vertex_count):
                raise GraphError(f"edge ({e.u}, {e.v}) references a missing vertex")
            if e.u == e.v:
                raise GraphError(f"self-loop at vertex {e.u}")
            if e.w <= 0:
                raise GraphError(f"non-positive weight {e.w}")
            key = (min(e.u, e.v), max(e.u, e.v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def max_weight(self) -> int:
        return max((e.w for e in self.edges), default=1)

    @classmethod
    def from_triples(cls, vertex_count: int, triples) -> "WeightedGraph":
        return cls(vertex_count, tuple(Edge(int(u), int(v), int(w)) for u, v, w in triples))


class DisjointSet:
    __slots__ = ("parent", "size", "sets")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.sets = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.sets -= 1
        return True


def components(g: WeightedGraph, selection: Sequence[int]) -> int:
    """Connected components of ``(V, selected edges)``."""
    if len(selection) != g.edge_count:
        raise ValueError("selection length must equal the edge count")
    ds = DisjointSet(g.vertex_count)
    for e, bit in zip(g.edges, selection):
        if bit:
            ds.union(e.u, e.v)
    return ds.sets


def kruskal(g: WeightedGraph) -> tuple[int, list[int]]:
    """MST weight and the ids of one minimum tree (ties broken by edge id)."""
    order = sorted(range(g.edge_count), key=lambda i: (g.edges[i].w, i))
    ds = DisjointSet(g.vertex_count)
    chosen = []
    total = 0
    for i in order:
        e = g.edges[i]
        if ds.union(e.u, e.v):
            chosen.append(i)
            total += e.w
            if len(chosen) == g.vertex_count - 1:
                break
    if ds.sets != 1:
        raise GraphError("graph is disconnected; no spanning tree exists")
    return total, sorted(chosen)


def is_connected(g: WeightedGraph) -> bool:
    return components(g, [1] * g.edge_count) == 1


def weight_ranks(g: WeightedGraph) -> list[int]:
    order = sorted(range(g.edge_count), key=lambda i: (g.edges[i].w, i))
    ranks = [0] * g.edge_count
    for rank, i in enumerate(order, start=1):
        ranks[i] = rank
    return ranks


def rank_potential(g: WeightedGraph, selection: Sequence[int], ranks: Sequence[int] | None = None) -> int:
    """Sum of weight ranks over the selected edges."""
    ranks = weight_ranks(g) if ranks is None else ranks
    return sum(r for r, bit in zip(ranks, selection) if bit)


def random_spanning_tree(g: WeightedGraph, rng: RandomSource) -> bytearray:
    """Kruskal over a shuffled edge order; returns the edge selection."""
    order = list(range(g.edge_count))
    rng.shuffle(order)
    ds = DisjointSet(g.vertex_count)
    sel = bytearray(g.edge_count)
    for i in order:
        e = g.edges[i]
        if ds.union(e.u, e.v):
            sel[i] = 1
    if ds.sets != 1:
        raise GraphError("graph is disconnected; no spanning tree exists")
    return sel


def tg_graph(n: int, a: int | None = None) -> WeightedGraph:
    """Chain of ``n/4`` triangles ending in a unit-weight clique on ``n/2`` vertices.

    Vertices ``0..q-1`` form the clique. Triangle ``i`` has a near vertex, an
    apex and a far vertex; its main edge (near, far) weighs ``3a`` and its two
    sides (near, apex), (apex, far) weigh ``2a``. Each far vertex is the next
    triangle's near vertex and the last far vertex is clique vertex 0. Edge ids:
    per triangle (main, side, side), then clique pairs in lexicographic order.
    """
    if n < 8 or n % 4:
        raise GraphError(f"TG needs n divisible by 4 and n >= 8, got {n}")
    a = n * n if a is None else a
    p, q = n // 4, n // 2
    triples = []
    near = q
    nxt = q + 1
    for i in range(p):
        apex = nxt
        nxt += 1
        if i == p - 1:
            far = 0
        else:
            far = nxt
            nxt += 1
        triples += [(near, far, 3 * a), (near, apex, 2 * a), (apex, far, 2 * a)]
        near = far
    assert nxt == n
    for u in range(q):
        for v in range(u + 1, q):
            triples.append((u, v, 1))
    return WeightedGraph.from_triples(n, triples)


def erdos_renyi(n: int, rng: RandomSource, max_attempts: int = 10_000) -> WeightedGraph:
    """G(n, 2 ln n / n) with uniform integer weights in ``[1, n^2]``, resampled until connected."""
    if n < 3:
        raise GraphError("Erdos-Renyi generator needs n >= 3")
    p = 2.0 * math.log(n) / n
    for _ in range(max_attempts):
        triples = []
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    triples.append((u, v, 1 + rng.below(n * n)))
        g = WeightedGraph.from_triples(n, triples)
        if g.edge_count >= n - 1 and is_connected(g):
            return g
    raise GraphError(f"no connected graph after {max_attempts} attempts")


def write_edge_list(g: WeightedGraph, out: TextIO) -> None:
    out.write(f"{g.vertex_count} {g.edge_count}\n")
    for e in g.edges:
        out.write(f"{e.u} {e.v} {e.w}\n")


def read_edge_list(source: TextIO | str | Path) -> WeightedGraph:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_edge_list(fh)
    lines = [ln.split() for ln in source if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise GraphError("edge list must start with a 'V E' header")
    v_count, e_count = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != e_count:
        raise GraphError(f"header announces {e_count} edges, found {len(body)}")
    return WeightedGraph.from_triples(v_count, [tuple(map(int, t)) for t in body])
