"""Macro, meso and micro level network metrics.

Distance, triangle, component and core measures run on the simple undirected
loop-free view of the entity graph; degree measures use the directed graph.
Nodes may be any sortable hashable (``EntityId`` in the pipeline, plain
strings in tests); the sort order of nodes is the ranking tie-break.

Per-source BFS work is split into fixed-size chunks of sources so results do
not depend on how many worker processes evaluate them.
"""

from __future__ import annotations

import math
import random
import statistics
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import DegenerateGraphError
from .graph import EntityCitationGraph

CHUNK = 64


@dataclass(frozen=True)
class UndirectedView:
    nodes: tuple
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, nodes: Iterable[Hashable], edges: Iterable[tuple]) -> "UndirectedView":
        order = sorted(set(nodes))
        index = {v: i for i, v in enumerate(order)}
        nbrs: list[set[int]] = [set() for _ in order]
        for u, v in edges:
            if u == v:
                continue
            a, b = index[u], index[v]
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(tuple(order), tuple(tuple(sorted(s)) for s in nbrs))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> list[tuple]:
        return [(self.nodes[i], self.nodes[j]) for i, a in enumerate(self.adj) for j in a if i < j]

    def subview(self, members: Iterable[int]) -> "UndirectedView":
        keep = set(members)
        return UndirectedView.from_edges(
            (self.nodes[i] for i in keep),
            ((self.nodes[i], self.nodes[j]) for i in keep for j in self.adj[i] if i < j and j in keep),
        )


def undirected_view(g: EntityCitationGraph) -> UndirectedView:
    return UndirectedView.from_edges(g.nodes, g.edges)


def bfs_distances(adj: Sequence[Sequence[int]], source: int) -> list[int]:
    """Hop distances from ``source``; -1 marks unreachable nodes."""
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv
                queue.append(w)
    return dist


# ---------------------------------------------------------------- components

@dataclass(frozen=True)
class ComponentLabels:
    labels: dict
    sizes: list[int]  # descending; component id i has size sizes[i]

    def members(self, cid: int) -> list:
        return sorted(v for v, c in self.labels.items() if c == cid)


def weak_components(view: UndirectedView) -> ComponentLabels:
    n = len(view)
    comp = [-1] * n
    groups: list[list[int]] = []
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = len(groups)
        group = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in view.adj[v]:
                if comp[w] < 0:
                    comp[w] = comp[s]
                    group.append(w)
                    queue.append(w)
        groups.append(group)
    # largest first; ties keep discovery order, i.e. smallest member first
    order = sorted(range(len(groups)), key=lambda g: -len(groups[g]))
    relabel = {old: new for new, old in enumerate(order)}
    labels = {view.nodes[i]: relabel[comp[i]] for i in range(n)}
    return ComponentLabels(labels, [len(groups[g]) for g in order])


def _largest_component(view: UndirectedView) -> tuple[UndirectedView, bool]:
    comps = weak_components(view)
    if len(comps.sizes) <= 1:
        return view, False
    members = [i for i, v in enumerate(view.nodes) if comps.labels[v] == 0]
    return view.subview(members), True


@dataclass(frozen=True)
class BiComponentSet:
    components: list[frozenset]
    articulation_points: frozenset


def bicomponents(view: UndirectedView) -> BiComponentSet:
    """Biconnected components via iterative Hopcroft-Tarjan with an edge stack.

    A bridge forms a two-node bi-component; isolated nodes belong to none.
    """
    n = len(view)
    disc = [-1] * n
    low = [0] * n
    timer = 0
    comps: list[frozenset] = []
    arts: set[int] = set()
    for root in range(n):
        if disc[root] >= 0 or not view.adj[root]:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        edge_stack: list[tuple[int, int]] = []
        stack = [(root, -1, iter(view.adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            for w in it:
                if disc[w] < 0:
                    edge_stack.append((v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    if v == root:
                        root_children += 1
                    stack.append((w, v, iter(view.adj[w])))
                    break
                if w != parent and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if parent < 0:
                    continue
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    if parent != root:
                        arts.add(parent)
                    members = set()
                    while True:
                        a, b = edge_stack.pop()
                        members.update((a, b))
                        if (a, b) == (parent, v):
                            break
                    comps.append(members)
        if root_children > 1:
            arts.add(root)
    out = sorted((sorted(c) for c in comps), key=lambda c: (-len(c), c))
    return BiComponentSet(
        [frozenset(view.nodes[i] for i in c) for c in out],
        frozenset(view.nodes[i] for i in arts),
    )


# ---------------------------------------------------------------------- cores

@dataclass(frozen=True)
class CoreDecomposition:
    core: dict
    max_k: int
    max_core_members: frozenset


def k_core_decomposition(view: UndirectedView) -> CoreDecomposition:
    """Core numbers by bucket peeling (Batagelj-Zaversnik).

    Degrees are never decremented below the current level, so the level only
    rises and a node's core number is the level at which it is removed.
    """
    n = len(view)
    if n == 0:
        return CoreDecomposition({}, 0, frozenset())
    deg = [len(a) for a in view.adj]
    maxdeg = max(deg)
    buckets: list[set[int]] = [set() for _ in range(maxdeg + 1)]
    for v, d in enumerate(deg):
        buckets[d].add(v)
    core = [0] * n
    removed = [False] * n
    k = 0
    for _ in range(n):
        while not buckets[k]:
            k += 1
        v = buckets[k].pop()
        removed[v] = True
        core[v] = k
        for w in view.adj[v]:
            if not removed[w] and deg[w] > k:
                buckets[deg[w]].discard(w)
                deg[w] -= 1
                buckets[deg[w]].add(w)
    max_k = max(core)
    return CoreDecomposition(
        {view.nodes[i]: core[i] for i in range(n)},
        max_k,
        frozenset(view.nodes[i] for i in range(n) if core[i] == max_k),
    )


# ------------------------------------------------------------------ distances

def _run_chunks(func, payload, n_sources: int, workers: int) -> list:
    chunks = [range(i, min(i + CHUNK, n_sources)) for i in range(0, n_sources, CHUNK)]
    if workers <= 1 or len(chunks) <= 1:
        return [func(payload, c) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, [payload] * len(chunks), chunks))


def _eccentricity_chunk(payload, sources):
    adj, targets = payload
    out = []
    for s in (targets[i] for i in sources):
        dist = bfs_distances(adj, s)
        far = max(range(len(dist)), key=lambda j: (dist[j], -j))
        out.append((s, sum(d for d in dist if d > 0), dist[far], far))
    return out


@dataclass(frozen=True)
class DistanceSummary:
    mean_geodesic: float  # sum over i >= j of d_ij divided by N(N+1)/2
    mean_geodesic_conventional: float  # same sum over N(N-1)/2
    diameter: int
    diameter_endpoints: tuple | None
    pair_count: int
    node_count: int
    exact: bool = True
    disconnected: bool = False
    standard_error: float | None = None

    @property
    def diameter_is_lower_bound(self) -> bool:
        return not self.exact


def distance_summary(
    view: UndirectedView,
    exact_threshold: int = 10_000,
    sample_size: int = 1_000,
    seed: int = 0,
    workers: int = 1,
) -> DistanceSummary:
    """Mean geodesic distance and diameter of the (largest) component.

    Exact all-pairs BFS up to ``exact_threshold`` nodes, otherwise BFS from
    ``sample_size`` sources drawn with ``random.Random(seed)``; in sampled
    mode the diameter is a lower bound.
    """
    if len(view) == 0:
        raise DegenerateGraphError("distance summary of an empty graph")
    view, disconnected = _largest_component(view)
    n = len(view)
    exact = n <= exact_threshold or sample_size >= n
    if exact:
        sources = list(range(n))
    else:
        sources = sorted(random.Random(seed).sample(range(n), sample_size))
    parts = _run_chunks(_eccentricity_chunk, (view.adj, sources), len(sources), workers)
    rows = [r for part in parts for r in part]

    diameter, ends = 0, None
    for s, _, ecc, far in rows:
        if ecc > diameter:
            diameter, ends = ecc, tuple(sorted((s, far)))
    endpoints = (view.nodes[ends[0]], view.nodes[ends[1]]) if ends else None
    paper_denom = n * (n + 1) / 2
    if exact:
        total = sum(r[1] for r in rows) // 2  # every unordered pair seen twice
        conv = total / (n * (n - 1) / 2) if n > 1 else 0.0
        return DistanceSummary(total / paper_denom, conv, diameter, endpoints,
                               n * (n - 1) // 2, n, True, disconnected, None)
    per_source = [r[1] / (n - 1) for r in rows]
    conv = statistics.fmean(per_source)
    scale = (n - 1) / (n + 1)
    se = statistics.stdev(per_source) / math.sqrt(len(per_source)) if len(per_source) > 1 else 0.0
    se *= math.sqrt((n - len(per_source)) / (n - 1))
    return DistanceSummary(conv * scale, conv, diameter, endpoints, len(rows) * (n - 1), n,
                           False, disconnected, se * scale)


# ------------------------------------------------------------------- degrees

@dataclass(frozen=True)
class DegreeHistogram:
    direction: str
    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def directed_degrees(g: EntityCitationGraph) -> tuple[dict, dict]:
    indeg = {v: 0 for v in g.nodes}
    outdeg = {v: 0 for v in g.nodes}
    for u, v in g.edges:
        if u != v:
            outdeg[u] += 1
            indeg[v] += 1
    return indeg, outdeg


def _histogram(direction: str, degrees: dict) -> DegreeHistogram:
    counts: dict[int, int] = {}
    for d in degrees.values():
        counts[d] = counts.get(d, 0) + 1
    return DegreeHistogram(direction, dict(sorted(counts.items())))


def degree_histograms(g: EntityCitationGraph) -> tuple[DegreeHistogram, DegreeHistogram]:
    indeg, outdeg = directed_degrees(g)
    return _histogram("in", indeg), _histogram("out", outdeg)


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    k_min: int
    k_max: int
    r_squared: float
    points: int


def fit_power_law(h: DegreeHistogram, k_min: int = 1) -> PowerLawFit:
    """Least-squares line through (log k, log p(k)); gamma is minus the slope."""
    k_min = max(k_min, 1)
    pts = [(k, c) for k, c in sorted(h.counts.items()) if k >= k_min and c > 0]
    if len(pts) < 3:
        raise DegenerateGraphError(
            f"power-law fit needs >= 3 populated degrees >= {k_min}, got {len(pts)}")
    total = h.total
    x = np.log([k for k, _ in pts])
    y = np.log([c / total for _, c in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-300 else 1.0
    return PowerLawFit(float(-slope) + 0.0, pts[0][0], pts[-1][0], r2, len(pts))


# ---------------------------------------------------------------- clustering

def triangles_and_triples(view: UndirectedView) -> tuple[int, int]:
    nbr = [set(a) for a in view.adj]
    triangles = 0
    for u, a in enumerate(view.adj):
        for v in a:
            if v > u:
                triangles += sum(1 for w in nbr[u] & nbr[v] if w > v)
    triples = sum(len(a) * (len(a) - 1) // 2 for a in view.adj)
    return triangles, triples


def global_clustering_coefficient(view: UndirectedView) -> float:
    triangles, triples = triangles_and_triples(view)
    return 3 * triangles / triples if triples else 0.0


# ----------------------------------------------------------------- centrality

@dataclass(frozen=True)
class CentralityScores:
    measure: str
    scores: dict = field(default_factory=dict)

    def ranked(self) -> list[tuple]:
        """(node, score) pairs, highest score first, ties by node order."""
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def degree_centrality(g: EntityCitationGraph, direction: str = "in") -> CentralityScores:
    if direction not in ("in", "out"):
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    indeg, outdeg = directed_degrees(g)
    chosen = indeg if direction == "in" else outdeg
    return CentralityScores(f"{direction}_degree", {v: float(d) for v, d in chosen.items()})


def _closeness_chunk(adj, sources):
    out = []
    for s in sources:
        out.append(math.fsum(1.0 / d for d in bfs_distances(adj, s) if d > 0))
    return out


def closeness_centrality(view: UndirectedView, workers: int = 1) -> CentralityScores:
    """Sum of reciprocal geodesic distances; unreachable nodes add nothing."""
    parts = _run_chunks(_closeness_chunk, view.adj, len(view), workers)
    vals = [x for p in parts for x in p]
    return CentralityScores("closeness", dict(zip(view.nodes, vals)))


def _betweenness_chunk(adj, sources):
    n = len(adj)
    cb = [0.0] * n
    for s in sources:
        order = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    return cb


def betweenness_centrality(view: UndirectedView, workers: int = 1) -> CentralityScores:
    """Unnormalized Freeman betweenness via Brandes' dependency accumulation."""
    n = len(view)
    parts = _run_chunks(_betweenness_chunk, view.adj, n, workers)
    total = [0.0] * n
    for part in parts:
        for i, x in enumerate(part):
            total[i] += x
    # each unordered pair is counted once from either endpoint
    return CentralityScores("betweenness", {v: total[i] / 2 for i, v in enumerate(view.nodes)})


@dataclass(frozen=True)
class RankedRow:
    rank: int
    node: Hashable
    score: float


def top_k(scores: CentralityScores, k: int, type_filter=None) -> list[RankedRow]:
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = scores.ranked()
    if type_filter is not None:
        rows = [(v, s) for v, s in rows if v.entity_type == type_filter]
    return [RankedRow(i, v, s) for i, (v, s) in enumerate(rows[:k], 1)]
