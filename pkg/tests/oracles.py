"""Brute-force reference implementations and random input generators.

The reference implementations share no code with the library.
"""

import datetime as dt
import itertools
import math
import random
from fractions import Fraction

from entitymetrics.corpus import PaperRecord
from entitymetrics.query import And, DateRange, Or, Term

INF = float("inf")


def random_graph(rng, n, p):
    nodes = [f"v{i:02d}" for i in range(n)]
    edges = [(a, b) for a, b in itertools.combinations(nodes, 2) if rng.random() < p]
    return nodes, edges


def adjacency(nodes, edges):
    adj = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    return adj


def floyd_warshall(nodes, edges):
    d = {(a, b): (0 if a == b else INF) for a in nodes for b in nodes}
    for a, b in edges:
        if a != b:
            d[a, b] = d[b, a] = 1
    for k in nodes:
        for i in nodes:
            dik = d[i, k]
            if dik == INF:
                continue
            for j in nodes:
                if dik + d[k, j] < d[i, j]:
                    d[i, j] = dik + d[k, j]
    return d


def all_geodesics(adj, s, t, dist):
    """Every shortest s-t path, enumerated explicitly by DFS."""
    target = dist[s, t]
    paths = []

    def walk(path):
        v = path[-1]
        if v == t:
            paths.append(tuple(path))
            return
        for w in sorted(adj[v]):
            if dist[s, w] == len(path) and dist[w, t] == target - len(path):
                walk(path + [w])

    walk([s])
    return paths


def betweenness(nodes, edges):
    adj = adjacency(nodes, edges)
    dist = floyd_warshall(nodes, edges)
    cb = {v: Fraction(0) for v in nodes}
    for s, t in itertools.combinations(nodes, 2):
        if dist[s, t] == INF:
            continue
        paths = all_geodesics(adj, s, t, dist)
        for v in nodes:
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p)
            if through:
                cb[v] += Fraction(through, len(paths))
    return cb


def closeness(nodes, edges):
    dist = floyd_warshall(nodes, edges)
    return {
        v: math.fsum(1.0 / dist[v, u] for u in nodes if u != v and dist[v, u] != INF)
        for v in nodes
    }


def clustering(nodes, edges):
    adj = adjacency(nodes, edges)
    triangles = sum(
        1 for a, b, c in itertools.combinations(nodes, 3)
        if b in adj[a] and c in adj[a] and c in adj[b]
    )
    triples = sum(1 for v in nodes for a, b in itertools.combinations(sorted(adj[v]), 2))
    return 3 * triangles / triples if triples else 0.0


def k_core_set(nodes, edges, k):
    """Repeatedly delete nodes of degree < k until none remain."""
    alive = set(nodes)
    adj = adjacency(nodes, edges)
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            if len(adj[v] & alive) < k:
                alive.discard(v)
                changed = True
    return alive


def component_count(nodes, edges):
    nodes = list(nodes)
    parent = {v: v for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in nodes})


def articulation_points(nodes, edges):
    base = component_count(nodes, edges)
    out = set()
    for v in nodes:
        rest = [u for u in nodes if u != v]
        sub = [(a, b) for a, b in edges if v not in (a, b)]
        if component_count(rest, sub) > base - (1 if not any(v in e for e in edges) else 0):
            out.add(v)
    return out


def pairings(corpus_refs, entity_sets, citing_ids, resolvable):
    """Sum of |citing entities| x |cited entities| over citation pairs."""
    total = 0
    for pid in citing_ids:
        for ref in set(corpus_refs[pid]):
            if ref in resolvable:
                total += len(entity_sets.get(pid, ())) * len(entity_sets.get(ref, ()))
    return total


def naive_chunks(surface_map, text):
    """One str.find sweep per pattern, then greedy longest-wins selection.

    Returns (start, end, entity) in UTF-8 byte offsets of ``text``.
    """
    # normalization with per-character source offsets
    norm, src_start, src_end = [], [], []
    byte = 0
    gap = False
    for ch in text:
        w = len(ch.encode())
        if ch.isspace():
            gap = len(norm) > 0
        else:
            if gap:
                norm.append(" ")
                src_start.append(byte)
                src_end.append(byte)
                gap = False
            for low in ch.lower():
                norm.append(low)
                src_start.append(byte)
                src_end.append(byte + w)
        byte += w
    s = "".join(norm)
    found = []
    for pat, ent in surface_map.items():
        i = s.find(pat)
        while i >= 0:
            j = i + len(pat)
            left_ok = i == 0 or not s[i - 1].isalnum()
            right_ok = j == len(s) or not s[j].isalnum()
            if left_ok and right_ok:
                found.append((i, -len(pat), ent))
            i = s.find(pat, i + 1)
    found.sort(key=lambda x: (x[0], x[1]))
    out = []
    pos = 0
    for i, neg_len, ent in found:
        if i < pos:
            continue
        j = i - neg_len
        out.append((src_start[i], src_end[j - 1], ent))
        pos = j
    return out


def random_text(rng: random.Random, words, length):
    seps = [" ", " ", " ", ", ", "  ", "\n", "-", ". "]
    parts = []
    for _ in range(length):
        w = rng.choice(words)
        if rng.random() < 0.3:
            w = w.upper() if rng.random() < 0.5 else w.capitalize()
        parts.append(w)
        parts.append(rng.choice(seps))
    return "".join(parts)


# ------------------------------------------------------------- query inputs

VOCAB = ["metformin", "obesity", "insulin resistance", "type 2", "ob", "diabetes mellitus", "tnf"]


def random_query(rng: random.Random, depth=3):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.2:
            a = dt.date(rng.randint(1960, 2015), rng.randint(1, 12), rng.randint(1, 28))
            b = a + dt.timedelta(days=rng.randint(0, 8000))
            return DateRange(a, b)
        return Term(rng.choice(VOCAB), rng.choice(["ti", "ab"]))
    node = rng.choice([And, Or])
    return node(random_query(rng, depth - 1), random_query(rng, depth - 1))


def random_paper(rng: random.Random, pid="P"):
    def text():
        return " ".join(rng.choice(VOCAB + ["obesity.", "Metformin,", "weight", "(type 2)"])
                        for _ in range(rng.randint(0, 6)))

    date = dt.date(rng.randint(1960, 2020), rng.randint(1, 12), rng.randint(1, 28))
    return PaperRecord(pid, text(), text(), date, ())
