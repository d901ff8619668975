"""Projection of paper citations onto a weighted directed entity graph.

If paper A cites paper B, every entity found in A cites every entity found in
B. Edge weights count these pairings across all citation pairs; an entity
citing itself is kept as a loop.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping

from .corpus import Corpus
from .errors import CorpusError, DegenerateGraphError, GraphFormatError
from .extract import EntityId, parse_entity_type

EdgeAccumulator = Counter


@dataclass
class EntityCitationGraph:
    nodes: set = field(default_factory=set)
    edges: dict[tuple[Hashable, Hashable], int] = field(default_factory=dict)
    directed: bool = True

    @classmethod
    def from_accumulator(cls, acc: Mapping) -> "EntityCitationGraph":
        edges = {pair: w for pair, w in sorted(acc.items()) if w > 0}
        nodes = {u for u, _ in edges} | {v for _, v in edges}
        return cls(nodes, edges)

    @property
    def loop_count(self) -> int:
        return sum(1 for u, v in self.edges if u == v)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    def non_loop_edges(self) -> list[tuple]:
        return [(u, v) for u, v in self.edges if u != v]

    def sorted_nodes(self) -> list:
        return sorted(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, EntityCitationGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges


def add_paper_citation(acc: EdgeAccumulator, citing_entities: Iterable, cited_entities: Iterable) -> EdgeAccumulator:
    cited = set(cited_entities)
    for a in set(citing_entities):
        for b in cited:
            acc[a, b] += 1
    return acc


def build_graph(
    corpus: Corpus,
    citing_ids: Iterable[str],
    occurrences: Mapping[str, Iterable[EntityId]],
) -> EntityCitationGraph:
    """Fold every (citing paper, resolved reference) pair into one graph.

    ``occurrences`` maps paper id to the entities found in that paper; an
    entity's multiplicity within one paper is ignored.
    """
    acc = EdgeAccumulator()
    for pid in sorted(set(citing_ids)):
        if pid not in corpus:
            raise CorpusError(f"unknown citing paper id {pid!r}")
        citing = set(occurrences.get(pid, ()))
        if not citing:
            continue
        for ref in corpus.resolved_ids(pid):
            add_paper_citation(acc, citing, occurrences.get(ref, ()))
    return EntityCitationGraph.from_accumulator(acc)


def merge_accumulators(parts: Iterable[EdgeAccumulator]) -> EdgeAccumulator:
    total = EdgeAccumulator()
    for part in parts:
        total.update(part)
    return total


def density(g: EntityCitationGraph, include_loops: bool = False) -> float:
    n = len(g.nodes)
    if n < 2:
        raise DegenerateGraphError(f"density needs at least 2 nodes, graph has {n}")
    m = len(g.edges) if include_loops else len(g.non_loop_edges())
    return m / (n * (n - 1))


def _node_fields(e: EntityId) -> str:
    return f"{e.entity_type.value}\t{e.canonical_id}"


def export_edge_list(g: EntityCitationGraph, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for (u, v) in sorted(g.edges):
            fh.write(f"{_node_fields(u)}\t{_node_fields(v)}\t{g.edges[u, v]}\n")


def read_edge_list(path, names: Mapping[tuple[str, str], EntityId] | None = None) -> EntityCitationGraph:
    """Load an edge list written by :func:`export_edge_list`.

    ``names`` (e.g. ``EntityDictionary.entities``) restores display names.
    """
    names = names or {}
    acc = EdgeAccumulator()
    path = Path(path)
    if not path.is_file():
        raise GraphFormatError(f"edge list not found: {path}")

    def node(etype: str, cid: str) -> EntityId:
        t = parse_entity_type(etype)
        return names.get((t.value, cid)) or EntityId(t, cid)

    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            try:
                if len(parts) != 5:
                    raise ValueError(f"expected 5 fields, got {len(parts)}")
                weight = int(parts[4])
                if weight < 1:
                    raise ValueError("weight must be >= 1")
                u, v = node(parts[0], parts[1]), node(parts[2], parts[3])
            except Exception as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if (u, v) in acc:
                raise GraphFormatError(f"{path}:{lineno}: duplicate edge")
            acc[u, v] = weight
    return EntityCitationGraph.from_accumulator(acc)


def export_graphml(g: EntityCitationGraph, path) -> None:
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    for key, target, name, kind in (
        ("type", "node", "entity_type", "string"),
        ("cid", "node", "canonical_id", "string"),
        ("name", "node", "display_name", "string"),
        ("weight", "edge", "weight", "int"),
    ):
        ET.SubElement(root, "key", {"id": key, "for": target, "attr.name": name, "attr.type": kind})
    graph = ET.SubElement(root, "graph", id="G", edgedefault="directed")
    ids = {}
    for i, e in enumerate(g.sorted_nodes()):
        ids[e] = f"n{i}"
        el = ET.SubElement(graph, "node", id=ids[e])
        for key, val in (("type", e.entity_type.value), ("cid", e.canonical_id),
                         ("name", e.display_name or e.canonical_id)):
            ET.SubElement(el, "data", key=key).text = val
    for (u, v) in sorted(g.edges):
        el = ET.SubElement(graph, "edge", source=ids[u], target=ids[v])
        ET.SubElement(el, "data", key="weight").text = str(g.edges[u, v])
    ET.indent(root)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)

