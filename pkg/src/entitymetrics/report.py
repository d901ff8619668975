"""TSV/JSON writers for frequency tables, centrality tables and summaries."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from . import metrics as nm
from .errors import DegenerateGraphError
from .evaluation import NoveltyRow, RankComparison
from .extract import EntityId, EntityOccurrence, EntityType
from .graph import EntityCitationGraph, density

MEASURES = ("in_degree", "out_degree", "closeness", "betweenness")
TABLE_FILES = {
    "in_degree": "in_degree_top.tsv",
    "out_degree": "out_degree_top.tsv",
    "closeness": "closeness_top.tsv",
    "betweenness": "betweenness_top.tsv",
}
CENTRALITY_HEADER = "rank\tdisease\tdrug\tgene\tall"
TYPE_ORDER = (EntityType.DISEASE, EntityType.DRUG, EntityType.GENE)


def label(node) -> str:
    return node.label if isinstance(node, EntityId) else str(node)


def write_tsv(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join("" if x is None else str(x) for x in row) + "\n")


def write_json(path, obj) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def fmt_score(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# ----------------------------------------------------------- frequency tables

def mention_frequencies(occurrences: Iterable[EntityOccurrence]) -> Counter:
    freq: Counter = Counter()
    for occ in occurrences:
        freq[occ.entity] += occ.mention_count
    return freq


def paper_frequencies(occurrences: Iterable[EntityOccurrence]) -> Counter:
    freq: Counter = Counter()
    for occ in occurrences:
        freq[occ.entity] += 1
    return freq


def write_frequency_table(path, freq: Mapping[EntityId, int], count_header: str) -> None:
    rows = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    write_tsv(path, (count_header, "entity_type", "entity_id", "entity_name"),
              ((n, e.entity_type, e.canonical_id, e.display_name or e.canonical_id) for e, n in rows))


# ---------------------------------------------------------- centrality tables

def centrality_table(scores: nm.CentralityScores, k: int) -> list[list[str]]:
    columns = [nm.top_k(scores, k, t) for t in TYPE_ORDER] + [nm.top_k(scores, k)]
    depth = max((len(c) for c in columns), default=0)
    return [
        [str(i + 1)] + [label(c[i].node) if i < len(c) else "" for c in columns]
        for i in range(depth)
    ]


def write_centrality_table(path, scores: nm.CentralityScores, k: int) -> None:
    write_tsv(path, CENTRALITY_HEADER.split("\t"), centrality_table(scores, k))


def write_histograms(path, h_in: nm.DegreeHistogram, h_out: nm.DegreeHistogram) -> None:
    degrees = sorted(set(h_in.counts) | set(h_out.counts))
    write_tsv(path, ("degree", "in_count", "out_count"),
              ((k, h_in.counts.get(k, 0), h_out.counts.get(k, 0)) for k in degrees))


# -------------------------------------------------------------------- summary

@dataclass
class Analysis:
    summary: dict
    centralities: dict[str, nm.CentralityScores]
    histograms: tuple[nm.DegreeHistogram, nm.DegreeHistogram]


def analyze(
    g: EntityCitationGraph,
    exact_threshold: int = 10_000,
    sample_size: int = 1_000,
    seed: int = 0,
    workers: int = 1,
    k_min: int = 1,
) -> Analysis:
    """Run every metric; a metric that cannot be computed on this graph is
    reported under ``metric_errors`` instead of aborting the others."""
    errors: dict[str, str] = {}
    s: dict = {
        "nodes": len(g.nodes),
        "edges": len(g.edges),
        "non_loop_edges": len(g.non_loop_edges()),
        "loops": g.loop_count,
        "total_weight": g.total_weight,
    }

    def attempt(name, fn):
        try:
            return fn()
        except DegenerateGraphError as exc:
            errors[name] = str(exc)
            return None

    s["density"] = attempt("density", lambda: density(g))
    s["density_with_loops"] = attempt("density", lambda: density(g, include_loops=True))

    view = nm.undirected_view(g)
    comps = nm.weak_components(view)
    s["components"] = {"count": len(comps.sizes), "largest": comps.sizes[0] if comps.sizes else 0}
    bic = nm.bicomponents(view)
    s["bicomponents"] = {
        "count": len(bic.components),
        "largest": len(bic.components[0]) if bic.components else 0,
        "articulation_points": len(bic.articulation_points),
    }
    cores = nm.k_core_decomposition(view)
    s["max_core"] = {"k": cores.max_k, "size": len(cores.max_core_members)}

    dist = attempt("distance", lambda: nm.distance_summary(
        view, exact_threshold, sample_size, seed, workers))
    s["distance"] = None if dist is None else {
        "mean_geodesic": dist.mean_geodesic,
        "mean_geodesic_conventional": dist.mean_geodesic_conventional,
        "diameter": dist.diameter,
        "diameter_endpoints": [label(x) for x in dist.diameter_endpoints] if dist.diameter_endpoints else None,
        "diameter_is_lower_bound": dist.diameter_is_lower_bound,
        "mode": "exact" if dist.exact else "sampled",
        "standard_error": dist.standard_error,
        "component_nodes": dist.node_count,
        "disconnected_input": dist.disconnected,
    }
    s["clustering_coefficient"] = nm.global_clustering_coefficient(view)

    h_in, h_out = nm.degree_histograms(g)
    for name, h in (("in", h_in), ("out", h_out)):
        fit = attempt(f"power_law_{name}", lambda h=h: nm.fit_power_law(h, k_min))
        s[f"power_law_{name}"] = None if fit is None else {
            "gamma": fit.gamma, "r_squared": fit.r_squared,
            "k_min": fit.k_min, "k_max": fit.k_max, "points": fit.points,
        }

    cents = {
        "in_degree": nm.degree_centrality(g, "in"),
        "out_degree": nm.degree_centrality(g, "out"),
        "closeness": nm.closeness_centrality(view, workers),
        "betweenness": nm.betweenness_centrality(view, workers),
    }
    s["metric_errors"] = errors
    return Analysis(s, cents, (h_in, h_out))


def write_metric_outputs(out_dir, analysis: Analysis, k: int) -> list[str]:
    out_dir = Path(out_dir)
    written = []
    for measure in MEASURES:
        write_centrality_table(out_dir / TABLE_FILES[measure], analysis.centralities[measure], k)
        written.append(TABLE_FILES[measure])
    write_histograms(out_dir / "degree_histogram.tsv", *analysis.histograms)
    write_json(out_dir / "summary.json", analysis.summary)
    return written + ["degree_histogram.tsv", "summary.json"]


# ----------------------------------------------------------------- comparison

def write_comparisons(path, comparisons: Iterable[RankComparison], type_filters: Iterable) -> None:
    rows = []
    for comp, tf in zip(comparisons, type_filters):
        for r in comp.rows:
            rows.append((comp.measure, tf or "ALL", r.our_rank, r.entity.entity_type, r.entity.canonical_id,
                         r.entity.display_name or r.entity.canonical_id, fmt_score(r.score),
                         r.curated_rank, r.bucket, r.relation,
                         None if r.inference_score is None else repr(r.inference_score)))
    write_tsv(path, ("measure", "ranking", "our_rank", "entity_type", "entity_id", "entity_name",
                     "score", "curated_rank", "bucket", "relation", "inference_score"), rows)


def write_novelty(path, rows: Iterable[NoveltyRow]) -> None:
    write_tsv(path, ("best_rank", "entity_type", "entity_id", "entity_name", "measures"),
              ((r.best_rank, r.entity.entity_type, r.entity.canonical_id,
                r.entity.display_name or r.entity.canonical_id, ",".join(r.measures)) for r in rows))


def ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def bucket_lines(comp: RankComparison) -> list[str]:
    """Human-readable bucket report, e.g. ``top10: Obesity (7th)``."""
    out = []
    for bucket in ("top10", "11-100", "101+"):
        hits = sorted((r for r in comp.rows if r.bucket == bucket), key=lambda r: r.curated_rank)
        if hits:
            names = ", ".join(f"{r.entity.display_name or r.entity.canonical_id} ({ordinal(r.curated_rank)})"
                              for r in hits)
            out.append(f"{bucket}: {names}")
    return out
