"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPT <n> PASS|FAIL`` line (visible without -s).
"""

import datetime as dt
import random
import time

import pytest

import oracles
from conftest import GRAPH4_EDGES, TOY
from entitymetrics.cli import main
from entitymetrics.corpus import Corpus, PaperRecord
from entitymetrics.evaluation import CuratedDb, CuratedInteraction, bucket_for, load_curated_db, match_rankings
from entitymetrics.extract import EntityDictionary, EntityId, EntityType, chunk_text, parse_dictionary_line
from entitymetrics.graph import build_graph, export_edge_list
from entitymetrics.metrics import (
    CentralityScores, DegreeHistogram, UndirectedView, betweenness_centrality, bicomponents,
    closeness_centrality, distance_summary, fit_power_law, global_clustering_coefficient,
    k_core_decomposition,
)
from entitymetrics.query import And, DateRange, Or, Term, evaluate_query, format_query, parse_query


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPT {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return report


def test_criterion_1_metric_oracles(verdict):
    t0 = time.perf_counter()
    failures = []
    count = 0
    for seed in range(210):
        rng = random.Random(seed)
        p = (0.1, 0.3, 0.6)[seed % 3]
        nodes, edges = oracles.random_graph(rng, rng.randint(1, 40), p)
        v = UndirectedView.from_edges(nodes, edges)
        bc = betweenness_centrality(v).scores
        want_bc = oracles.betweenness(nodes, edges)
        if any(abs(bc[x] - float(want_bc[x])) > 1e-9 for x in nodes):
            failures.append((seed, "betweenness"))
        if closeness_centrality(v).scores != oracles.closeness(nodes, edges):
            failures.append((seed, "closeness"))
        if global_clustering_coefficient(v) != oracles.clustering(nodes, edges):
            failures.append((seed, "clustering"))
        core = k_core_decomposition(v).core
        for k in range(max(core.values(), default=0) + 2):
            if {x for x in nodes if core[x] >= k} != oracles.k_core_set(nodes, edges, k):
                failures.append((seed, f"core {k}"))
        bic = bicomponents(v)
        if bic.articulation_points != oracles.articulation_points(nodes, edges):
            failures.append((seed, "articulation"))
        for a, b in edges:
            if sum(1 for c in bic.components if a in c and b in c) != 1:
                failures.append((seed, "bi-component edge cover"))
        for comp in bic.components:
            # removing any one member leaves the rest connected
            sub = [e for e in edges if e[0] in comp and e[1] in comp]
            for x in comp:
                rest = [y for y in comp if y != x]
                if rest and oracles.component_count(rest, [e for e in sub if x not in e]) != 1:
                    failures.append((seed, "bi-component not 2-connected"))
        count += 1
    elapsed = time.perf_counter() - t0
    verdict(1, not failures and count >= 200 and elapsed < 60,
            f"{count} random graphs, {len(failures)} mismatches {failures[:3]}, {elapsed:.1f}s")


def test_criterion_2_pinned_toy_values(verdict):
    v = UndirectedView.from_edges("ABCD", GRAPH4_EDGES)
    d = distance_summary(v)
    cores = k_core_decomposition(v)
    got = {
        "C": global_clustering_coefficient(v),
        "diameter": d.diameter,
        "L": d.mean_geodesic,
        "C_B(C)": betweenness_centrality(v).scores["C"],
        "C_c(C)": closeness_centrality(v).scores["C"],
        "max_core": (cores.max_k, cores.max_core_members),
    }
    want = {"C": 0.6, "diameter": 2, "L": 0.8, "C_B(C)": 2.0, "C_c(C)": 3.0,
            "max_core": (2, frozenset("ABC"))}
    verdict(2, got == want, f"{got}")


def test_criterion_3_power_law_recovery(verdict):
    results = {}
    for gamma in (1.0, 2.0, 2.5, 3.0):
        h = DegreeHistogram("in", {k: round(1e9 * k ** -gamma) for k in range(1, 101)})
        fit = fit_power_law(h)
        results[gamma] = (round(fit.gamma, 6), round(fit.r_squared, 6))
    ok = all(abs(g_hat - g) <= 0.05 and r2 > 0.99 for g, (g_hat, r2) in results.items())
    verdict(3, ok, f"gamma -> (fit, R^2): {results}")


def _random_corpus(rng):
    ents = [EntityId(rng.choice(list(EntityType)), f"E{i}") for i in range(rng.randint(1, 8))]
    ids = [f"P{i}" for i in range(rng.randint(1, 15))]
    pool = ids + ["X1", "X2"]
    papers = [PaperRecord(pid, "", "", dt.date(2000, 1, 1), tuple(rng.sample(pool, rng.randint(0, min(5, len(pool))))))
              for pid in ids]
    occ = {pid: set(rng.sample(ents, rng.randint(0, min(3, len(ents))))) for pid in ids}
    citing = rng.sample(ids, rng.randint(0, len(ids)))
    return papers, occ, citing


def test_criterion_4_builder_conservation(verdict, tmp_path):
    bad = []
    for seed in range(100):
        rng = random.Random(seed)
        papers, occ, citing = _random_corpus(rng)
        g = build_graph(Corpus.from_records(papers), citing, occ)
        refs = {p.paper_id: p.references for p in papers}
        if g.total_weight != oracles.pairings(refs, occ, citing, set(refs)):
            bad.append((seed, "weight"))
        shuffled = [PaperRecord(p.paper_id, "", "", p.pub_date, tuple(rng.sample(p.references, len(p.references))))
                    for p in rng.sample(papers, len(papers))]
        g2 = build_graph(Corpus.from_records(shuffled), rng.sample(citing, len(citing)), occ)
        export_edge_list(g, tmp_path / "a.tsv")
        export_edge_list(g2, tmp_path / "b.tsv")
        if (tmp_path / "a.tsv").read_bytes() != (tmp_path / "b.tsv").read_bytes():
            bad.append((seed, "permutation"))
    verdict(4, not bad, f"100 random corpora, {len(bad)} failures {bad[:3]}")


def _or_leaves(node):
    if isinstance(node, Or):
        return _or_leaves(node.left) + _or_leaves(node.right)
    return [node]


def test_criterion_5_query_parser(verdict):
    text = (TOY / "metformin_query.txt").read_text(encoding="utf-8")
    ast = parse_query(text)
    terms = _or_leaves(ast.left) if isinstance(ast, And) else []
    shape_ok = (isinstance(ast, And) and ast.right == DateRange(dt.date(1965, 1, 1), dt.date(2011, 12, 31))
                and all(isinstance(t, Term) for t in terms))
    # counted from the query string itself
    count_ok = len(terms) == 35
    roundtrip_ok = parse_query(format_query(ast)) == ast

    semantic_bad = 0
    for seed in range(500):
        rng = random.Random(seed)
        a, b = oracles.random_query(rng), oracles.random_query(rng)
        if parse_query(format_query(a)) != a:
            semantic_bad += 1
        p = oracles.random_paper(rng)
        if evaluate_query(Or(a, b), p) != (evaluate_query(a, p) or evaluate_query(b, p)):
            semantic_bad += 1
        if evaluate_query(And(a, b), p) != (evaluate_query(a, p) and evaluate_query(b, p)):
            semantic_bad += 1
    verdict(5, shape_ok and count_ok and roundtrip_ok and semantic_bad == 0,
            f"{len(terms)} OR-joined terms AND DateRange(1965-01-01, 2011-12-31): {shape_ok}, "
            f"round trip: {roundtrip_ok}, 500 random queries: {semantic_bad} violations")


WORDS = ["actin", "alpha", "1", "insulin", "receptor", "tnf", "a", "ob", "obesity", "type", "2",
         "x-ray", "é", "ß", "acta1"]


def test_criterion_6_extraction(verdict):
    bad = 0
    for seed in range(1000):
        rng = random.Random(seed)
        entries = []
        for i in range(rng.randint(1, 8)):
            surface = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
            entries.append((surface, EntityId(rng.choice(list(EntityType)), f"ID{i}")))
        d = EntityDictionary.from_entries(entries)
        text = oracles.random_text(rng, WORDS, rng.randint(0, 25))
        if [(s.start, s.end, e) for s, e in chunk_text(d, text)] != oracles.naive_chunks(d.surface_map, text):
            bad += 1
    lines = {}
    for line in ("ACTA1-->GENE__P68133", "ACSS1-->GENE_Q9NUB1"):
        surface, e = parse_dictionary_line(line)
        lines[line] = (surface, e.entity_type.value, e.canonical_id)
    lines_ok = list(lines.values()) == [("ACTA1", "GENE", "P68133"), ("ACSS1", "GENE", "Q9NUB1")]
    verdict(6, bad == 0 and lines_ok, f"1000 random pairs, {bad} disagreements; dictionary lines {lines}")


TOY_EDGES = (
    "DISEASE\tD009765\tDISEASE\tD009765\t1\n"
    "DISEASE\tD009765\tGENE\tP01375\t1\n"
    "DRUG\tDB00331\tDISEASE\tD009765\t1\n"
    "DRUG\tDB00331\tGENE\tP01375\t1\n"
)
HEADERS = {
    "citing_entity_frequency.tsv": "frequency\tentity_type\tentity_id\tentity_name",
    "cited_entity_frequency.tsv": "num_papers\tentity_type\tentity_id\tentity_name",
    "in_degree_top.tsv": "rank\tdisease\tdrug\tgene\tall",
    "out_degree_top.tsv": "rank\tdisease\tdrug\tgene\tall",
    "closeness_top.tsv": "rank\tdisease\tdrug\tgene\tall",
    "betweenness_top.tsv": "rank\tdisease\tdrug\tgene\tall",
    "degree_histogram.tsv": "degree\tin_count\tout_count",
}


def test_criterion_7_end_to_end(verdict, tmp_path, capsys):
    def run(out):
        return main(["pipeline", "--corpus", str(TOY / "corpus.jsonl"), "--dictionary", str(TOY / "dictionary.txt"),
                     "--query-file", str(TOY / "query.txt"), "--out", str(out)])

    t0 = time.perf_counter()
    codes = (run(tmp_path / "a"), run(tmp_path / "b"))
    elapsed = time.perf_counter() - t0
    a, b = tmp_path / "a", tmp_path / "b"
    edges_ok = (a / "edges.tsv").read_text() == TOY_EDGES
    headers_ok = all((a / n).read_text().splitlines()[0] == h for n, h in HEADERS.items())
    names = sorted(p.name for p in a.iterdir())
    identical = names == sorted(p.name for p in b.iterdir()) and all(
        (a / n).read_bytes() == (b / n).read_bytes() for n in names if n != "manifest.json")
    # manifests differ only by out_dir
    ma = (a / "manifest.json").read_text().replace(str(a), "OUT")
    mb = (b / "manifest.json").read_text().replace(str(b), "OUT")
    ok = codes == (0, 0) and edges_ok and headers_ok and identical and ma == mb and elapsed < 5
    verdict(7, ok, f"exit {codes}, edges {edges_ok}, headers {headers_ok}, "
                   f"byte-identical {identical and ma == mb}, {elapsed:.2f}s")


def test_criterion_8_buckets(verdict):
    anchor = EntityId(EntityType.DRUG, "DB00331")
    toy = load_curated_db(TOY / "curated.tsv")
    rng = random.Random(8)
    ents = [EntityId(EntityType.DISEASE, f"D{i}") for i in range(40)]
    rows = [CuratedInteraction(anchor, e, curated_rank=r)
            for e, r in zip(ents, rng.sample(range(1, 300), 30))]
    rows += list(toy.interactions.values())
    db = CuratedDb.from_interactions(rows)
    s = CentralityScores("betweenness", {e: float(rng.randint(0, 20)) for e in ents}
                         | {x: 5.0 for _, x in toy.interactions})
    n = len(s.scores)
    bucket_bad = 0
    counts = []
    for k in range(1, n + 1):
        comp = match_rankings(s, db, anchor, k)
        counts.append(comp.match_count)
        for r in comp.rows:
            hit = db.get(anchor, r.entity)
            want = "unmatched" if hit is None else bucket_for(hit.curated_rank)
            rank = hit.curated_rank if hit else None
            if r.bucket != want or (rank is not None and r.bucket != (
                    "top10" if rank <= 10 else "11-100" if rank <= 100 else "101+")):
                bucket_bad += 1
    monotone = all(x <= y for x, y in zip(counts, counts[1:]))
    verdict(8, bucket_bad == 0 and monotone,
            f"k = 1..{n}: {bucket_bad} bucket errors, match counts monotone {monotone} (final {counts[-1]})")
