"""Batch command line: filter, extract, build, metrics, compare, report, pipeline.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .corpus import Corpus, load_corpus
from .errors import ConfigError, DataError
from .evaluation import load_curated_db, match_rankings, novelty_report
from .extract import (
    EntityDictionary, EntityId, extract_entities, load_dictionary, parse_entity_type, write_occurrences,
)
from .graph import build_graph, export_edge_list, export_graphml, read_edge_list
from .query import filter_corpus, format_query, parse_query
from . import report

log = logging.getLogger("entitymetrics")

DECISIONS = {
    "text_normalization": "lowercase, whitespace runs collapsed, letters/digits are word characters",
    "entity_matching": "exact dictionary match, leftmost-longest on word boundaries, case-insensitive",
    "surface_collisions": "first entry in dictionary file wins",
    "query_phrase_matching": "contiguous word-token sequence within the tagged field, case-insensitive",
    "entity_multiplicity": "presence per paper; each citation pair adds 1 per entity pairing",
    "loop_policy": "loops stored and counted; excluded from density numerator, degrees and undirected metrics",
    "undirected_metrics": "components, bi-components, k-core, distances, clustering, closeness, betweenness",
    "closeness_variant": "harmonic: sum of reciprocal geodesic distances, unreachable contributes 0",
    "betweenness_variant": "Freeman, unnormalized, undirected, unweighted",
    "mean_geodesic": "sum over i>=j of d_ij divided by N(N+1)/2; conventional N(N-1)/2 value also reported",
    "power_law_fit": "least squares on log k vs log p(k) over populated bins with k >= k_min",
    "ranking_ties": "(entity_type, canonical_id) ascending",
    "evaluation_matching": "(entity_type, canonical_id) interaction lookup with the anchor; anchor excluded",
}


@dataclass
class RunConfig:
    corpus: str | None = None
    dictionary: str | None = None
    query: str | None = None
    query_file: str | None = None
    curated_db: str | None = None
    anchor: str | None = None
    graph: str | None = None
    out_dir: str | None = None
    exact_threshold: int = 10_000
    sample_size: int = 1_000
    seed: int = 0
    k: int = 20
    k_min: int = 1
    workers: int = 1
    strict: bool = True
    graphml: bool = False

    def query_text(self) -> str:
        if self.query is not None:
            return self.query
        if self.query_file is not None:
            p = Path(self.query_file)
            if not p.is_file():
                raise ConfigError(f"query file not found: {p}")
            return p.read_text(encoding="utf-8")
        raise ConfigError("one of --query or --query-file is required")

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) in (None, ""):
                raise ConfigError(f"missing required setting '{name}'")
        for name in ("corpus", "dictionary", "curated_db", "graph", "query_file"):
            value = getattr(self, name)
            if name in names and value is not None and not Path(value).is_file():
                raise ConfigError(f"{name} path not found: {value}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.sample_size < 1 or self.exact_threshold < 0:
            raise ConfigError("sample_size must be >= 1 and exact_threshold >= 0")

    def anchor_entity(self, dictionary: EntityDictionary | None) -> EntityId:
        etype, sep, cid = (self.anchor or "").partition(":")
        if not sep or not cid:
            raise ConfigError(f"anchor must look like TYPE:ID, got {self.anchor!r}")
        try:
            t = parse_entity_type(etype)
        except DataError:
            raise ConfigError(f"unknown anchor entity type {etype!r}") from None
        return dictionary.lookup(t, cid) if dictionary is not None else EntityId(t, cid)


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(name: str, value):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    if value is None:
        return None
    try:
        if kind == "int":
            return int(value)
        if kind == "bool":
            return value if isinstance(value, bool) else _BOOL[str(value).strip().lower()]
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return str(value)


def read_config_file(path) -> dict:
    """Key-value settings: JSON (a flat object, or a run manifest) or
    ``key = value`` lines with ``#`` comments."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: {exc}") from None
        obj = obj.get("config", obj)
        return {k.replace("-", "_"): _coerce(k.replace("-", "_"), v) for k, v in obj.items()}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{p}:{lineno}: expected key = value")
        key = key.strip().replace("-", "_")
        out[key] = _coerce(key, value.strip())
    return out


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            setattr(cfg, key, value)
    return cfg


# ---------------------------------------------------------------- stages

class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, (StageError, ConfigError)):
            raise StageError(self.name, exc) from exc
        return False


def _load_query(cfg: RunConfig):
    return parse_query(cfg.query_text())


def _occurrence_map(dictionary, corpus: Corpus, paper_ids):
    occs = {pid: extract_entities(dictionary, corpus[pid]) for pid in sorted(paper_ids)}
    return occs, {pid: {o.entity for o in occ} for pid, occ in occs.items()}


def _compare(cfg: RunConfig, analysis: report.Analysis, dictionary, out_dir: Path) -> list[str]:
    names = dictionary.entities if dictionary is not None else None
    db = load_curated_db(cfg.curated_db, names)
    anchor = cfg.anchor_entity(dictionary)
    comparisons, filters = [], []
    for measure in report.MEASURES:
        for tf in report.TYPE_ORDER:
            comparisons.append(match_rankings(analysis.centralities[measure], db, anchor, cfg.k, tf))
            filters.append(tf.value)
    report.write_comparisons(out_dir / "comparison.tsv", comparisons, filters)
    report.write_novelty(out_dir / "novelty.tsv", novelty_report(comparisons))
    return ["comparison.tsv", "novelty.tsv"]


def _analyze(cfg: RunConfig, g) -> report.Analysis:
    return report.analyze(g, cfg.exact_threshold, cfg.sample_size, cfg.seed, cfg.workers, cfg.k_min)


def _warn_metric_errors(analysis: report.Analysis, warnings: list[str]) -> None:
    for name, msg in analysis.summary["metric_errors"].items():
        warnings.append(f"{name}: {msg}")


def _manifest(cfg: RunConfig, outputs, extra: dict) -> dict:
    conf = asdict(cfg)
    for key in ("corpus", "dictionary", "query_file", "curated_db", "graph", "out_dir"):
        if conf[key] is not None:
            conf[key] = str(Path(conf[key]).resolve())
    return {
        "tool": "entitymetrics",
        "version": __version__,
        "config": conf,
        "decisions": DECISIONS,
        "outputs": sorted(outputs),
        **extra,
    }


class _StagingDir:
    """Write outputs to a scratch directory and move them into place only on
    success, so a failed run leaves no partial outputs behind."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)

    def __enter__(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.out_dir))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc is None:
                for f in sorted(self.tmp.iterdir()):
                    f.replace(self.out_dir / f.name)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def run_pipeline(cfg: RunConfig) -> dict:
    cfg.require("corpus", "dictionary", "out_dir")
    query_text = cfg.query_text()
    if cfg.curated_db is not None:
        cfg.require("curated_db", "anchor")
        cfg.anchor_entity(None)
    warnings: list[str] = []

    with _StagingDir(cfg.out_dir) as tmp:
        with _Stage("filter"):
            corpus = load_corpus(cfg.corpus, strict=cfg.strict)
            ast = parse_query(query_text)
            citing = filter_corpus(corpus, ast)
            if not citing:
                warnings.append("query matched no papers; graph is empty")
        with _Stage("extract"):
            dictionary = load_dictionary(cfg.dictionary)
            cited = sorted({r for pid in citing for r in corpus.resolved_ids(pid)})
            occ_citing, sets_citing = _occurrence_map(dictionary, corpus, citing)
            occ_cited, sets_cited = _occurrence_map(dictionary, corpus, cited)
            report.write_frequency_table(
                tmp / "citing_entity_frequency.tsv",
                report.mention_frequencies(o for occ in occ_citing.values() for o in occ), "frequency")
            report.write_frequency_table(
                tmp / "cited_entity_frequency.tsv",
                report.paper_frequencies(o for occ in occ_cited.values() for o in occ), "num_papers")
        with _Stage("build"):
            g = build_graph(corpus, citing, {**sets_cited, **sets_citing})
            export_edge_list(g, tmp / "edges.tsv")
            outputs = ["edges.tsv", "citing_entity_frequency.tsv", "cited_entity_frequency.tsv"]
            if cfg.graphml:
                export_graphml(g, tmp / "graph.graphml")
                outputs.append("graph.graphml")
        with _Stage("metrics"):
            analysis = _analyze(cfg, g)
            _warn_metric_errors(analysis, warnings)
            outputs += report.write_metric_outputs(tmp, analysis, cfg.k)
        if cfg.curated_db is not None:
            with _Stage("compare"):
                outputs += _compare(cfg, analysis, dictionary, tmp)
        manifest = _manifest(cfg, outputs, {
            "query_normalized": format_query(ast),
            "counts": {
                "papers": len(corpus),
                "skipped_lines": corpus.skipped,
                "citing_papers": len(citing),
                "cited_papers": len(cited),
                "dictionary_surface_forms": len(dictionary),
                "dictionary_collisions": len(dictionary.collisions),
            },
            "warnings": warnings,
        })
        report.write_json(tmp / "manifest.json", manifest)
    return manifest


def run_metrics(cfg: RunConfig) -> dict:
    cfg.require("graph", "out_dir")
    if cfg.curated_db is not None:
        cfg.require("curated_db", "anchor")
        cfg.anchor_entity(None)
    dictionary = load_dictionary(cfg.dictionary) if cfg.dictionary else None
    warnings: list[str] = []
    with _StagingDir(cfg.out_dir) as tmp:
        with _Stage("metrics"):
            g = read_edge_list(cfg.graph, dictionary.entities if dictionary else None)
            analysis = _analyze(cfg, g)
            _warn_metric_errors(analysis, warnings)
            outputs = report.write_metric_outputs(tmp, analysis, cfg.k)
        if cfg.curated_db is not None:
            with _Stage("compare"):
                outputs += _compare(cfg, analysis, dictionary, tmp)
    return {"outputs": outputs, "warnings": warnings}


# -------------------------------------------------------------- commands

def cmd_pipeline(cfg: RunConfig) -> int:
    manifest = run_pipeline(cfg)
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(manifest['outputs'])} outputs to {cfg.out_dir}")
    return 0


def cmd_filter(cfg: RunConfig) -> int:
    cfg.require("corpus")
    corpus = load_corpus(cfg.corpus, strict=cfg.strict)
    ids = filter_corpus(corpus, _load_query(cfg))
    text = "".join(f"{pid}\n" for pid in ids)
    if cfg.out_dir:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        (Path(cfg.out_dir) / "citing_ids.txt").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_extract(cfg: RunConfig) -> int:
    cfg.require("corpus", "dictionary")
    corpus = load_corpus(cfg.corpus, strict=cfg.strict)
    dictionary = load_dictionary(cfg.dictionary)
    ids = filter_corpus(corpus, _load_query(cfg)) if (cfg.query or cfg.query_file) else list(corpus.papers)
    occs = [o for pid in ids for o in extract_entities(dictionary, corpus[pid])]
    if cfg.out_dir:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        write_occurrences(occs, Path(cfg.out_dir) / "entities.tsv")
    else:
        write_occurrences(occs, sys.stdout)
    return 0


def cmd_build(cfg: RunConfig) -> int:
    cfg.require("corpus", "dictionary", "out_dir")
    corpus = load_corpus(cfg.corpus, strict=cfg.strict)
    dictionary = load_dictionary(cfg.dictionary)
    citing = filter_corpus(corpus, _load_query(cfg))
    cited = {r for pid in citing for r in corpus.resolved_ids(pid)}
    _, sets = _occurrence_map(dictionary, corpus, set(citing) | cited)
    g = build_graph(corpus, citing, sets)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_edge_list(g, out / "edges.tsv")
    if cfg.graphml:
        export_graphml(g, out / "graph.graphml")
    print(f"{len(g.nodes)} nodes, {len(g.edges)} edges, {g.loop_count} loops")
    return 0


def cmd_metrics(cfg: RunConfig) -> int:
    result = run_metrics(cfg)
    for w in result["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    cfg.require("graph", "curated_db", "anchor", "out_dir")
    cfg.anchor_entity(None)
    dictionary = load_dictionary(cfg.dictionary) if cfg.dictionary else None
    g = read_edge_list(cfg.graph, dictionary.entities if dictionary else None)
    analysis = _analyze(cfg, g)
    with _StagingDir(cfg.out_dir) as tmp:
        _compare(cfg, analysis, dictionary, tmp)
    return 0


def cmd_report(cfg: RunConfig) -> int:
    cfg.require("out_dir")
    path = Path(cfg.out_dir) / "summary.json"
    if not path.is_file():
        raise ConfigError(f"no summary.json in {cfg.out_dir}")
    s = json.loads(path.read_text(encoding="utf-8"))
    d = s.get("distance") or {}
    lines = [
        f"entities: {s['nodes']}  links: {s['edges']}  loops: {s['loops']}",
        f"density: {s['density']}  (with loops: {s['density_with_loops']})",
        f"components: {s['components']['count']}  bi-components: {s['bicomponents']['count']}",
        f"largest k-core: {s['max_core']['k']}-core of {s['max_core']['size']} entities",
        f"mean geodesic distance: {d.get('mean_geodesic')}  (conventional {d.get('mean_geodesic_conventional')})",
        f"diameter: {d.get('diameter')}  between {d.get('diameter_endpoints')}",
        f"clustering coefficient: {s['clustering_coefficient']}",
    ]
    for side in ("in", "out"):
        fit = s.get(f"power_law_{side}")
        lines.append(f"{side}-degree power law gamma: {fit['gamma'] if fit else None}")
    for name, msg in s.get("metric_errors", {}).items():
        lines.append(f"not computed ({name}): {msg}")
    print("\n".join(lines))
    return 0


COMMANDS = {
    "pipeline": cmd_pipeline,
    "filter": cmd_filter,
    "extract": cmd_extract,
    "build": cmd_build,
    "metrics": cmd_metrics,
    "compare": cmd_compare,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value or JSON file; its values override flags")
    common.add_argument("--corpus")
    common.add_argument("--dictionary")
    common.add_argument("--query")
    common.add_argument("--query-file", dest="query_file")
    common.add_argument("--curated-db", dest="curated_db")
    common.add_argument("--anchor", help="anchor entity as TYPE:ID, e.g. DRUG:DB00331")
    common.add_argument("--graph", help="edge-list TSV written by build or pipeline")
    common.add_argument("--out", dest="out_dir")
    common.add_argument("--exact-threshold", dest="exact_threshold", type=int)
    common.add_argument("--sample-size", dest="sample_size", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("-k", "--top", dest="k", type=int)
    common.add_argument("--k-min", dest="k_min", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--lenient", dest="strict", action="store_false", default=None)
    common.add_argument("--graphml", action="store_true", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="entitymetrics", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, ConfigError):
            return 1
        return 2 if isinstance(exc.cause, DataError) else 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
