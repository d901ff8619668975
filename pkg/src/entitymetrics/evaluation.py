"""Compare centrality rankings against a curated interaction database."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CuratedDbError, DictionaryError
from .extract import EntityId, EntityType, parse_entity_type
from .metrics import CentralityScores

HEADER = ("subject_type", "subject_id", "object_type", "object_id",
          "relation", "inference_score", "curated_rank")

TOP10 = "top10"
MID = "11-100"
LOW = "101+"
UNRANKED = "unranked"  # present in the database but without a curated rank
UNMATCHED = "unmatched"


def bucket_for(curated_rank: int) -> str:
    if curated_rank <= 10:
        return TOP10
    if curated_rank <= 100:
        return MID
    return LOW


@dataclass(frozen=True)
class CuratedInteraction:
    subject: EntityId
    object: EntityId
    relation: str = ""
    inference_score: float | None = None
    curated_rank: int | None = None


@dataclass
class CuratedDb:
    interactions: dict[tuple[EntityId, EntityId], CuratedInteraction]

    def __len__(self):
        return len(self.interactions)

    def get(self, subject: EntityId, obj: EntityId) -> CuratedInteraction | None:
        return self.interactions.get((subject, obj))

    def type_counts(self) -> dict[EntityType, int]:
        counts = {t: 0 for t in EntityType}
        for _, obj in self.interactions:
            counts[obj.entity_type] += 1
        return counts

    def with_subject(self, subject: EntityId) -> int:
        return sum(1 for s, _ in self.interactions if s == subject)

    @classmethod
    def from_interactions(cls, rows: Iterable[CuratedInteraction]) -> "CuratedDb":
        interactions: dict = {}
        ranks: dict = {}
        for row in rows:
            if row.subject == row.object:
                raise CuratedDbError(f"subject equals object: {row.subject.key}")
            key = (row.subject, row.object)
            if key in interactions:
                raise CuratedDbError(f"duplicate interaction {row.subject.key} -> {row.object.key}")
            if row.curated_rank is not None:
                rank_key = (row.subject, row.object.entity_type, row.curated_rank)
                if rank_key in ranks:
                    raise CuratedDbError(
                        f"curated rank {row.curated_rank} repeated for "
                        f"{row.subject.key} / {row.object.entity_type}")
                ranks[rank_key] = key
            interactions[key] = row
        return cls(interactions)


def _parse_row(fields: list[str], names: Mapping) -> CuratedInteraction:
    if len(fields) != len(HEADER):
        raise ValueError(f"expected {len(HEADER)} fields, got {len(fields)}")
    st, sid, ot, oid, relation, score, rank = (f.strip() for f in fields)
    if not sid or not oid:
        raise ValueError("empty entity id")
    try:
        stype, otype = parse_entity_type(st), parse_entity_type(ot)
    except DictionaryError as exc:
        raise ValueError(str(exc)) from None
    subject = names.get((stype.value, sid)) or EntityId(stype, sid)
    obj = names.get((otype.value, oid)) or EntityId(otype, oid)
    curated_rank = int(rank) if rank else None
    if curated_rank is not None and curated_rank < 1:
        raise ValueError("curated_rank must be positive")
    return CuratedInteraction(subject, obj, relation, float(score) if score else None, curated_rank)


def load_curated_db(path, names: Mapping | None = None) -> CuratedDb:
    """Read the curated TSV; a header row naming the columns is optional."""
    names = names or {}
    path = Path(path)
    if not path.is_file():
        raise CuratedDbError(f"curated database not found: {path}")
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if lineno == 1 and fields[0].strip().lower() == HEADER[0]:
                continue
            try:
                rows.append(_parse_row(fields, names))
            except ValueError as exc:
                raise CuratedDbError(f"{path}:{lineno}: malformed row: {exc}") from None
    try:
        return CuratedDb.from_interactions(rows)
    except CuratedDbError as exc:
        raise CuratedDbError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class ComparisonRow:
    entity: EntityId
    our_rank: int
    score: float
    curated_rank: int | None
    bucket: str
    relation: str = ""
    inference_score: float | None = None

    @property
    def matched(self) -> bool:
        return self.bucket != UNMATCHED


@dataclass(frozen=True)
class RankComparison:
    measure: str
    anchor: EntityId
    rows: tuple[ComparisonRow, ...]

    @property
    def match_count(self) -> int:
        return sum(1 for r in self.rows if r.matched)


def match_rankings(
    scores: CentralityScores,
    db: CuratedDb,
    anchor: EntityId,
    k: int,
    type_filter: EntityType | None = None,
) -> RankComparison:
    """Look up (anchor, entity) for each of our top-``k`` entities.

    The anchor never ranks against itself; ``type_filter`` restricts the
    ranking to one entity type before taking the top ``k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = [(v, s) for v, s in scores.ranked() if v != anchor
              and (type_filter is None or v.entity_type == type_filter)]
    rows = []
    for our_rank, (ent, score) in enumerate(ranked[:k], 1):
        hit = db.get(anchor, ent)
        if hit is None:
            rows.append(ComparisonRow(ent, our_rank, score, None, UNMATCHED))
            continue
        bucket = bucket_for(hit.curated_rank) if hit.curated_rank is not None else UNRANKED
        rows.append(ComparisonRow(ent, our_rank, score, hit.curated_rank, bucket,
                                  hit.relation, hit.inference_score))
    return RankComparison(scores.measure, anchor, tuple(rows))


@dataclass(frozen=True)
class NoveltyRow:
    entity: EntityId
    best_rank: int
    measures: tuple[str, ...]


def novelty_report(comparisons: Iterable[RankComparison]) -> list[NoveltyRow]:
    """Entities ranked by some measure that no comparison matched."""
    best: dict[EntityId, int] = {}
    measures: dict[EntityId, list[str]] = {}
    matched: set[EntityId] = set()
    for comp in comparisons:
        for row in comp.rows:
            if row.matched:
                matched.add(row.entity)
                continue
            best[row.entity] = min(best.get(row.entity, row.our_rank), row.our_rank)
            if comp.measure not in measures.setdefault(row.entity, []):
                measures[row.entity].append(comp.measure)
    rows = [NoveltyRow(e, best[e], tuple(measures[e])) for e in best if e not in matched]
    return sorted(rows, key=lambda r: (r.best_rank, r.entity))
