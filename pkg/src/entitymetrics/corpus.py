"""Document corpus: line-delimited JSON ingest and paper-level citation lookup."""

from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import CorpusError

log = logging.getLogger(__name__)


def parse_date(text: str) -> dt.date:
    """Parse ``YYYY/MM/DD``; a missing month or day defaults to 1."""
    parts = text.strip().split("/")
    if not 1 <= len(parts) <= 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"bad date {text!r}")
    year, month, day = (int(p) for p in parts + ["1"] * (3 - len(parts)))
    return dt.date(year, month, day)


def format_date(d: dt.date) -> str:
    return f"{d.year:04d}/{d.month:02d}/{d.day:02d}"


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    pub_date: dt.date
    references: tuple[str, ...] = ()

    def to_json(self) -> str:
        obj = {
            "id": self.paper_id,
            "title": self.title,
            "abstract": self.abstract,
            "date": format_date(self.pub_date),
            "refs": list(self.references),
        }
        return json.dumps(obj, ensure_ascii=False)

    @classmethod
    def from_obj(cls, obj) -> "PaperRecord":
        if not isinstance(obj, dict):
            raise ValueError("line is not a JSON object")
        pid = obj.get("id")
        if not isinstance(pid, str) or not pid:
            raise ValueError("missing or empty 'id'")
        title = obj.get("title", "")
        abstract = obj.get("abstract", "")
        if not isinstance(title, str) or not isinstance(abstract, str):
            raise ValueError("'title' and 'abstract' must be strings")
        date_text = obj.get("date")
        if not isinstance(date_text, str):
            raise ValueError("missing 'date'")
        pub_date = parse_date(date_text)
        refs = obj.get("refs", [])
        if not isinstance(refs, list) or not all(isinstance(r, str) and r for r in refs):
            raise ValueError("'refs' must be a list of non-empty strings")
        # dict.fromkeys keeps first-seen order while dropping duplicates
        return cls(pid, title, abstract, pub_date, tuple(dict.fromkeys(refs)))


@dataclass(frozen=True)
class CorpusStats:
    paper_count: int
    resolved_refs: int
    unresolved_refs: int
    date_range: tuple[dt.date, dt.date] | None


@dataclass
class Corpus:
    """Immutable-by-convention collection of papers keyed by id (sorted)."""

    papers: dict[str, PaperRecord] = field(default_factory=dict)
    skipped: int = 0

    @classmethod
    def from_records(cls, records: Iterable[PaperRecord], skipped: int = 0) -> "Corpus":
        papers: dict[str, PaperRecord] = {}
        for rec in records:
            if rec.paper_id in papers:
                raise CorpusError(f"duplicate paper id {rec.paper_id!r}")
            papers[rec.paper_id] = rec
        return cls({pid: papers[pid] for pid in sorted(papers)}, skipped)

    def __len__(self) -> int:
        return len(self.papers)

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self.papers

    def __getitem__(self, paper_id: str) -> PaperRecord:
        return self.papers[paper_id]

    @property
    def citation_count(self) -> int:
        return sum(len(p.references) for p in self.papers.values())

    def unresolved(self, paper_id: str) -> list[str]:
        return [r for r in self[paper_id].references if r not in self.papers]

    def resolved_ids(self, paper_id: str) -> list[str]:
        if paper_id not in self.papers:
            raise CorpusError(f"unknown paper id {paper_id!r}")
        return sorted(r for r in self.papers[paper_id].references if r in self.papers)


def load_corpus(path, strict: bool = True) -> Corpus:
    """Read a JSONL corpus.

    In lenient mode malformed lines are skipped and counted in
    ``Corpus.skipped``. Duplicate ids are an error in both modes.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    records = []
    skipped = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(PaperRecord.from_obj(json.loads(line)))
            except ValueError as exc:  # JSONDecodeError is a ValueError
                if strict:
                    raise CorpusError(f"{path}:{lineno}: malformed line: {exc}") from exc
                skipped += 1
                log.warning("%s:%d: skipping malformed line: %s", path, lineno, exc)
    return Corpus.from_records(records, skipped=skipped)


def dump_corpus(corpus: Corpus, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in corpus.papers.values():
            fh.write(rec.to_json() + "\n")


def resolve_references(corpus: Corpus, paper_id: str) -> list[PaperRecord]:
    return [corpus[r] for r in corpus.resolved_ids(paper_id)]


def corpus_stats(corpus: Corpus) -> CorpusStats:
    resolved = unresolved = 0
    for rec in corpus.papers.values():
        for ref in rec.references:
            if ref in corpus.papers:
                resolved += 1
            else:
                unresolved += 1
    dates = [p.pub_date for p in corpus.papers.values()]
    span = (min(dates), max(dates)) if dates else None
    return CorpusStats(len(corpus), resolved, unresolved, span)
