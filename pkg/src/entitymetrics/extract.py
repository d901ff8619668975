"""Dictionary-based exact-match entity chunking over titles and abstracts.

Dictionary lines look like ``ACTA1-->GENE__P68133``: a surface form, the
``-->`` separator, an entity type, one or more underscores and an accession.
Surface forms are normalized (lowercase, whitespace runs collapsed) and
matched leftmost-longest on word boundaries, where letters and digits are
word characters.
"""

from __future__ import annotations

import enum
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .corpus import PaperRecord
from .errors import DictionaryError

log = logging.getLogger(__name__)

SEPARATOR = "-->"
_TARGET_RE = re.compile(r"^([A-Za-z]+)_+(\S.*)$")


class EntityType(str, enum.Enum):
    DISEASE = "DISEASE"
    DRUG = "DRUG"
    GENE = "GENE"

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class EntityId:
    entity_type: EntityType
    canonical_id: str
    display_name: str = field(default="", compare=False)

    @property
    def label(self) -> str:
        """``TYPE_name`` as printed in the centrality tables."""
        return f"{self.entity_type.value}_{(self.display_name or self.canonical_id).lower()}"

    @property
    def key(self) -> tuple[str, str]:
        return (self.entity_type.value, self.canonical_id)


def parse_entity_type(token: str) -> EntityType:
    try:
        return EntityType(token.upper())
    except ValueError:
        raise DictionaryError(f"unknown entity type {token!r}") from None


def parse_dictionary_line(line: str) -> tuple[str, EntityId]:
    surface, sep, target = line.rpartition(SEPARATOR)
    if not sep:
        raise DictionaryError(f"missing '{SEPARATOR}' separator")
    surface = surface.strip()
    target = target.strip()
    if not surface:
        raise DictionaryError("empty surface form")
    m = _TARGET_RE.match(target)
    if m is None:
        raise DictionaryError(f"malformed entity reference {target!r}")
    etype = parse_entity_type(m.group(1))
    return surface, EntityId(etype, m.group(2).strip(), surface)


class Span(NamedTuple):
    start: int  # UTF-8 byte offsets into the original text
    end: int


class _Automaton:
    """Character-level Aho-Corasick automaton reporting (end, length, value)."""

    def __init__(self, patterns: dict[str, object]):
        self.goto: list[dict[str, int]] = [{}]
        self.fail: list[int] = [0]
        self.out: list[list[tuple[int, object]]] = [[]]
        for pat, value in patterns.items():
            state = 0
            for ch in pat:
                nxt = self.goto[state].get(ch)
                if nxt is None:
                    nxt = len(self.goto)
                    self.goto[state][ch] = nxt
                    self.goto.append({})
                    self.fail.append(0)
                    self.out.append([])
                state = nxt
            self.out[state].append((len(pat), value))
        queue = deque(self.goto[0].values())
        while queue:
            state = queue.popleft()
            for ch, nxt in self.goto[state].items():
                queue.append(nxt)
                f = self.fail[state]
                while f and ch not in self.goto[f]:
                    f = self.fail[f]
                target = self.goto[f].get(ch, 0)
                self.fail[nxt] = target if target != nxt else 0
                self.out[nxt] = self.out[nxt] + self.out[self.fail[nxt]]

    def iter(self, text: str):
        state = 0
        goto, fail, out = self.goto, self.fail, self.out
        for i, ch in enumerate(text):
            while state and ch not in goto[state]:
                state = fail[state]
            state = goto[state].get(ch, 0)
            for length, value in out[state]:
                yield i + 1, length, value


def _normalize_with_offsets(text: str) -> tuple[str, list[int], list[int]]:
    """Lowercase and collapse whitespace, tracking byte offsets.

    Returns the normalized string and, per output character, the start and end
    byte offsets of the source character in ``text``.
    """
    chars: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    pos = 0
    pending_space = False
    for ch in text:
        width = len(ch.encode("utf-8"))
        if ch.isspace():
            pending_space = bool(chars)
        else:
            if pending_space:
                chars.append(" ")
                starts.append(pos)
                ends.append(pos)
                pending_space = False
            for low in ch.lower():
                chars.append(low)
                starts.append(pos)
                ends.append(pos + width)
        pos += width
    return "".join(chars), starts, ends


def normalize(text: str) -> str:
    return _normalize_with_offsets(text)[0]


def select_leftmost_longest(candidates: Iterable[tuple[int, int, object]]):
    """Resolve overlapping (start, end, value) matches leftmost-longest."""
    best: dict[int, tuple[int, object]] = {}
    for start, end, value in candidates:
        cur = best.get(start)
        if cur is None or end > cur[0]:
            best[start] = (end, value)
    chosen = []
    frontier = 0
    for start in sorted(best):
        if start < frontier:
            continue
        end, value = best[start]
        chosen.append((start, end, value))
        frontier = end
    return chosen


def on_boundary(text: str, start: int, end: int) -> bool:
    return (start == 0 or not text[start - 1].isalnum()) and (
        end == len(text) or not text[end].isalnum()
    )


@dataclass
class EntityDictionary:
    surface_map: dict[str, EntityId] = field(default_factory=dict)
    entities: dict[tuple[str, str], EntityId] = field(default_factory=dict)
    collisions: list[tuple[str, EntityId, EntityId]] = field(default_factory=list)

    def __post_init__(self):
        self._automaton = None

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[str, EntityId]]) -> "EntityDictionary":
        d = cls()
        for surface, ent in entries:
            d.add(surface, ent)
        return d

    def add(self, surface: str, entity: EntityId) -> None:
        norm = normalize(surface)
        if not norm:
            raise DictionaryError("empty surface form")
        # first surface form seen for an entity becomes its display name
        entity = self.entities.setdefault(entity.key, entity)
        prev = self.surface_map.get(norm)
        if prev is None:
            self.surface_map[norm] = entity
        elif prev != entity:
            self.collisions.append((norm, prev, entity))
            log.warning("surface form %r maps to %s and %s; keeping the first",
                        norm, prev.key, entity.key)
        self._automaton = None

    def entity_count(self) -> dict[EntityType, int]:
        counts = {t: 0 for t in EntityType}
        for ent in self.entities.values():
            counts[ent.entity_type] += 1
        return counts

    def lookup(self, entity_type, canonical_id: str) -> EntityId:
        etype = EntityType(entity_type)
        return self.entities.get((etype.value, canonical_id), EntityId(etype, canonical_id))

    @property
    def automaton(self) -> _Automaton:
        if self._automaton is None:
            self._automaton = _Automaton(self.surface_map)
        return self._automaton

    def __len__(self) -> int:
        return len(self.surface_map)


def load_dictionary(path) -> EntityDictionary:
    path = Path(path)
    if not path.is_file():
        raise DictionaryError(f"dictionary file not found: {path}")
    d = EntityDictionary()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                surface, ent = parse_dictionary_line(line)
            except DictionaryError as exc:
                raise DictionaryError(f"{path}:{lineno}: {exc}") from None
            d.add(surface, ent)
    if d.collisions:
        log.warning("%s: %d surface-form collisions resolved first-wins", path, len(d.collisions))
    return d


def chunk_text(dictionary: EntityDictionary, text: str) -> list[tuple[Span, EntityId]]:
    norm, starts, ends = _normalize_with_offsets(text)
    candidates = (
        (end - length, end, ent)
        for end, length, ent in dictionary.automaton.iter(norm)
        if on_boundary(norm, end - length, end)
    )
    return [
        (Span(starts[s], ends[e - 1]), ent)
        for s, e, ent in select_leftmost_longest(candidates)
    ]


@dataclass(frozen=True)
class EntityOccurrence:
    paper_id: str
    entity: EntityId
    mention_count: int
    spans: tuple[tuple[str, int, int], ...]


def extract_entities(dictionary: EntityDictionary, paper: PaperRecord) -> list[EntityOccurrence]:
    spans: dict[EntityId, list[tuple[str, int, int]]] = {}
    for fname, text in (("title", paper.title), ("abstract", paper.abstract)):
        for span, ent in chunk_text(dictionary, text):
            spans.setdefault(ent, []).append((fname, span.start, span.end))
    return [
        EntityOccurrence(paper.paper_id, ent, len(spans[ent]), tuple(spans[ent]))
        for ent in sorted(spans)
    ]


def write_occurrences(occurrences: Iterable[EntityOccurrence], dest) -> None:
    """Write ``paper_id, type, canonical_id, count`` rows to a path or open file."""
    if hasattr(dest, "write"):
        fh = dest
    else:
        fh = Path(dest).open("w", encoding="utf-8", newline="\n")
    try:
        fh.write("paper_id\ttype\tcanonical_id\tcount\n")
        for occ in occurrences:
            fh.write(f"{occ.paper_id}\t{occ.entity.entity_type}\t"
                     f"{occ.entity.canonical_id}\t{occ.mention_count}\n")
    finally:
        if fh is not dest:
            fh.close()
