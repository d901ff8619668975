"""Field-tagged boolean query language used to select the citing article set.

Grammar (AND binds tighter than OR, both left-associative)::

    query   := conj ("OR" conj)*
    conj    := primary ("AND" primary)*
    primary := "(" query ")"
             | PHRASE "[ti]" | PHRASE "[ab]"
             | PHRASE "[PubDate]" [":" PHRASE "[PubDate]"]

A phrase term matches when its word-token sequence occurs contiguously in the
word tokens of the tagged field. Word tokens are maximal runs of letters and
digits, compared case-insensitively.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Union

from .corpus import Corpus, PaperRecord, format_date, parse_date
from .errors import QuerySyntaxError

FIELD_TAGS = {"ti": "ti", "ab": "ab", "pubdate": "PubDate"}
FIELD_NAMES = {"ti": "title", "ab": "abstract"}

# token kinds
PHRASE = "QuotedPhrase"
FIELD = "FieldTag"
AND = "OpAnd"
OR = "OpOr"
LPAREN = "LParen"
RPAREN = "RParen"
COLON = "Colon"


def word_tokens(text: str) -> list[str]:
    out = []
    cur = []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def normalize_phrase(text: str) -> str:
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class QueryToken:
    kind: str
    lexeme: str
    position: int


@dataclass(frozen=True)
class Term:
    phrase: str
    field: str  # "ti" or "ab"

    def __post_init__(self):
        if not word_tokens(self.phrase):
            raise QuerySyntaxError(f"phrase {self.phrase!r} has no word characters")
        if self.field not in FIELD_NAMES:
            raise QuerySyntaxError(f"term field must be ti or ab, got {self.field!r}")


@dataclass(frozen=True)
class DateRange:
    start: dt.date
    end: dt.date  # inclusive

    def __post_init__(self):
        if self.start > self.end:
            raise QuerySyntaxError(f"date range start {self.start} is after end {self.end}")


@dataclass(frozen=True)
class And:
    left: "QueryAst"
    right: "QueryAst"


@dataclass(frozen=True)
class Or:
    left: "QueryAst"
    right: "QueryAst"


QueryAst = Union[Term, DateRange, And, Or]


def tokenize(text: str) -> list[QueryToken]:
    tokens = []
    i = 0
    pos = 0  # byte offset of text[i]
    n = len(text)

    def nbytes(s):
        return len(s.encode("utf-8"))

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            pos += nbytes(ch)
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise QuerySyntaxError("unterminated quote", pos)
            lexeme = text[i + 1:j]
            tokens.append(QueryToken(PHRASE, lexeme, pos))
            pos += nbytes(text[i:j + 1])
            i = j + 1
        elif ch == "[":
            j = text.find("]", i + 1)
            if j < 0:
                raise QuerySyntaxError("unterminated field tag", pos)
            tag = text[i + 1:j].strip().lower()
            if tag not in FIELD_TAGS:
                raise QuerySyntaxError(f"unknown field tag [{text[i + 1:j]}]", pos)
            tokens.append(QueryToken(FIELD, FIELD_TAGS[tag], pos))
            pos += nbytes(text[i:j + 1])
            i = j + 1
        elif ch in "():":
            kind = {"(": LPAREN, ")": RPAREN, ":": COLON}[ch]
            tokens.append(QueryToken(kind, ch, pos))
            i += 1
            pos += 1
        elif ch.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            word = text[i:j]
            if word == "AND":
                tokens.append(QueryToken(AND, word, pos))
            elif word == "OR":
                tokens.append(QueryToken(OR, word, pos))
            else:
                raise QuerySyntaxError(f"unexpected word {word!r}", pos)
            pos += nbytes(word)
            i = j
        else:
            raise QuerySyntaxError(f"stray character {ch!r}", pos)
    return tokens


class _Parser:
    def __init__(self, tokens: list[QueryToken]):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind=None):
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("unexpected end of query")
        if kind is not None and tok.kind != kind:
            raise QuerySyntaxError(f"expected {kind}, found {tok.kind} {tok.lexeme!r}", tok.position)
        self.i += 1
        return tok

    def parse(self) -> QueryAst:
        if not self.tokens:
            raise QuerySyntaxError("empty query")
        node = self.query()
        tok = self.peek()
        if tok is not None:
            if tok.kind == RPAREN:
                raise QuerySyntaxError("unbalanced ')'", tok.position)
            raise QuerySyntaxError(f"trailing tokens starting at {tok.lexeme!r}", tok.position)
        return node

    def query(self):
        node = self.conj()
        while (tok := self.peek()) is not None and tok.kind == OR:
            self.i += 1
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.primary()
        while (tok := self.peek()) is not None and tok.kind == AND:
            self.i += 1
            node = And(node, self.primary())
        return node

    def primary(self):
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("dangling operator at end of query")
        if tok.kind == LPAREN:
            self.i += 1
            node = self.query()
            close = self.peek()
            if close is None or close.kind != RPAREN:
                raise QuerySyntaxError("unbalanced '('", tok.position)
            self.i += 1
            return node
        if tok.kind == PHRASE:
            self.i += 1
            tag = self.take(FIELD)
            if tag.lexeme == "PubDate":
                return self.date_range(tok)
            return Term(normalize_phrase(tok.lexeme), tag.lexeme)
        if tok.kind in (AND, OR):
            raise QuerySyntaxError(f"dangling operator {tok.lexeme}", tok.position)
        raise QuerySyntaxError(f"unexpected {tok.kind} {tok.lexeme!r}", tok.position)

    def date_range(self, first: QueryToken) -> DateRange:
        start = self._date(first)
        nxt = self.peek()
        if nxt is None or nxt.kind != COLON:
            return DateRange(start, start)
        self.i += 1
        second = self.take(PHRASE)
        tag = self.take(FIELD)
        if tag.lexeme != "PubDate":
            raise QuerySyntaxError("date range must end with a [PubDate] tag", tag.position)
        return DateRange(start, self._date(second))

    @staticmethod
    def _date(tok: QueryToken) -> dt.date:
        try:
            return parse_date(tok.lexeme)
        except ValueError:
            raise QuerySyntaxError(f"malformed date {tok.lexeme!r}", tok.position) from None


def parse_query(tokens: list[QueryToken] | str) -> QueryAst:
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    return _Parser(list(tokens)).parse()


def format_query(node: QueryAst) -> str:
    """Canonical text form; ``parse_query(format_query(a)) == a``."""
    if isinstance(node, Term):
        return f'"{node.phrase}"[{node.field}]'
    if isinstance(node, DateRange):
        return f'"{format_date(node.start)}"[PubDate] : "{format_date(node.end)}"[PubDate]'
    if isinstance(node, Or):
        right = format_query(node.right)
        if isinstance(node.right, Or):
            right = f"({right})"
        return f"{format_query(node.left)} OR {right}"
    if isinstance(node, And):
        left = format_query(node.left)
        right = format_query(node.right)
        if isinstance(node.left, Or):
            left = f"({left})"
        if isinstance(node.right, (Or, And)):
            right = f"({right})"
        return f"{left} AND {right}"
    raise TypeError(f"not a query node: {node!r}")


def iter_terms(node: QueryAst) -> Iterable[QueryAst]:
    """Leaves (terms and date ranges) in left-to-right order."""
    if isinstance(node, (And, Or)):
        yield from iter_terms(node.left)
        yield from iter_terms(node.right)
    else:
        yield node


def _field_key(paper: PaperRecord, field: str, cache: dict) -> str:
    key = cache.get(field)
    if key is None:
        text = paper.title if field == "ti" else paper.abstract
        key = cache[field] = " " + " ".join(word_tokens(text)) + " "
    return key


def _eval(node, paper: PaperRecord, cache: dict) -> bool:
    if isinstance(node, Term):
        needle = " " + " ".join(word_tokens(node.phrase)) + " "
        return needle in _field_key(paper, node.field, cache)
    if isinstance(node, DateRange):
        return node.start <= paper.pub_date <= node.end
    if isinstance(node, And):
        return _eval(node.left, paper, cache) and _eval(node.right, paper, cache)
    if isinstance(node, Or):
        return _eval(node.left, paper, cache) or _eval(node.right, paper, cache)
    raise TypeError(f"not a query node: {node!r}")


def evaluate_query(ast: QueryAst, paper: PaperRecord) -> bool:
    return _eval(ast, paper, {})


def filter_corpus(corpus: Corpus, ast: QueryAst) -> list[str]:
    return sorted(pid for pid, p in corpus.papers.items() if evaluate_query(ast, p))
