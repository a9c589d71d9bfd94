"""Conjunctive SPARQL subset: SELECT over a basic graph pattern.

Single-variable ``VALUES`` blocks are accepted because rewritten queries
use them to constrain a label variable to a set of summary labels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .rdf import IRI, Term, TermError, escape_literal, unescape

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD = "http://www.w3.org/2001/XMLSchema#"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return "?" + self.name


PatternTerm = Union[Var, Term]


class TriplePattern(NamedTuple):
    s: PatternTerm
    p: PatternTerm
    o: PatternTerm

    def variables(self) -> list[Var]:
        return [t for t in self if isinstance(t, Var)]


@dataclass
class Query:
    """``projection`` is None for ``SELECT *``."""

    patterns: list[TriplePattern]
    projection: Optional[list[Var]] = None
    values: dict[Var, list[Term]] = field(default_factory=dict)
    prefixes: dict[str, str] = field(default_factory=dict)

    def variables(self) -> list[Var]:
        """Pattern variables in order of first appearance."""
        seen: dict[Var, None] = {}
        for tp in self.patterns:
            for v in tp.variables():
                seen.setdefault(v)
        return list(seen)

    def projected(self) -> list[Var]:
        return list(self.projection) if self.projection is not None else self.variables()

    def structure(self):
        return (tuple(self.patterns), None if self.projection is None else tuple(self.projection),
                tuple((v, tuple(vals)) for v, vals in self.values.items()))


class QueryParseError(ValueError):
    pass


class UnsupportedFeature(QueryParseError):
    def __init__(self, features):
        self.features = tuple(features)
        self.feature = self.features[0]
        super().__init__("unsupported SPARQL construct: " + ", ".join(self.features))


_UNSUPPORTED = ("UNION", "OPTIONAL", "MINUS", "FILTER", "BIND", "SERVICE", "GRAPH",
                "SUBQUERY", "DISTINCT", "REDUCED", "ORDER", "GROUP", "HAVING", "LIMIT",
                "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "FROM", "PROPERTY PATH")

_PN_CHARS_BASE = "A-Za-zÀ-ÖØ-öø-˿Ͱ-ͽͿ-῿‌-‍⁰-↏Ⰰ-⿯、-퟿豈-﷏ﷰ-�"
_PN_CHARS_U = _PN_CHARS_BASE + "_"
_PN_CHARS = _PN_CHARS_U + r"\-0-9·̀-ͯ‿-⁀"
_PN_PREFIX = f"[{_PN_CHARS_BASE}](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?"
_PN_LOCAL = rf"(?:[{_PN_CHARS_U}:0-9]|\\[_~.\-!$&'()*+,;=/?#@%])(?:(?:[{_PN_CHARS}.:]|\\[_~.\-!$&'()*+,;=/?#@%])*(?:[{_PN_CHARS}:]|\\[_~.\-!$&'()*+,;=/?#@%]))?"

_TOKENS = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<var>[?$][A-Za-z0-9_·À-￿]+)
  | (?P<literal>"(?:[^"\\\n\r]|\\.)*"|'(?:[^'\\\n\r]|\\.)*')
  | (?P<lang>@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)
  | (?P<dtype>\^\^)
  | (?P<pname>(?:""" + _PN_PREFIX + r""")?:(?:""" + _PN_LOCAL + r""")?)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<bnode>_:[A-Za-z0-9_]+|\[\s*\])
  | (?P<keyword>[A-Za-z][A-Za-z0-9_]*)
  | (?P<punct>&&|\|\||[{}.*;,()|/+^!<>=&-])
    """,
    re.X,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if m is None:
            raise QueryParseError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
        pos = m.end()
    return out


def _scan_unsupported(tokens) -> list[str]:
    found = set()
    depth = 0
    for i, (kind, value) in enumerate(tokens):
        if kind == "keyword":
            word = value.upper()
            if word in _UNSUPPORTED:
                found.add(word)
            elif word == "SELECT" and depth > 0:
                found.add("SUBQUERY")
        elif kind == "punct":
            if value == "{":
                depth += 1
                if depth > 1 and "SUBQUERY" not in found and not _values_brace(tokens, i):
                    found.add("SUBQUERY" if _next_keyword(tokens, i) == "SELECT" else "GROUP")
            elif value == "}":
                depth -= 1
            elif value in ("|", "/", "+", "^", "!"):
                found.add("PROPERTY PATH")
        elif kind == "bnode":
            found.add("BLANK NODE")
    order = list(_UNSUPPORTED) + ["BLANK NODE"]
    # GROUP covers both GROUP BY and nested group patterns
    return sorted(found, key=order.index)


def _values_brace(tokens, i) -> bool:
    j = i - 1
    while j >= 0 and (tokens[j][0] == "var" or tokens[j] in (("punct", "("), ("punct", ")"))):
        j -= 1
    return j >= 0 and tokens[j][0] == "keyword" and tokens[j][1].upper() == "VALUES"


def _next_keyword(tokens, i) -> Optional[str]:
    if i + 1 < len(tokens) and tokens[i + 1][0] == "keyword":
        return tokens[i + 1][1].upper()
    return None


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.prefixes: dict[str, str] = {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", "")

    def next(self):
        tok = self.peek()
        if tok[0] == "eof":
            raise QueryParseError("unexpected end of query")
        self.pos += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1].upper() != value):
            raise QueryParseError(f"expected {value or kind}, found {tok[1]!r}")
        return tok

    def is_keyword(self, word):
        kind, value = self.peek()
        return kind == "keyword" and value.upper() == word

    def parse(self) -> Query:
        while self.is_keyword("PREFIX") or self.is_keyword("BASE"):
            if self.is_keyword("BASE"):
                raise UnsupportedFeature(["BASE"])
            self.next()
            kind, pname = self.next()
            if kind != "pname" or not pname.endswith(":"):
                raise QueryParseError(f"bad prefix declaration {pname!r}")
            iri = self.expect("iri")[1]
            self.prefixes[pname[:-1]] = unescape(iri[1:-1])
        self.expect("keyword", "SELECT")
        projection: Optional[list[Var]]
        if self.peek() == ("punct", "*"):
            self.next()
            projection = None
        else:
            projection = []
            while self.peek()[0] == "var":
                projection.append(Var(self.next()[1][1:]))
            if not projection:
                raise QueryParseError("empty projection")
        if self.is_keyword("WHERE"):
            self.next()
        self.expect("punct", "{")
        patterns: list[TriplePattern] = []
        values: dict[Var, list[Term]] = {}
        while True:
            tok = self.peek()
            if tok == ("punct", "}"):
                self.next()
                break
            if tok == ("punct", "."):
                self.next()
                continue
            if self.is_keyword("VALUES"):
                self.next()
                var, vals = self._values()
                if var in values:
                    raise QueryParseError(f"duplicate VALUES block for {var}")
                values[var] = vals
                continue
            s = self._term()
            p = self._term(predicate=True)
            o = self._term()
            patterns.append(TriplePattern(s, p, o))
            nxt = self.peek()
            if nxt[0] == "punct" and nxt[1] in ";,":
                raise QueryParseError("';' and ',' abbreviations are not supported")
            if nxt not in (("punct", "."), ("punct", "}")) and not self.is_keyword("VALUES"):
                raise QueryParseError(f"expected '.' after triple pattern, found {nxt[1]!r}")
        if self.peek()[0] != "eof":
            raise QueryParseError(f"trailing input {self.peek()[1]!r}")
        query = Query(patterns, projection, values, dict(self.prefixes))
        _validate(query)
        return query

    def _values(self):
        var_tok = self.next()
        if var_tok[0] != "var":
            if var_tok == ("punct", "("):
                raise UnsupportedFeature(["VALUES with several variables"])
            raise QueryParseError("expected variable after VALUES")
        self.expect("punct", "{")
        vals = []
        while self.peek() != ("punct", "}"):
            if self.is_keyword("UNDEF"):
                raise UnsupportedFeature(["UNDEF"])
            term = self._term()
            if isinstance(term, Var):
                raise QueryParseError("variable inside VALUES")
            vals.append(term)
        self.next()
        return Var(var_tok[1][1:]), vals

    def _term(self, predicate=False) -> PatternTerm:
        kind, value = self.next()
        try:
            if kind == "var":
                return Var(value[1:])
            if kind == "iri":
                return Term.iri(unescape(value[1:-1]))
            if kind == "pname":
                return Term.iri(self._expand(value))
            if kind == "keyword" and value == "a" and predicate:
                return Term.iri(RDF_TYPE)
            if predicate:
                raise QueryParseError(f"invalid predicate {value!r}")
            if kind == "literal":
                lexical = unescape(value[1:-1])
                nk, nv = self.peek()
                if nk == "lang":
                    self.next()
                    return Term.literal(lexical, lang=nv[1:])
                if nk == "dtype":
                    self.next()
                    dk, dv = self.next()
                    if dk == "iri":
                        return Term.literal(lexical, datatype=unescape(dv[1:-1]))
                    if dk == "pname":
                        return Term.literal(lexical, datatype=self._expand(dv))
                    raise QueryParseError(f"bad datatype {dv!r}")
                return Term.literal(lexical)
            if kind == "number":
                if re.fullmatch(r"[+-]?\d+", value):
                    return Term.literal(value, datatype=XSD + "integer")
                if "e" in value.lower():
                    return Term.literal(value, datatype=XSD + "double")
                return Term.literal(value, datatype=XSD + "decimal")
            if kind == "keyword" and value in ("true", "false"):
                return Term.literal(value, datatype=XSD + "boolean")
        except TermError as exc:
            raise QueryParseError(str(exc)) from None
        raise QueryParseError(f"unexpected token {value!r}")

    def _expand(self, pname: str) -> str:
        prefix, _, local = pname.partition(":")
        if prefix not in self.prefixes:
            raise QueryParseError(f"undeclared prefix {prefix!r}")
        local = re.sub(r"\\(.)", r"\1", local)
        return self.prefixes[prefix] + local


def _validate(query: Query) -> None:
    if not query.patterns:
        raise QueryParseError("query has no triple patterns")
    names = set(query.variables())
    if query.projection is not None:
        for v in query.projection:
            if v not in names:
                raise QueryParseError(f"projected variable {v} does not occur in any pattern")
    for v in query.values:
        if v not in names:
            raise QueryParseError(f"VALUES variable {v} does not occur in any pattern")
    for tp in query.patterns:
        if isinstance(tp.s, Term) and tp.s.is_literal:
            raise QueryParseError("literal in subject position")


def parse_query(text: str) -> Query:
    tokens = _tokenize(text)
    unsupported = _scan_unsupported(tokens)
    if unsupported:
        raise UnsupportedFeature(unsupported)
    return _Parser(tokens).parse()


_SIMPLE_LOCAL = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")


def _format_term(term: PatternTerm, prefixes: list[tuple[str, str]]) -> str:
    if isinstance(term, Var):
        return "?" + term.name
    if term.kind == IRI:
        return _format_iri(term.lexical, prefixes)
    if term.is_literal:
        text = '"' + escape_literal(term.lexical) + '"'
        if term.datatype is not None:
            return text + "^^" + _format_iri(term.datatype, prefixes)
        if term.lang is not None:
            return text + "@" + term.lang
        return text
    return term.n3()


def _format_iri(iri: str, prefixes: list[tuple[str, str]]) -> str:
    for name, base in prefixes:
        if iri.startswith(base) and _SIMPLE_LOCAL.fullmatch(iri[len(base):]):
            return f"{name}:{iri[len(base):]}"
    return f"<{iri}>"


def serialize_query(query: Query) -> str:
    """SPARQL text for ``query``; prefixes declared on it are used to compact IRIs."""
    assert query.projection is None or query.projection, "empty projection"
    # longest namespace first so the most specific prefix wins
    prefixes = sorted(query.prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    lines = [f"PREFIX {name}: <{base}>" for name, base in sorted(query.prefixes.items())]
    head = "*" if query.projection is None else " ".join(str(v) for v in query.projection)
    lines.append(f"SELECT {head} WHERE {{")
    for tp in query.patterns:
        lines.append("  " + " ".join(_format_term(t, prefixes) for t in tp) + " .")
    for var, vals in query.values.items():
        lines.append(f"  VALUES {var} {{ " + " ".join(_format_term(t, prefixes) for t in vals) + " }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def extract_query_ns(query: Query) -> dict[Var, tuple[str, ...]]:
    """Per subject/object variable, the sorted constant predicate IRIs around it."""
    ns: dict[Var, set[str]] = {}
    for tp in query.patterns:
        if isinstance(tp.p, Var):
            continue
        for term in (tp.s, tp.o):
            if isinstance(term, Var):
                ns.setdefault(term, set()).add(tp.p.lexical)
    return {v: tuple(sorted(ps)) for v, ps in ns.items()}
