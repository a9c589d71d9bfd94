"""RDF terms, dictionary encoding and line-based N-Triples I/O.

Terms are interned by their canonical N-Triples spelling, so the hot parse
loop never builds :class:`Term` objects; they are materialized lazily on
:meth:`Dictionary.resolve`.
"""

from __future__ import annotations

import gc
import re
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

IRI = "iri"
LITERAL = "literal"
BNODE = "bnode"

_KIND_CODE = {IRI: 0, LITERAL: 1, BNODE: 2}

_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_BNODE_LABEL = re.compile(r"^[A-Za-z0-9_\u00C0-\uFFFF](?:[A-Za-z0-9_.\-\u00B7\u00C0-\uFFFF]*[A-Za-z0-9_\-\u00B7\u00C0-\uFFFF])?$")
_LANG_TAG = re.compile(r"^[a-zA-Z]+(?:-[a-zA-Z0-9]+)*$")


class TermError(ValueError):
    """A term violates the RDF term grammar."""


@dataclass(frozen=True)
class Term:
    kind: str
    lexical: str
    datatype: Optional[str] = None
    lang: Optional[str] = None

    def __post_init__(self):
        if self.kind == IRI:
            if not self.lexical or _IRI_FORBIDDEN.search(self.lexical):
                raise TermError(f"invalid IRI {self.lexical!r}")
        elif self.kind == LITERAL:
            if self.datatype is not None and self.lang is not None:
                raise TermError("literal cannot carry both a datatype and a language tag")
            if self.datatype is not None and (not self.datatype or _IRI_FORBIDDEN.search(self.datatype)):
                raise TermError(f"invalid datatype IRI {self.datatype!r}")
            if self.lang is not None and not _LANG_TAG.match(self.lang):
                raise TermError(f"invalid language tag {self.lang!r}")
        elif self.kind == BNODE:
            if not _BNODE_LABEL.match(self.lexical):
                raise TermError(f"invalid blank node label {self.lexical!r}")
        else:
            raise TermError(f"unknown term kind {self.kind!r}")
        if self.kind != LITERAL and (self.datatype is not None or self.lang is not None):
            raise TermError("only literals carry datatype or language tag")

    @classmethod
    def iri(cls, value: str) -> "Term":
        return cls(IRI, value)

    @classmethod
    def literal(cls, value: str, datatype: Optional[str] = None, lang: Optional[str] = None) -> "Term":
        return cls(LITERAL, value, datatype, lang)

    @classmethod
    def bnode(cls, label: str) -> "Term":
        return cls(BNODE, label)

    @property
    def is_literal(self) -> bool:
        return self.kind == LITERAL

    def n3(self) -> str:
        """Canonical N-Triples spelling; also the dictionary key."""
        if self.kind == IRI:
            return f"<{self.lexical}>"
        if self.kind == BNODE:
            return f"_:{self.lexical}"
        text = '"' + escape_literal(self.lexical) + '"'
        if self.datatype is not None:
            return f"{text}^^<{self.datatype}>"
        if self.lang is not None:
            return f"{text}@{self.lang}"
        return text

    def __str__(self):
        return self.n3()


def escape_literal(value: str) -> str:
    return (value.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\r", "\\r"))


_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.S)


def unescape(text: str) -> str:
    def repl(m):
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        ch = m.group(3)
        if ch not in _ECHAR:
            raise TermError(f"invalid escape sequence \\{ch}")
        return _ECHAR[ch]
    return _ESCAPE.sub(repl, text)


_UCHAR = r"\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8}"
_IRIREF = r'<(?:[^\x00-\x20<>"{}|^`\\]|' + _UCHAR + r")*>"
_BLANK = r"_:[A-Za-z0-9_\u00C0-\uFFFF](?:[A-Za-z0-9_.\-\u00B7\u00C0-\uFFFF]*[A-Za-z0-9_\-\u00B7\u00C0-\uFFFF])?"
_LITERAL = r'"(?:[^"\\\n\r]|\\[tbnrf"\'\\]|' + _UCHAR + r')*"(?:\^\^' + _IRIREF + r"|@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)?"
_LINE = re.compile(
    r"[ \t]*(" + _IRIREF + "|" + _BLANK + r")[ \t]*(" + _IRIREF + r")[ \t]*("
    + _IRIREF + "|" + _BLANK + "|" + _LITERAL + r")[ \t]*\.[ \t]*(?:#.*)?"
)
_TOKEN = re.compile(r"(" + _IRIREF + ")|(" + _BLANK + ")|(" + _LITERAL + ")")
_LITERAL_PARTS = re.compile(r'"(.*)"(?:\^\^<(.*)>|@(.*))?$', re.S)


def term_from_n3(token: str) -> Term:
    """Parse one N-Triples term token (the inverse of :meth:`Term.n3`)."""
    if token.startswith("<") and token.endswith(">"):
        return Term.iri(unescape(token[1:-1]))
    if token.startswith("_:"):
        return Term.bnode(token[2:])
    m = _LITERAL_PARTS.match(token)
    if not m or not _TOKEN.fullmatch(token):
        raise TermError(f"not an N-Triples term: {token!r}")
    lexical, datatype, lang = m.groups()
    return Term.literal(unescape(lexical), unescape(datatype) if datatype is not None else None, lang)


def _canonical(token: str) -> str:
    if "\\" not in token:
        return token
    return term_from_n3(token).n3()


class Dictionary:
    """Bijective map between terms and dense integer ids (first-seen order)."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._keys: list[str] = []
        self._kinds = bytearray()
        self._terms: dict[int, Term] = {}

    def __len__(self):
        return len(self._keys)

    def __contains__(self, term: Term):
        return term.n3() in self._ids

    def intern(self, term: Term) -> int:
        return self.intern_key(term.n3(), term.kind)

    def intern_key(self, key: str, kind: Optional[str] = None) -> int:
        """Intern by canonical N-Triples spelling."""
        tid = self._ids.get(key)
        if tid is None:
            tid = len(self._keys)
            self._ids[key] = tid
            self._keys.append(key)
            if kind is None:
                kind = LITERAL if key[0] == '"' else BNODE if key[0] == "_" else IRI
            self._kinds.append(_KIND_CODE[kind])
        return tid

    def lookup(self, term: Term) -> Optional[int]:
        return self._ids.get(term.n3())

    def lookup_key(self, key: str) -> Optional[int]:
        return self._ids.get(key)

    def resolve(self, tid: int) -> Term:
        term = self._terms.get(tid)
        if term is None:
            term = self._terms[tid] = term_from_n3(self._keys[tid])
        return term

    def key(self, tid: int) -> str:
        return self._keys[tid]

    def is_literal(self, tid: int) -> bool:
        return self._kinds[tid] == 1

    def literal_flags(self) -> bytearray:
        """Per-id flags, 1 where the id is a literal."""
        return bytearray(1 if k == 1 else 0 for k in self._kinds)

    def copy(self) -> "Dictionary":
        other = Dictionary()
        other._ids = dict(self._ids)
        other._keys = list(self._keys)
        other._kinds = bytearray(self._kinds)
        other._terms = dict(self._terms)
        return other


class Dataset:
    """A dictionary-encoded set of triples.

    ``triples`` is an insertion-ordered dict used as a set: scans then walk
    memory in allocation order and iteration order never depends on hashing.
    """

    def __init__(self, dictionary: Optional[Dictionary] = None, triples: Iterable[tuple[int, int, int]] = ()):
        self.dictionary = dictionary if dictionary is not None else Dictionary()
        self.triples: dict[tuple[int, int, int], None] = dict.fromkeys(triples)

    def __len__(self):
        return len(self.triples)

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return iter(self.triples)

    def intern(self, term: Term) -> int:
        return self.dictionary.intern(term)

    def add(self, s: Term, p: Term, o: Term) -> bool:
        if s.is_literal:
            raise TermError("literal in subject position")
        if p.kind != IRI:
            raise TermError("predicate must be an IRI")
        triple = (self.intern(s), self.intern(p), self.intern(o))
        if triple in self.triples:
            return False
        self.triples[triple] = None
        return True

    @property
    def num_triples(self) -> int:
        return len(self.triples)

    @property
    def num_predicates(self) -> int:
        return len({p for _, p, _ in self.triples})

    def term_triples(self) -> set[tuple[str, str, str]]:
        """Triples spelled as N-Triples keys; id-independent, for comparisons."""
        key = self.dictionary.key
        return {(key(s), key(p), key(o)) for s, p, o in self.triples}


def intern_term(dataset: Dataset, term: Term) -> int:
    return dataset.intern(term)


class NTriplesError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _lines(source) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from source.split("\n")
        return
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line.rstrip("\n")


@contextmanager
def gc_paused():
    """Suspend cyclic garbage collection around bulk builds of acyclic containers.

    Millions of freshly allocated tuples otherwise trigger repeated full
    collections whose cost grows with the heap, making linear loops superlinear.
    """
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def parse_ntriples(source: Union[str, bytes, Iterable], dataset: Optional[Dataset] = None) -> Dataset:
    """Parse N-Triples text (str, bytes, or an iterable of lines) into a Dataset."""
    if dataset is None:
        dataset = Dataset()
    with gc_paused():
        return _parse_into(source, dataset)


def _parse_into(source, dataset: Dataset) -> Dataset:
    dictionary = dataset.dictionary
    intern = dictionary.intern_key
    add = dataset.triples.setdefault
    match = _LINE.fullmatch
    for lineno, line in enumerate(_lines(source), 1):
        if line.endswith("\r"):
            line = line[:-1]
        m = match(line)
        if m is None:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith('"'):
                raise NTriplesError(lineno, "literal in subject position")
            raise NTriplesError(lineno, f"malformed statement: {stripped[:80]!r}")
        s, p, o = m.groups()
        try:
            if "\\" in line:
                s, p, o = _canonical(s), _canonical(p), _canonical(o)
                for token in (s, p, o):
                    term_from_n3(token)
            elif not (len(s) > 2 and len(p) > 2 and (len(o) > 2 or o[0] == '"')):
                for token in (s, p, o):
                    term_from_n3(token)
        except TermError as exc:
            raise NTriplesError(lineno, str(exc)) from None
        add((intern(s), intern(p), intern(o)))
    return dataset


def serialize_ntriples(dataset: Dataset) -> str:
    """One line per triple, sorted by (s, p, o) ids."""
    key = dataset.dictionary.key
    lines = [f"{key(s)} {key(p)} {key(o)} ." for s, p, o in sorted(dataset.triples)]
    return "\n".join(lines) + "\n" if lines else ""


def read_ntriples(path, dataset: Optional[Dataset] = None) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_ntriples(fh, dataset)


def write_ntriples(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_ntriples(dataset))
