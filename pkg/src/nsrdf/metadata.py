"""Containment index over the catalog and delta-thresholded term statistics."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Iterable, Optional

from .rdf import BNODE, Dataset, Term
from .sparql import TriplePattern, Var
from .summarizer import CatalogEntry, SummaryCatalog

POSITIONS = ("S", "P", "O")


class _Node:
    __slots__ = ("children", "entry", "_keys")

    def __init__(self):
        self.children: dict[int, _Node] = {}
        self.entry: Optional[CatalogEntry] = None
        self._keys: Optional[list[int]] = None

    def keys(self) -> list[int]:
        if self._keys is None:
            self._keys = sorted(self.children)
        return self._keys


class SetTrie:
    """Trie over ascending predicate-id paths; each terminal node holds one entry."""

    def __init__(self):
        self.root = _Node()
        self.size = 0
        self.node_count = 0

    def insert(self, entry: CatalogEntry) -> None:
        node = self.root
        for p in entry.predicates:
            child = node.children.get(p)
            if child is None:
                child = node.children[p] = _Node()
                node._keys = None
                self.node_count += 1
            node = child
        if node.entry is not None:
            raise ValueError(f"duplicate recorded set for {entry.label} and {node.entry.label}")
        node.entry = entry
        self.size += 1

    def find(self, predicates: Iterable[int]) -> Optional[CatalogEntry]:
        node = self.root
        for p in predicates:
            node = node.children.get(p)
            if node is None:
                return None
        return node.entry

    def entries(self) -> list[CatalogEntry]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.entry is not None:
                out.append(node.entry)
            stack.extend(node.children.values())
        return out

    def supersets(self, query: tuple[int, ...]) -> list[CatalogEntry]:
        out = []
        stack = [(self.root, 0)]
        n = len(query)
        while stack:
            node, i = stack.pop()
            if i == n:
                sub = [node]
                while sub:
                    cur = sub.pop()
                    if cur.entry is not None:
                        out.append(cur.entry)
                    sub.extend(cur.children.values())
                continue
            target = query[i]
            for key in node.keys():
                if key > target:
                    break
                stack.append((node.children[key], i + 1 if key == target else i))
        return out


def build_set_trie(catalog: SummaryCatalog) -> SetTrie:
    trie = SetTrie()
    for entry in catalog.entries:
        trie.insert(entry)
    return trie


def superset_lookup(trie: SetTrie, query: Iterable[int]) -> list[CatalogEntry]:
    """All entries whose recorded set contains ``query``, ordered by label."""
    q = tuple(sorted(set(query)))
    return sorted(trie.supersets(q), key=lambda e: e.label)


def minimal_supersets(trie: SetTrie, query: Iterable[int]) -> list[CatalogEntry]:
    found = superset_lookup(trie, query)
    sets = [frozenset(e.predicates) for e in found]
    return [e for e, s in zip(found, sets) if not any(t < s for t in sets)]


@dataclass
class FrequencyTable:
    """Exact per-position counts of frequent non-literal terms.

    A term is stored for a position when its count / total_triples >= delta.
    Keys are canonical N-Triples spellings.
    """

    delta: float
    total_triples: int
    counts: dict[str, dict[str, int]] = field(default_factory=lambda: {k: {} for k in POSITIONS})

    def count(self, position: str, term: Term) -> Optional[int]:
        return self.counts[position].get(term.n3())

    def selectivity(self, position: str, term: Term) -> float:
        c = self.counts[position].get(term.n3())
        if c is None or not self.total_triples:
            return self.delta
        return c / self.total_triples


def _check_delta(delta: float) -> None:
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def build_frequent_stats(dataset: Dataset, delta: float) -> FrequencyTable:
    _check_delta(delta)
    total = len(dataset)
    literal = dataset.dictionary.literal_flags()
    per = [Counter(map(itemgetter(i), dataset.triples)) for i in range(3)]
    table = FrequencyTable(delta, total)
    key = dataset.dictionary.key
    # cheap integer prefilter; the exact ratio test decides at the boundary
    floor = int(delta * total) - 1
    for pos, counter in zip(POSITIONS, per):
        stored = table.counts[pos]
        for tid, c in counter.items():
            if c > floor and not literal[tid] and c / total >= delta:
                stored[key(tid)] = c
    return table


def estimate_tp_cardinality(stats: FrequencyTable, tp: TriplePattern) -> float:
    """|D| times the product of per-position selectivities of the constants."""
    card = float(stats.total_triples)
    for pos, term in zip(POSITIONS, tp):
        if not isinstance(term, Var):
            card *= stats.selectivity(pos, term)
    return card


def estimate_ns_cardinality(entries: Iterable[CatalogEntry]) -> int:
    """Number of pivots carrying any of the given labels."""
    return sum(e.frequency for e in entries)


def stats_jsonl(stats: FrequencyTable) -> str:
    lines = [json.dumps({"delta": stats.delta, "totalTriples": stats.total_triples})]
    for pos in POSITIONS:
        for key in sorted(stats.counts[pos]):
            if key.startswith("_:"):
                row = {"pos": pos, "bnode": key[2:], "count": stats.counts[pos][key]}
            else:
                row = {"pos": pos, "iri": key[1:-1], "count": stats.counts[pos][key]}
            lines.append(json.dumps(row))
    return "\n".join(lines) + "\n"


def write_stats(stats: FrequencyTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(stats_jsonl(stats))


class StatsError(ValueError):
    pass


def read_stats(path) -> FrequencyTable:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise StatsError(f"{path}: empty statistics file")
    try:
        header = json.loads(lines[0])
        table = FrequencyTable(float(header["delta"]), int(header["totalTriples"]))
        for line in lines[1:]:
            row = json.loads(line)
            term = Term(BNODE, row["bnode"]) if "bnode" in row else Term.iri(row["iri"])
            table.counts[row["pos"]][term.n3()] = int(row["count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise StatsError(f"{path}: malformed statistics ({exc!r})") from exc
    return table
