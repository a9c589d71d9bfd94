"""Neighborhood summaries: pivot map, catalog, refinement and NS-Triples."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import __version__
from .rdf import Dataset, Dictionary, Term, TermError

LABEL_PREFIX = "urn:nss:"
DEFAULT_PIVOT_PREDICATE = "urn:nss:pivot"
# Never produced by canonical_label: its suffix is not ten hex characters.
NO_LABEL = "urn:nss:none"


class CatalogError(ValueError):
    pass


@dataclass
class PivotMap:
    """Pivot id -> ascending tuple of incident predicate ids."""

    summaries: dict[int, tuple[int, ...]]
    dictionary: Dictionary

    def __len__(self):
        return len(self.summaries)

    def __getitem__(self, pivot: int) -> tuple[int, ...]:
        return self.summaries[pivot]


def build_pivot_map(dataset: Dataset) -> PivotMap:
    """Collect the distinct predicates incident to every subject and non-literal object.

    One pass over the triples ORs a predicate bit into a per-term mask; the
    handful of distinct masks are decoded into id tuples afterwards.
    """
    triples = dataset.triples
    predicates = sorted({p for _, p, _ in triples})
    bit = {p: 1 << i for i, p in enumerate(predicates)}
    literal = dataset.dictionary.literal_flags()
    masks = [0] * len(dataset.dictionary)
    for s, p, o in triples:
        b = bit[p]
        masks[s] |= b
        # literals are never pivots
        if not literal[o]:
            masks[o] |= b
    decoded: dict[int, tuple[int, ...]] = {}
    summaries = {}
    for v, m in enumerate(masks):
        if m:
            ps = decoded.get(m)
            if ps is None:
                ps = decoded[m] = _decode_mask(m, predicates)
            summaries[v] = ps
    return PivotMap(summaries, dataset.dictionary)


def _decode_mask(mask: int, predicates: list[int]) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(predicates[low.bit_length() - 1])
        mask ^= low
    return tuple(out)


def canonical_label(predicate_iris: Iterable[str]) -> str:
    iris = set(predicate_iris)
    if not iris:
        raise CatalogError("cannot label an empty summary")
    for iri in iris:
        try:
            Term.iri(iri)
        except TermError as exc:
            raise CatalogError(str(exc)) from None
    payload = "\n".join(sorted(iris)).encode("utf-8")
    return LABEL_PREFIX + hashlib.sha256(payload).hexdigest()[:10]


@dataclass
class CatalogEntry:
    predicates: tuple[int, ...]
    label: str
    frequency: int

    def __len__(self):
        return len(self.predicates)


@dataclass
class SummaryCatalog:
    """Distinct summaries with labels and pivot frequencies.

    ``assignment`` maps each pivot to the index of the entry whose recorded
    set it carries. Catalogs loaded from disk have no assignment.
    """

    entries: list[CatalogEntry]
    dictionary: Dictionary
    assignment: dict[int, int] = field(default_factory=dict)
    total_pivots: int = 0
    num_triples: int = 0
    num_predicates: int = 0

    def __len__(self):
        return len(self.entries)

    def iris(self, entry: CatalogEntry) -> list[str]:
        return sorted(self.dictionary.resolve(p).lexical for p in entry.predicates)

    def predicate_id(self, iri: str) -> Optional[int]:
        return self.dictionary.lookup(Term.iri(iri))

    def by_label(self) -> dict[str, CatalogEntry]:
        return {e.label: e for e in self.entries}

    def recorded(self, pivot: int) -> tuple[int, ...]:
        return self.entries[self.assignment[pivot]].predicates


def _entry_sort_key(dictionary: Dictionary, predicates: tuple[int, ...]):
    return len(predicates), sorted(dictionary.resolve(p).lexical for p in predicates)


def build_catalog(pivot_map: PivotMap, num_triples: int = 0, num_predicates: int = 0) -> SummaryCatalog:
    dictionary = pivot_map.dictionary
    groups: dict[tuple[int, ...], list[int]] = {}
    for pivot, ns in pivot_map.summaries.items():
        members = groups.get(ns)
        if members is None:
            groups[ns] = [pivot]
        else:
            members.append(pivot)
    order = sorted(groups, key=lambda ns: _entry_sort_key(dictionary, ns))
    entries = []
    assignment = {}
    used: set[str] = set()
    for index, ns in enumerate(order):
        label = _unique_label(canonical_label(dictionary.resolve(p).lexical for p in ns), used)
        entries.append(CatalogEntry(ns, label, len(groups[ns])))
        for pivot in groups[ns]:
            assignment[pivot] = index
    return SummaryCatalog(entries, dictionary, assignment, len(pivot_map), num_triples, num_predicates)


def _unique_label(base: str, used: set[str]) -> str:
    label, k = base, 0
    while label in used:
        k += 1
        label = f"{base}-{k}"
    used.add(label)
    return label


def refine_catalog(catalog: SummaryCatalog, max_entries: int) -> SummaryCatalog:
    """Merge low-frequency entries into their minimal strict superset.

    Entries are kept in catalog order, which already sorts by (size,
    lexicographic IRIs); the lowest-index strict superset is therefore a
    minimal one and the tie-breaks fall out of index order. Stops early when
    no remaining entry has a strict superset.
    """
    if max_entries < 1:
        raise CatalogError("max_entries must be at least 1")
    n = len(catalog.entries)
    if n <= max_entries:
        return catalog
    bit = {p: i for i, p in enumerate(sorted({p for e in catalog.entries for p in e.predicates}))}
    masks = []
    for entry in catalog.entries:
        mask = 0
        for p in entry.predicates:
            mask |= 1 << bit[p]
        masks.append(mask)
    freq = [e.frequency for e in catalog.entries]
    alive = [True] * n
    absorbed_into = list(range(n))

    def minimal_superset(i):
        mi = masks[i]
        for j in range(i + 1, n):
            if alive[j] and masks[j] != mi and masks[j] & mi == mi:
                return j
        return None

    target = [minimal_superset(i) for i in range(n)]
    count = n
    while count > max_entries:
        best = None
        for i in range(n):
            if alive[i] and target[i] is not None and (best is None or freq[i] < freq[best]):
                best = i
        if best is None:
            break
        j = target[best]
        alive[best] = False
        freq[j] += freq[best]
        absorbed_into[best] = j
        count -= 1
        for i in range(n):
            if alive[i] and target[i] == best:
                target[i] = minimal_superset(i)
        target[best] = None

    def root(i):
        while absorbed_into[i] != i:
            i = absorbed_into[i]
        return i

    new_index = {}
    entries = []
    for i in range(n):
        if alive[i]:
            new_index[i] = len(entries)
            old = catalog.entries[i]
            entries.append(CatalogEntry(old.predicates, old.label, freq[i]))
    remap = [new_index[root(i)] for i in range(n)]
    assignment = {pivot: remap[i] for pivot, i in catalog.assignment.items()}
    return SummaryCatalog(entries, catalog.dictionary, assignment, catalog.total_pivots,
                          catalog.num_triples, catalog.num_predicates)


def emit_ns_triples(catalog: SummaryCatalog, pivot_predicate: str = DEFAULT_PIVOT_PREDICATE) -> Dataset:
    """One ``<pivot> <pivot_predicate> <label>`` triple per pivot."""
    source = catalog.dictionary
    out = Dataset()
    intern = out.dictionary.intern_key
    pred = intern(Term.iri(pivot_predicate).n3())
    labels = [intern(Term.iri(e.label).n3()) for e in catalog.entries]
    add = out.triples.setdefault
    for pivot, index in catalog.assignment.items():
        add((intern(source.key(pivot)), pred, labels[index]))
    return out


def write_catalog(catalog: SummaryCatalog, path, pivot_predicate: str = DEFAULT_PIVOT_PREDICATE) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(catalog_jsonl(catalog, pivot_predicate))


def catalog_jsonl(catalog: SummaryCatalog, pivot_predicate: str = DEFAULT_PIVOT_PREDICATE) -> str:
    header = {
        "totalPivots": catalog.total_pivots,
        "numTriples": catalog.num_triples,
        "numPredicates": catalog.num_predicates,
        "pivotPredicate": pivot_predicate,
        "version": __version__,
    }
    lines = [json.dumps(header)]
    for entry in catalog.entries:
        lines.append(json.dumps({"label": entry.label, "freq": entry.frequency,
                                 "predicates": catalog.iris(entry)}))
    return "\n".join(lines) + "\n"


def read_catalog(path) -> tuple[SummaryCatalog, dict]:
    """Load a catalog file; returns the catalog and its header."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise CatalogError(f"{path}: empty catalog file")
    try:
        return _parse_catalog(lines, path)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CatalogError):
            raise
        raise CatalogError(f"{path}: malformed catalog ({exc!r})") from exc


def _parse_catalog(lines: list[str], path) -> tuple[SummaryCatalog, dict]:
    header = json.loads(lines[0])
    if "totalPivots" not in header:
        raise CatalogError(f"{path}: missing header line")
    dictionary = Dictionary()
    rows = [json.loads(line) for line in lines[1:]]
    for iri in sorted({iri for row in rows for iri in row["predicates"]}):
        dictionary.intern(Term.iri(iri))
    entries = []
    for row in rows:
        preds = tuple(sorted(dictionary.lookup(Term.iri(iri)) for iri in row["predicates"]))
        entries.append(CatalogEntry(preds, row["label"], int(row["freq"])))
    if len({e.label for e in entries}) != len(entries):
        raise CatalogError(f"{path}: duplicate labels")
    catalog = SummaryCatalog(entries, dictionary, {}, int(header["totalPivots"]),
                             int(header.get("numTriples", 0)), int(header.get("numPredicates", 0)))
    return catalog, header
