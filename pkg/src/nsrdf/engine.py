"""In-memory scan-join BGP evaluator with intermediate-result accounting.

Summary triples live in their own partition. Only patterns whose predicate
is the pivot predicate constant read it; variable-predicate patterns see the
instance data alone, so adding summaries never changes their answers.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from operator import itemgetter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .rdf import Dataset, Dictionary, Term
from .sparql import Query, TriplePattern, Var
from .summarizer import DEFAULT_PIVOT_PREDICATE


class ResultTooLarge(RuntimeError):
    """Raised when an evaluation exceeds its ``max_rows`` guard."""


class _Partition:
    """SPO, POS and OSP permutations as nested dicts with sorted leaves."""

    def __init__(self, triples: Iterable[tuple[int, int, int]]):
        spo: dict = {}
        pos: dict = {}
        osp: dict = {}
        self.triples = dict.fromkeys(triples)
        for s, p, o in self.triples:
            spo.setdefault(s, {}).setdefault(p, []).append(o)
            pos.setdefault(p, {}).setdefault(o, []).append(s)
            osp.setdefault(o, {}).setdefault(s, []).append(p)
        for index in (spo, pos, osp):
            for inner in index.values():
                for k, leaf in inner.items():
                    leaf.sort()
        self.spo, self.pos, self.osp = spo, pos, osp
        self.pred_count = {p: sum(len(v) for v in inner.values()) for p, inner in pos.items()}
        self._subject_count: dict[int, int] = {}
        self._object_count: dict[int, int] = {}

    def __len__(self):
        return len(self.triples)

    def count(self, s, p, o) -> int:
        """Number of triples matching the bound positions (None = free)."""
        if s is not None:
            if p is not None:
                if o is not None:
                    return 1 if (s, p, o) in self.triples else 0
                return len(self.spo.get(s, {}).get(p, ()))
            if o is not None:
                return len(self.osp.get(o, {}).get(s, ()))
            c = self._subject_count.get(s)
            if c is None:
                c = self._subject_count[s] = sum(len(v) for v in self.spo.get(s, {}).values())
            return c
        if p is not None:
            if o is not None:
                return len(self.pos.get(p, {}).get(o, ()))
            return self.pred_count.get(p, 0)
        if o is not None:
            c = self._object_count.get(o)
            if c is None:
                c = self._object_count[o] = sum(len(v) for v in self.osp.get(o, {}).values())
            return c
        return len(self.triples)

    def match(self, s, p, o) -> list[tuple[int, int, int]]:
        if s is not None:
            if p is not None:
                if o is not None:
                    return [(s, p, o)] if (s, p, o) in self.triples else []
                return [(s, p, x) for x in self.spo.get(s, {}).get(p, ())]
            if o is not None:
                return [(s, x, o) for x in self.osp.get(o, {}).get(s, ())]
            return [(s, q, x) for q, xs in self.spo.get(s, {}).items() for x in xs]
        if p is not None:
            if o is not None:
                return [(x, p, o) for x in self.pos.get(p, {}).get(o, ())]
            return [(x, p, y) for y, xs in self.pos.get(p, {}).items() for x in xs]
        if o is not None:
            return [(x, q, o) for x, qs in self.osp.get(o, {}).items() for q in qs]
        return sorted(self.triples)


class IndexedStore:
    """Instance partition plus a separately indexed NS-Triple partition."""

    def __init__(self, dictionary: Dictionary, instance: _Partition, ns: _Partition, pivot_predicate: str):
        self.dictionary = dictionary
        self.instance = instance
        self.ns = ns
        self.pivot_predicate = pivot_predicate
        self.pivot_id = dictionary.lookup(Term.iri(pivot_predicate))


def load(instance: Dataset, ns_triples: Optional[Dataset] = None,
         pivot_predicate: Optional[str] = None) -> IndexedStore:
    """Index both datasets over one merged dictionary."""
    dictionary = instance.dictionary.copy()
    ns_encoded: list[tuple[int, int, int]] = []
    if ns_triples is not None and len(ns_triples):
        key = ns_triples.dictionary.key
        intern = dictionary.intern_key
        ns_encoded = [(intern(key(s)), intern(key(p)), intern(key(o))) for s, p, o in ns_triples.triples]
        if pivot_predicate is None:
            preds = {p for _, p, _ in ns_triples.triples}
            if len(preds) == 1:
                pivot_predicate = ns_triples.dictionary.resolve(preds.pop()).lexical
    if pivot_predicate is None:
        pivot_predicate = DEFAULT_PIVOT_PREDICATE
    pivot_id = dictionary.lookup(Term.iri(pivot_predicate))
    ns_part = _Partition(t for t in ns_encoded if t[1] == pivot_id)
    return IndexedStore(dictionary, _Partition(instance.triples), ns_part, pivot_predicate)


@dataclass
class ExecStats:
    plan: list[int] = field(default_factory=list)
    perPatternCandidates: list[int] = field(default_factory=list)
    perJoinIntermediate: list[int] = field(default_factory=list)
    totalIntermediate: int = 0
    wallTime: float = 0.0
    rows: int = 0

    def to_json(self) -> dict:
        return asdict(self)


class _Compiled:
    """A pattern with constants resolved to ids; ``missing`` if any constant is unknown."""

    __slots__ = ("pattern", "index", "partition", "consts", "vars", "missing", "choices")

    def __init__(self, store: IndexedStore, query: Query, index: int):
        tp = query.patterns[index]
        self.pattern = tp
        self.index = index
        self.missing = False
        self.consts: list[Optional[int]] = []
        self.vars: list[Optional[Var]] = []
        self.choices: dict[Var, list[int]] = {}
        for term in tp:
            if isinstance(term, Var):
                self.consts.append(None)
                self.vars.append(term)
                if term in query.values:
                    ids = [store.dictionary.lookup(t) for t in query.values[term]]
                    self.choices[term] = sorted({i for i in ids if i is not None})
            else:
                tid = store.dictionary.lookup(term)
                if tid is None:
                    self.missing = True
                self.consts.append(tid)
                self.vars.append(None)
        pred = tp.p
        if isinstance(pred, Var) or store.pivot_id is None or self.consts[1] != store.pivot_id:
            self.partition = store.instance
        else:
            self.partition = store.ns

    def candidates(self) -> int:
        """Standalone match count, honoring membership constraints and repeated variables."""
        if self.missing:
            return 0
        names = [v for v in self.vars if v is not None]
        if not self.choices and len(set(names)) == len(names):
            return self.partition.count(*self.consts)
        return len(_join([()], self, {v: i for i, v in enumerate(dict.fromkeys(names))}))


def plan_join_order(patterns: Sequence[TriplePattern], estimate: Callable[[int], float]) -> list[int]:
    """Greedy left-deep order: cheapest pattern first, then cheapest connected one.

    ``estimate`` maps a pattern index to its estimated cardinality. Ties go to
    the earlier pattern; when nothing connects, the cheapest remaining
    pattern opens the next component.
    """
    remaining = list(range(len(patterns)))
    cost = {i: estimate(i) for i in remaining}
    order: list[int] = []
    bound: set[Var] = set()
    while remaining:
        connected = [i for i in remaining if bound & set(patterns[i].variables())]
        pool = connected or remaining
        best = min(pool, key=lambda i: (cost[i], i))
        order.append(best)
        remaining.remove(best)
        bound.update(patterns[best].variables())
    return order


def evaluate(store: IndexedStore, query: Query, max_rows: Optional[int] = None):
    """Evaluate ``query`` with bag semantics.

    Returns ``(rows, stats)`` where rows is a list of tuples of term ids in
    projection order.
    """
    start = time.perf_counter()
    compiled = [_Compiled(store, query, i) for i in range(len(query.patterns))]
    candidates = [c.candidates() for c in compiled]
    order = plan_join_order(query.patterns, lambda i: candidates[i])
    stats = ExecStats(plan=order, perPatternCandidates=candidates)
    projection = query.projected()
    slots: dict[Var, int] = {}
    for i in order:
        for v in query.patterns[i].variables():
            slots.setdefault(v, len(slots))
    rows: list[tuple] = [()]
    if any(c.missing for c in compiled):
        rows = []
    for i in order:
        if not rows:
            stats.perJoinIntermediate.append(0)
            continue
        rows = _join(rows, compiled[i], slots, max_rows)
        stats.perJoinIntermediate.append(len(rows))
    # rows hold values in slot order; slots are appended, so tuples grow left to right
    idx = [slots[v] for v in projection]
    if idx == list(range(len(slots))):
        out = rows
    elif len(idx) == 1:
        i = idx[0]
        out = [(r[i],) for r in rows]
    else:
        pick = itemgetter(*idx)
        out = [pick(r) for r in rows]
    stats.totalIntermediate = sum(stats.perJoinIntermediate)
    stats.rows = len(out)
    stats.wallTime = time.perf_counter() - start
    return out, stats


def _join(rows: list[tuple], step: _Compiled, slots: dict[Var, int],
          max_rows: Optional[int] = None) -> list[tuple]:
    """Extend every row with the matches of one pattern (index nested loop)."""
    width = len(rows[0])
    # per position: ('c', id) constant, ('b', slot) already bound, ('n', k) new var number k
    plan = []
    new_vars: list[Var] = []
    for const, var in zip(step.consts, step.vars):
        if var is None:
            plan.append(("c", const))
        elif slots[var] < width:
            plan.append(("b", slots[var]))
        elif var in new_vars:
            plan.append(("n", new_vars.index(var)))
        else:
            new_vars.append(var)
            plan.append(("n", len(new_vars) - 1))
    # new variables must be appended in slot order
    assert [slots[v] for v in new_vars] == list(range(width, width + len(new_vars)))
    new_pos = [tuple(j for j, (k, x) in enumerate(plan) if k == "n" and x == n) for n in range(len(new_vars))]
    constrained = [(n, step.choices[v]) for n, v in enumerate(new_vars) if v in step.choices]
    # with subject or object fixed the lookup is already narrow: filter instead of branching
    if plan[0][0] != "n" or plan[2][0] != "n":
        branch, filters = [], [(new_pos[n][0], set(vals)) for n, vals in constrained]
    else:
        branch, filters = constrained, []
    part = step.partition
    match = part.match
    out = []
    extend = out.extend
    static = [x if k == "c" else None for k, x in plan]
    bound_positions = [(j, x) for j, (k, x) in enumerate(plan) if k == "b"]
    repeated = any(len(ps) > 1 for ps in new_pos)
    single_new = [ps[0] for ps in new_pos]
    pick = itemgetter(*single_new) if len(single_new) > 1 else None
    if plan[1][0] == "c" and not branch and (plan[0][0] == "n") != (plan[2][0] == "n"):
        return _leaf_join(rows, plan, part, filters, max_rows)

    for row in rows:
        if max_rows is not None and len(out) > max_rows:
            raise ResultTooLarge(f"more than {max_rows} intermediate rows")
        key = list(static)
        for j, slot in bound_positions:
            key[j] = row[slot]
        if branch:
            keys = [key]
            for n, vals in branch:
                pos0 = new_pos[n][0]
                keys = [k[:pos0] + [val] + k[pos0 + 1:] for k in keys for val in vals]
        else:
            keys = [key]
        for k in keys:
            triples = match(k[0], k[1], k[2])
            if not triples:
                continue
            if repeated:
                triples = [t for t in triples if all(len({t[j] for j in ps}) == 1 for ps in new_pos)]
            for j, allowed in filters:
                triples = [t for t in triples if t[j] in allowed]
            if not new_vars:
                extend([row] * len(triples))
            elif len(single_new) == 1:
                j = single_new[0]
                extend([row + (t[j],) for t in triples])
            else:
                extend([row + pick(t) for t in triples])
    if max_rows is not None and len(out) > max_rows:
        raise ResultTooLarge(f"{len(out)} intermediate rows")
    return out


def _leaf_join(rows, plan, part: _Partition, filters, max_rows) -> list[tuple]:
    """Constant predicate, one end bound or constant, the other end a new variable.

    Reads index leaves directly instead of materializing triples.
    """
    (ks, xs), (_, p), (ko, xo) = plan
    if ko == "n":
        # subject known: leaves of spo[s][p] are the new objects
        known_kind, known = ks, xs
        leaf_of = lambda v: part.spo.get(v, {}).get(p, ())
    else:
        known_kind, known = ko, xo
        by_o = part.pos.get(p, {})
        leaf_of = lambda v: by_o.get(v, ())
    allowed = filters[0][1] if filters else None
    out: list[tuple] = []
    extend = out.extend
    if known_kind == "c":
        leaf = leaf_of(known)
        if allowed is not None:
            leaf = [x for x in leaf if x in allowed]
        for row in rows:
            extend([row + (x,) for x in leaf])
            if max_rows is not None and len(out) > max_rows:
                raise ResultTooLarge(f"more than {max_rows} intermediate rows")
        return out
    for row in rows:
        leaf = leaf_of(row[known])
        if not leaf:
            continue
        if allowed is not None:
            extend([row + (x,) for x in leaf if x in allowed])
        else:
            extend([row + (x,) for x in leaf])
        if max_rows is not None and len(out) > max_rows:
            raise ResultTooLarge(f"more than {max_rows} intermediate rows")
    return out


def evaluate_terms(store: IndexedStore, query: Query, max_rows: Optional[int] = None):
    """Like :func:`evaluate` but rows hold N-Triples term spellings."""
    rows, stats = evaluate(store, query, max_rows)
    key = store.dictionary.key
    return [tuple(key(x) for x in r) for r in rows], stats


def result_multiset(rows) -> Counter:
    return Counter(rows)


def format_tsv(store: IndexedStore, query: Query, rows) -> str:
    key = store.dictionary.key
    lines = ["\t".join(str(v) for v in query.projected())]
    lines += ["\t".join(key(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


def format_json(store: IndexedStore, query: Query, rows) -> str:
    key = store.dictionary.key
    names = [v.name for v in query.projected()]
    bindings = [dict(zip(names, (key(x) for x in r))) for r in rows]
    return json.dumps({"head": {"vars": names}, "results": bindings}, indent=1) + "\n"
