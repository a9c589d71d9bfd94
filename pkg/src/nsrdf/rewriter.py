"""Summary-aware query reformulation.

For each query variable with a large enough neighborhood, the catalog entries
containing it are looked up and an NS-Pattern is appended when its match
count undercuts the cheapest incident triple pattern.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .metadata import (FrequencyTable, SetTrie, estimate_ns_cardinality, estimate_tp_cardinality,
                       minimal_supersets, superset_lookup)
from .sparql import Query, QueryParseError, TriplePattern, UnsupportedFeature, Var, extract_query_ns, \
    parse_query, serialize_query
from .rdf import Term
from .summarizer import DEFAULT_PIVOT_PREDICATE, NO_LABEL, SummaryCatalog

INJECTED = "INJECTED"
SKIPPED_HIGH_SELECTIVE_TP = "SKIPPED_HIGH_SELECTIVE_TP"
SKIPPED_LOW_SELECTIVE_NSP = "SKIPPED_LOW_SELECTIVE_NSP"
SKIPPED_TOO_MANY_LABELS = "SKIPPED_TOO_MANY_LABELS"
SKIPPED_SMALL_NS = "SKIPPED_SMALL_NS"
SKIPPED_MAYBE_LITERAL = "SKIPPED_MAYBE_LITERAL"
GUARANTEED_EMPTY = "GUARANTEED_EMPTY"

# an incident pattern expected to yield under half a row already decides the query
HIGH_SELECTIVE_CARD = 0.5


class RewriteError(ValueError):
    pass


@dataclass
class RewriteConfig:
    beta: float = 1.0
    max_union_labels: int = 8
    min_query_ns_size: int = 2
    delta: Optional[float] = None
    pivot_predicate: str = DEFAULT_PIVOT_PREDICATE

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.max_union_labels < 1 or self.min_query_ns_size < 1:
            raise ValueError("label and size bounds must be positive")
        if self.delta is not None and not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")

    @classmethod
    def from_json(cls, data: dict) -> "RewriteConfig":
        keys = {"beta": "beta", "maxUnionLabels": "max_union_labels", "minQueryNsSize": "min_query_ns_size",
                "delta": "delta", "pivotPredicate": "pivot_predicate"}
        kwargs = {keys[k]: v for k, v in data.items() if k in keys}
        kwargs.update({k: v for k, v in data.items() if k in keys.values()})
        return cls(**kwargs)

    def to_json(self) -> dict:
        return {"beta": self.beta, "maxUnionLabels": self.max_union_labels,
                "minQueryNsSize": self.min_query_ns_size, "delta": self.delta,
                "pivotPredicate": self.pivot_predicate}


@dataclass
class VariableDecision:
    var: str
    queryNS: list[str]
    decision: str
    matchedLabels: list[str] = field(default_factory=list)
    minimalLabels: list[str] = field(default_factory=list)
    nsCardinality: Optional[int] = None
    minIncidentTpCardinality: Optional[float] = None


@dataclass
class RewriteReport:
    variables: list[VariableDecision] = field(default_factory=list)
    passthrough: bool = False
    reason: Optional[str] = None

    @property
    def injected(self) -> int:
        return sum(d.decision in (INJECTED, GUARANTEED_EMPTY) for d in self.variables)

    def decision(self, var: str) -> Optional[str]:
        for d in self.variables:
            if d.var == var:
                return d.decision
        return None

    def to_json(self) -> dict:
        return {"passthrough": self.passthrough, "reason": self.reason,
                "variables": [vars(d) for d in self.variables]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def gate(card_ns: float, card_min: float, beta: float) -> str:
    """Profitability decision for one variable with a non-empty label set."""
    if card_ns < beta * card_min:
        return INJECTED
    if card_min < HIGH_SELECTIVE_CARD:
        return SKIPPED_HIGH_SELECTIVE_TP
    return SKIPPED_LOW_SELECTIVE_NSP


def check_versions(catalog: SummaryCatalog, stats: FrequencyTable, config: RewriteConfig) -> None:
    if catalog.num_triples != stats.total_triples:
        raise RewriteError(f"catalog built over {catalog.num_triples} triples, statistics over {stats.total_triples}")
    if config.delta is not None and config.delta != stats.delta:
        raise RewriteError(f"configured delta {config.delta} differs from statistics delta {stats.delta}")


def _fresh_var(base: str, taken: set[str]) -> Var:
    name, k = f"nsl_{base}", 0
    while name in taken:
        k += 1
        name = f"nsl_{base}_{k}"
    taken.add(name)
    return Var(name)


def rewrite(query: Query, catalog: SummaryCatalog, trie: SetTrie, stats: FrequencyTable,
            config: Optional[RewriteConfig] = None) -> tuple[Query, RewriteReport]:
    config = config or RewriteConfig()
    check_versions(catalog, stats, config)
    pivot = config.pivot_predicate
    pivot_term = Term.iri(pivot)
    report = RewriteReport()
    added: list[TriplePattern] = []
    values = {v: list(vals) for v, vals in query.values.items()}
    taken = {v.name for v in query.variables()}
    subjects = {tp.s for tp in query.patterns if isinstance(tp.s, Var)}

    for var, iris in extract_query_ns(query).items():
        iris = tuple(i for i in iris if i != pivot)
        record = VariableDecision(var.name, list(iris), SKIPPED_SMALL_NS)
        report.variables.append(record)
        if len(iris) < config.min_query_ns_size:
            continue
        if var not in subjects:
            # object-only variables may bind literals, which carry no summary
            record.decision = SKIPPED_MAYBE_LITERAL
            continue
        ids = [catalog.predicate_id(i) for i in iris]
        matched = [] if None in ids else superset_lookup(trie, ids)
        record.matchedLabels = [e.label for e in matched]
        record.nsCardinality = estimate_ns_cardinality(matched)
        if not matched:
            record.decision = GUARANTEED_EMPTY
            added.append(TriplePattern(var, pivot_term, Term.iri(NO_LABEL)))
            continue
        record.minimalLabels = [e.label for e in minimal_supersets(trie, ids)]
        incident = [tp for tp in query.patterns if var in (tp.s, tp.o)]
        card_min = min(estimate_tp_cardinality(stats, tp) for tp in incident)
        record.minIncidentTpCardinality = card_min
        if len(matched) > config.max_union_labels:
            record.decision = SKIPPED_TOO_MANY_LABELS
            continue
        record.decision = gate(record.nsCardinality, card_min, config.beta)
        if record.decision != INJECTED:
            continue
        if len(matched) == 1:
            added.append(TriplePattern(var, pivot_term, Term.iri(matched[0].label)))
        else:
            label_var = _fresh_var(var.name, taken)
            added.append(TriplePattern(var, pivot_term, label_var))
            values[label_var] = [Term.iri(e.label) for e in matched]

    if not added:
        return query, report
    projection = query.projection if query.projection is not None else query.variables()
    rewritten = Query(list(query.patterns) + added, list(projection), values, dict(query.prefixes))
    return rewritten, report


def rewrite_text(text: str, catalog: SummaryCatalog, trie: SetTrie, stats: FrequencyTable,
                 config: Optional[RewriteConfig] = None) -> tuple[str, RewriteReport]:
    """Rewrite SPARQL text; unsupported queries come back unchanged and flagged."""
    try:
        query = parse_query(text)
    except UnsupportedFeature as exc:
        check_versions(catalog, stats, config or RewriteConfig())
        return text, RewriteReport(passthrough=True, reason=str(exc))
    rewritten, report = rewrite(query, catalog, trie, stats, config)
    return serialize_query(rewritten), report
