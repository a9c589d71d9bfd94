"""Desk-scale benchmark: original versus rewritten queries on the embedded engine."""

from __future__ import annotations

import json
import platform
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import ExecStats, IndexedStore, evaluate, result_multiset
from .pipeline import Summary
from .rewriter import RewriteConfig, rewrite
from .sparql import Query, UnsupportedFeature, parse_query, serialize_query


class EquivalenceViolation(AssertionError):
    """Original and rewritten queries disagree; carries both texts for inspection."""

    def __init__(self, name: str, original: str, rewritten: str):
        super().__init__(f"rewritten query {name!r} changes the result multiset")
        self.name = name
        self.original = original
        self.rewritten = rewritten

    def dump(self) -> str:
        return f"# query {self.name}\n{self.original}\n# rewritten\n{self.rewritten}"


@dataclass
class BenchEntry:
    name: str
    originalStats: ExecStats
    rewrittenStats: ExecStats
    speedup: float
    intermediateReduction: float
    decisions: dict
    medianWallTime: dict
    meanWallTime: dict

    def to_json(self) -> dict:
        return {"name": self.name, "originalStats": self.originalStats.to_json(),
                "rewrittenStats": self.rewrittenStats.to_json(), "speedup": self.speedup,
                "intermediateReduction": self.intermediateReduction, "decisions": self.decisions,
                "medianWallTime": self.medianWallTime, "meanWallTime": self.meanWallTime}


@dataclass
class BenchReport:
    entries: list[BenchEntry] = field(default_factory=list)
    unsupported: dict[str, str] = field(default_factory=dict)
    environment: dict = field(default_factory=dict)

    def entry(self, name: str) -> BenchEntry:
        return next(e for e in self.entries if e.name == name)

    def to_json(self) -> dict:
        return {"environment": self.environment, "queries": [e.to_json() for e in self.entries],
                "unsupported": self.unsupported}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def intermediate_reduction(original: ExecStats, rewritten: ExecStats) -> float:
    if original.totalIntermediate == 0:
        return 0.0
    return 1.0 - rewritten.totalIntermediate / original.totalIntermediate


def _timed(store: IndexedStore, query: Query, warmup: int, repeats: int) -> tuple[ExecStats, list[float]]:
    for _ in range(warmup):
        evaluate(store, query)
    times = []
    stats = None
    for _ in range(repeats):
        _, stats = evaluate(store, query)
        times.append(stats.wallTime)
    return stats, times


def bench_query(store: IndexedStore, summary: Summary, name: str, query: Query,
                config: RewriteConfig, warmup: int = 1, repeats: int = 10) -> BenchEntry:
    """Check equivalence, then time both forms; the reported wallTime is the median."""
    if repeats < 1:
        raise ValueError("need at least one timed repetition")
    rewritten, report = rewrite(query, summary.catalog, summary.trie, summary.stats, config)
    rows_q, _ = evaluate(store, query)
    rows_r, _ = evaluate(store, rewritten)
    if result_multiset(rows_q) != result_multiset(rows_r):
        raise EquivalenceViolation(name, serialize_query(query), serialize_query(rewritten))
    stats_q, times_q = _timed(store, query, warmup, repeats)
    stats_r, times_r = _timed(store, rewritten, warmup, repeats)
    med_q, med_r = statistics.median(times_q), statistics.median(times_r)
    stats_q.wallTime, stats_r.wallTime = med_q, med_r
    return BenchEntry(
        name=name, originalStats=stats_q, rewrittenStats=stats_r,
        speedup=med_q / med_r if med_r > 0 else 1.0,
        intermediateReduction=intermediate_reduction(stats_q, stats_r),
        decisions={d.var: d.decision for d in report.variables},
        medianWallTime={"original": med_q, "rewritten": med_r},
        meanWallTime={"original": statistics.fmean(times_q), "rewritten": statistics.fmean(times_r)})


def run_bench(store: IndexedStore, summary: Summary, queries: Sequence[tuple[str, str]],
              config: Optional[RewriteConfig] = None, warmup: int = 1, repeats: int = 10,
              environment: Optional[dict] = None) -> BenchReport:
    """Benchmark named SPARQL texts one after another.

    Queries outside the BGP fragment are listed under ``unsupported``; an
    equivalence violation aborts the whole run.
    """
    config = config or RewriteConfig()
    env = {"python": platform.python_version(), "warmup": warmup, "repeats": repeats,
           "config": config.to_json(), "numTriples": len(store.instance),
           "catalogEntries": len(summary.catalog)}
    env.update(environment or {})
    report = BenchReport(environment=env)
    for name, text in queries:
        try:
            query = parse_query(text)
        except UnsupportedFeature as exc:
            report.unsupported[name] = str(exc)
            continue
        report.entries.append(bench_query(store, summary, name, query, config, warmup, repeats))
    return report
