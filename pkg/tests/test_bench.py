import json

import pytest

from conftest import read_query
from nsrdf import bench
from nsrdf.bench import EquivalenceViolation, bench_query, intermediate_reduction, run_bench
from nsrdf.engine import ExecStats, load
from nsrdf.pipeline import summarize
from nsrdf.rdf import Term
from nsrdf.rewriter import GUARANTEED_EMPTY, INJECTED, RewriteConfig, rewrite
from nsrdf.sparql import Query, TriplePattern, parse_query

M = "http://example.org/ms10/"


@pytest.fixture
def setup(ms10):
    summary = summarize(ms10, delta=0.2)
    return load(ms10, summary.ns_triples), summary


def test_reduction_formula():
    assert intermediate_reduction(ExecStats(totalIntermediate=0), ExecStats(totalIntermediate=5)) == 0.0
    assert intermediate_reduction(ExecStats(totalIntermediate=10), ExecStats(totalIntermediate=4)) == \
        pytest.approx(0.6)


def test_all_skipped_query_has_zero_reduction(setup):
    store, summary = setup
    entry = bench_query(store, summary, "reply", parse_query(read_query("ms10_reply.rq")), RewriteConfig(),
                        repeats=3)
    assert INJECTED not in entry.decisions.values()
    assert entry.intermediateReduction == 0.0
    assert entry.originalStats.rows == entry.rewrittenStats.rows == 1


def test_injected_query_entry(setup):
    store, summary = setup
    entry = bench_query(store, summary, "typevar", parse_query(read_query("ms10_typevar.rq")),
                        RewriteConfig(beta=1.5), repeats=3)
    assert entry.decisions["y"] == INJECTED
    assert entry.rewrittenStats.wallTime == entry.medianWallTime["rewritten"]
    assert entry.speedup > 0


def test_guaranteed_empty_returns_no_rows(setup):
    store, summary = setup
    q = parse_query(f"PREFIX m: <{M}>\nSELECT * {{ ?y m:follows ?a . ?y m:reply_of ?b }}")
    entry = bench_query(store, summary, "empty", q, RewriteConfig(), repeats=2)
    assert entry.decisions["y"] == GUARANTEED_EMPTY
    assert entry.rewrittenStats.rows == 0 == entry.originalStats.rows


def broken_rewrite(query, *args, **kwargs):
    q_r, report = rewrite(query, *args, **kwargs)
    extra = TriplePattern(query.variables()[0], Term.iri(M + "type"), Term.iri(M + "Nothing"))
    return Query(list(q_r.patterns) + [extra], q_r.projected(), q_r.values, q_r.prefixes), report


def test_violation_is_raised(setup, monkeypatch):
    store, summary = setup
    monkeypatch.setattr(bench, "rewrite", broken_rewrite)
    with pytest.raises(EquivalenceViolation) as err:
        bench_query(store, summary, "reply", parse_query(read_query("ms10_reply.rq")), RewriteConfig())
    assert "m:Nothing" in err.value.dump()


def test_report_json(setup):
    store, summary = setup
    queries = [(n, read_query(n)) for n in ("ms10_reply.rq", "ms10_typevar.rq", "D2.rq")]
    report = run_bench(store, summary, queries, RewriteConfig(beta=1.5), repeats=2, environment={"seed": 9})
    doc = json.loads(report.dumps())
    assert set(doc) == {"environment", "queries", "unsupported"}
    assert doc["environment"]["seed"] == 9 and doc["environment"]["numTriples"] == 10
    assert [q["name"] for q in doc["queries"]] == ["ms10_reply.rq", "ms10_typevar.rq"]
    for q in doc["queries"]:
        assert set(q["originalStats"]) == set(q["rewrittenStats"]) >= {"plan", "totalIntermediate", "wallTime"}
    assert list(doc["unsupported"]) == ["D2.rq"]
    assert report.entry("ms10_typevar.rq").decisions["y"] == INJECTED


def test_repeats_must_be_positive(setup):
    store, summary = setup
    with pytest.raises(ValueError):
        bench_query(store, summary, "q", parse_query(read_query("ms10_reply.rq")), RewriteConfig(), repeats=0)
