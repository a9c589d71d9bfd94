import pytest
from hypothesis import given, strategies as st

from oracles import linear_minimal, linear_supersets
from nsrdf.metadata import (SetTrie, StatsError, build_frequent_stats, build_set_trie, estimate_ns_cardinality,
                            estimate_tp_cardinality, minimal_supersets, read_stats, superset_lookup, write_stats)
from nsrdf.rdf import Term
from nsrdf.sparql import TriplePattern, Var
from nsrdf.summarizer import CatalogEntry, build_catalog, build_pivot_map, emit_ns_triples

EX = "http://example.org/ms10/"


def iri(local):
    return Term.iri(EX + local)


@pytest.fixture
def ms10_catalog(ms10):
    return build_catalog(build_pivot_map(ms10), len(ms10), ms10.num_predicates)


def ids(catalog, *locals_):
    return [catalog.predicate_id(EX + x) for x in locals_]


def local_sets(catalog, entries):
    return sorted(sorted(i[len(EX):] for i in catalog.iris(e)) for e in entries)


# ---------------------------------------------------------------- set-trie

def test_empty_trie():
    trie = SetTrie()
    assert trie.entries() == [] and superset_lookup(trie, [1]) == []


def test_ms10_trie(ms10_catalog):
    trie = build_set_trie(ms10_catalog)
    assert trie.size == 4 and len(trie.entries()) == 4
    assert trie.node_count <= sum(len(e) for e in ms10_catalog.entries)
    for e in ms10_catalog.entries:
        assert trie.find(e.predicates) is e


def test_shared_prefix_node():
    trie = SetTrie()
    trie.insert(CatalogEntry((1,), "urn:nss:a", 1))
    trie.insert(CatalogEntry((1, 2), "urn:nss:b", 1))
    trie.insert(CatalogEntry((1, 3), "urn:nss:c", 1))
    assert list(trie.root.children) == [1]
    assert trie.node_count == 3


def test_duplicate_insert_rejected():
    trie = SetTrie()
    trie.insert(CatalogEntry((1, 2), "urn:nss:a", 1))
    with pytest.raises(ValueError):
        trie.insert(CatalogEntry((1, 2), "urn:nss:b", 1))


def test_superset_lookup_ms10(ms10_catalog):
    trie = build_set_trie(ms10_catalog)
    found = superset_lookup(trie, ids(ms10_catalog, "creator_of", "type", "reply_of"))
    assert local_sets(ms10_catalog, found) == [["content", "creator_of", "reply_of", "type"],
                                              ["creator_of", "reply_of", "type"]]
    assert [e.label for e in found] == sorted(e.label for e in found)
    assert len(superset_lookup(trie, ids(ms10_catalog, "type"))) == 4
    assert superset_lookup(trie, [10_000]) == []


def test_minimal_supersets_ms10(ms10_catalog):
    trie = build_set_trie(ms10_catalog)
    found = minimal_supersets(trie, ids(ms10_catalog, "creator_of", "type", "reply_of"))
    assert local_sets(ms10_catalog, found) == [["creator_of", "reply_of", "type"]]
    whole = ms10_catalog.entries[-1]
    assert minimal_supersets(trie, whole.predicates) == [whole]


def test_incomparable_minimal_supersets():
    trie = SetTrie()
    abc, abd = CatalogEntry((0, 1, 2), "urn:nss:abc", 1), CatalogEntry((0, 1, 3), "urn:nss:abd", 1)
    for e in (abc, abd, CatalogEntry((0, 1, 2, 3), "urn:nss:abcd", 1)):
        trie.insert(e)
    assert minimal_supersets(trie, [0, 1]) == [abc, abd]


families = st.lists(st.frozensets(st.integers(0, 31), min_size=1, max_size=8), max_size=120, unique=True)


@given(families, st.frozensets(st.integers(0, 31), min_size=1, max_size=4))
def test_trie_matches_linear_scan(family, query):
    entries = [CatalogEntry(tuple(sorted(s)), f"urn:nss:{i:05d}", 1) for i, s in enumerate(family)]
    trie = SetTrie()
    for e in entries:
        trie.insert(e)
    assert superset_lookup(trie, query) == linear_supersets(entries, query)
    assert minimal_supersets(trie, query) == linear_minimal(entries, query)


@given(families, st.frozensets(st.integers(0, 31), min_size=1, max_size=4), st.integers(0, 31))
def test_lookup_monotone(family, query, extra):
    entries = [CatalogEntry(tuple(sorted(s)), f"urn:nss:{i:05d}", 1) for i, s in enumerate(family)]
    trie = SetTrie()
    for e in entries:
        trie.insert(e)
    bigger = {e.label for e in superset_lookup(trie, query | {extra})}
    assert bigger <= {e.label for e in superset_lookup(trie, query)}


# ---------------------------------------------------------------- statistics

def test_ms10_stats(ms10):
    stats = build_frequent_stats(ms10, 0.2)
    assert stats.total_triples == 10
    assert {k[len(EX) + 1:-1]: v for k, v in stats.counts["P"].items()} == {"type": 4, "follows": 2, "creator_of": 2}
    assert stats.count("P", iri("reply_of")) is None
    assert stats.count("O", Term.literal("hello")) is None
    assert all(v >= 0.2 * 10 for pos in "SPO" for v in stats.counts[pos].values())


def test_stats_delta_one(ms10):
    stats = build_frequent_stats(ms10, 1.0)
    assert all(not stats.counts[pos] for pos in "SPO")


@pytest.mark.parametrize("delta", [0, -0.1, 1.5])
def test_stats_delta_range(ms10, delta):
    with pytest.raises(ValueError):
        build_frequent_stats(ms10, delta)


def test_literals_never_stored():
    from nsrdf.rdf import parse_ntriples
    ds = parse_ntriples('<http://a> <http://p> "x" .\n<http://b> <http://p> "x" .\n')
    assert build_frequent_stats(ds, 0.1).counts["O"] == {}


def test_tp_cardinality_examples(ms10):
    stats = build_frequent_stats(ms10, 0.2)
    y = Var("y")
    assert estimate_tp_cardinality(stats, TriplePattern(y, iri("type"), iri("Reply"))) == pytest.approx(0.8)
    assert estimate_tp_cardinality(stats, TriplePattern(y, iri("type"), Var("t"))) == pytest.approx(4)
    assert estimate_tp_cardinality(stats, TriplePattern(Var("x"), iri("reply_of"), y)) == pytest.approx(2)
    assert estimate_tp_cardinality(stats, TriplePattern(Var("s"), Var("p"), Var("o"))) == 10


def test_ns_cardinality(ms10_catalog):
    trie = build_set_trie(ms10_catalog)
    assert estimate_ns_cardinality([]) == 0
    found = superset_lookup(trie, ids(ms10_catalog, "creator_of", "type", "reply_of"))
    assert estimate_ns_cardinality(found) == 2
    assert estimate_ns_cardinality([CatalogEntry((1,), "urn:nss:x", 3)]) == 3


def test_ns_cardinality_equals_emitted_matches(ms10_catalog):
    ns = emit_ns_triples(ms10_catalog)
    trie = build_set_trie(ms10_catalog)
    for query in (["type"], ["creator_of", "type"], ["follows"], ["reply_of", "content"]):
        found = superset_lookup(trie, ids(ms10_catalog, *query))
        labels = {f"<{e.label}>" for e in found}
        assert estimate_ns_cardinality(found) == sum(o in labels for _, _, o in ns.term_triples())


def test_stats_file_roundtrip(ms10, tmp_path):
    stats = build_frequent_stats(ms10, 0.2)
    path = tmp_path / "stats.jsonl"
    write_stats(stats, path)
    loaded = read_stats(path)
    assert loaded.delta == 0.2 and loaded.total_triples == 10
    assert loaded.counts == stats.counts


@pytest.mark.parametrize("content", ["", "{}\n", '{"delta": 0.1, "totalTriples": 3}\n{"pos": "P"}\n'])
def test_bad_stats_file(tmp_path, content):
    path = tmp_path / "stats.jsonl"
    path.write_text(content)
    with pytest.raises(StatsError):
        read_stats(path)
