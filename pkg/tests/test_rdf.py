import os

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from nsrdf.rdf import (BNODE, IRI, LITERAL, Dataset, Dictionary, NTriplesError, Term, TermError, intern_term,
                       parse_ntriples, read_ntriples, serialize_ntriples, term_from_n3, write_ntriples)

EX = "http://example.org/ms10/"


# ---------------------------------------------------------------- terms

def test_term_constructors():
    assert Term.iri("http://a").kind == IRI
    assert Term.literal("x", lang="en").lang == "en"
    assert Term.bnode("b1").kind == BNODE
    assert Term.literal("x").is_literal


@pytest.mark.parametrize("bad", [
    lambda: Term.iri(""),
    lambda: Term.iri("http://a b"),
    lambda: Term.iri("http://a\nb"),
    lambda: Term.literal("x", datatype="http://dt", lang="en"),
    lambda: Term.bnode("-bad"),
    lambda: Term.literal("x", lang="en us"),
])
def test_malformed_terms_rejected(bad):
    with pytest.raises(TermError):
        bad()


def test_n3_spellings():
    assert Term.iri("http://a").n3() == "<http://a>"
    assert Term.literal('say "hi"\n').n3() == '"say \\"hi\\"\\n"'
    assert Term.literal("1", datatype="http://www.w3.org/2001/XMLSchema#int").n3() == \
        '"1"^^<http://www.w3.org/2001/XMLSchema#int>'
    assert Term.literal("chat", lang="fr").n3() == '"chat"@fr'
    assert Term.bnode("x").n3() == "_:x"


def test_term_from_n3_unescapes():
    assert term_from_n3('"a\\tb\\u00e9"') == Term.literal("a\tbé")
    assert term_from_n3("<http://a/\\u0062>") == Term.iri("http://a/b")


# ---------------------------------------------------------------- dictionary

def test_intern_idempotent_and_dense():
    ds = Dataset()
    a = intern_term(ds, Term.iri("a:a"))
    assert a == 0
    assert intern_term(ds, Term.iri("a:a")) == 0
    ids = {intern_term(ds, t) for t in (Term.iri("a:b"), Term.literal("c"), Term.bnode("d"))}
    assert ids == {1, 2, 3}


def test_resolve_inverts_intern():
    d = Dictionary()
    terms = [Term.iri("http://x"), Term.literal("x"), Term.literal("x", lang="en"), Term.bnode("x")]
    ids = [d.intern(t) for t in terms]
    assert [d.resolve(i) for i in ids] == terms
    assert len(set(ids)) == 4


node_strategy = st.one_of(
    st.builds(Term.iri, st.from_regex(r"http://[a-z]{1,6}/[a-zA-Z0-9_]{0,8}", fullmatch=True)),
    st.builds(Term.bnode, st.from_regex(r"[a-z][a-z0-9]{0,5}", fullmatch=True)),
)
term_strategy = st.one_of(
    node_strategy,
    st.builds(Term.literal, st.text(max_size=12)),
    st.builds(lambda v, l: Term.literal(v, lang=l), st.text(max_size=6), st.sampled_from(["en", "de-CH", "fr"])),
    st.builds(lambda v: Term.literal(v, datatype="http://www.w3.org/2001/XMLSchema#string"), st.text(max_size=6)),
)


@given(st.lists(term_strategy, max_size=30))
def test_dictionary_bijective(terms):
    d = Dictionary()
    ids = [d.intern(t) for t in terms]
    for t, i in zip(terms, ids):
        assert d.resolve(i) == t
        assert d.lookup(t) == i
    assert len(d) == len(set(terms))


# ---------------------------------------------------------------- parsing

def test_parse_empty():
    assert len(parse_ntriples("")) == 0
    assert len(parse_ntriples(b"")) == 0


def test_duplicates_collapse():
    text = "<http://u1> <http://p> <http://u2> .\n<http://u1> <http://p> <http://u2> .\n"
    assert len(parse_ntriples(text)) == 1


def test_comments_blank_lines_and_crlf():
    text = "# header\n\n<http://a> <http://p> \"x\"@en .\r\n   \n<http://a> <http://p> _:b1 .\r\n"
    ds = parse_ntriples(text)
    assert len(ds) == 2


def test_ms10_counts(ms10):
    assert ms10.num_triples == 10
    assert ms10.num_predicates == 5


@pytest.mark.parametrize("text,line", [
    ("<http://a> <http://p> <http://b> .\n<http://a> <http://p> .\n", 2),
    ('"lit" <http://p> <http://b> .\n', 1),
    ("<http://a> _:p <http://b> .\n", 1),
    ("<http://a> <http://p> <http://b>\n", 1),
    ("\n\n<> <http://p> <http://b> .\n", 3),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(NTriplesError) as err:
        parse_ntriples(text)
    assert err.value.line == line


def test_literal_subject_message():
    with pytest.raises(NTriplesError, match="literal in subject position"):
        parse_ntriples('"x" <http://p> <http://o> .')


def test_dataset_rejects_bad_positions():
    ds = Dataset()
    with pytest.raises(TermError):
        ds.add(Term.literal("x"), Term.iri("http://p"), Term.iri("http://o"))
    with pytest.raises(TermError):
        ds.add(Term.iri("http://s"), Term.bnode("p"), Term.iri("http://o"))


# ---------------------------------------------------------------- serialization

def test_serialize_empty_and_single():
    assert serialize_ntriples(Dataset()) == ""
    ds = parse_ntriples("<http://a> <http://p> <http://b> .")
    out = serialize_ntriples(ds)
    assert out.count("\n") == 1 and out.endswith(" .\n")


def test_ms10_roundtrip(ms10, tmp_path):
    text = serialize_ntriples(ms10)
    assert len(text.splitlines()) == 10
    assert parse_ntriples(text).term_triples() == ms10.term_triples()
    path = tmp_path / "ms10.nt"
    write_ntriples(ms10, path)
    assert read_ntriples(path).term_triples() == ms10.term_triples()


def test_escape_canonicalization():
    a = parse_ntriples('<http://a> <http://p> "caf\\u00E9" .')
    b = parse_ntriples('<http://a> <http://p> "café" .')
    assert a.term_triples() == b.term_triples()


triple_strategy = st.tuples(
    node_strategy,
    st.builds(Term.iri, st.from_regex(r"http://p/[a-z]{1,3}", fullmatch=True)),
    term_strategy,
)


@given(st.lists(triple_strategy, max_size=40))
def test_roundtrip_property(triples):
    ds = Dataset()
    for s, p, o in triples:
        ds.add(s, p, o)
    again = parse_ntriples(serialize_ntriples(ds))
    assert again.term_triples() == ds.term_triples()
    assert len(again) == len({(s, p, o) for s, p, o in triples})


@given(st.lists(triple_strategy, min_size=1, max_size=10), st.integers(1, 4))
def test_dedup_property(triples, k):
    ds = Dataset()
    for s, p, o in triples:
        ds.add(s, p, o)
    text = serialize_ntriples(ds) * k
    assert len(parse_ntriples(text)) == len(ds)


def test_fixture_file_is_plain_ntriples():
    with open(os.path.join(FIXTURES, "ms10.nt"), encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert all(line.endswith(" .") for line in lines)
    assert sum('"hello"' in line for line in lines) == 1
    assert all(EX in line for line in lines)
