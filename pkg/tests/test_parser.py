import gzip

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdf2gml.errors import IoError, RdfSyntaxError, UnsupportedFormat
from rdf2gml.parser import parse_dump, parse_text
from rdf2gml.terms import Term, Triple

XSD_INT = "http://www.w3.org/2001/XMLSchema#integer"


def triple_set(store):
    return set((t.subject, t.predicate, t.object) for t in store.triples())


def test_typed_literal_line():
    r = parse_text('<http://ex/a> <http://ex/p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .\n')
    [t] = list(r.store.triples())
    assert t.subject == Term.iri("http://ex/a")
    assert t.predicate == Term.iri("http://ex/p")
    assert t.object == Term.literal("5", datatype=XSD_INT)


def test_empty_file():
    assert len(parse_text("").store) == 0


def test_small_fixture_dedup(fixtures_dir):
    result = parse_dump(fixtures_dir / "small.nt")
    assert len(result.store) == 28  # 30 statements, 2 duplicates
    assert result.issues == []


def test_comment_and_blank_lines():
    r = parse_text("# a comment\n\n<http://ex/a> <http://ex/p> <http://ex/b> . # trailing\n")
    assert len(r.store) == 1


def test_escapes_roundtrip_values():
    r = parse_text('<http://ex/a> <http://ex/p> "tab\\there \\"q\\" \\u00e9" .\n')
    [t] = list(r.store.triples())
    assert t.object.value == 'tab\there "q" é'


def test_language_tag():
    r = parse_text('<http://ex/a> <http://ex/p> "bonjour"@fr .\n')
    [t] = list(r.store.triples())
    assert t.object.lang == "fr"
    assert t.object.datatype is None


def test_blank_nodes_renamed_in_input_order():
    r = parse_text(
        "_:zz <http://ex/p> <http://ex/a> .\n_:aa <http://ex/p> _:zz .\n"
    )
    subjects = [t.subject.value for t in r.store.triples()]
    assert set(subjects) == {"b0", "b1"}
    # _:zz was seen first, so it becomes b0
    [t0] = [t for t in r.store.triples() if t.object == Term.iri("http://ex/a")]
    assert t0.subject.value == "b0"


def test_strict_mode_reports_line_numbers():
    with pytest.raises(RdfSyntaxError) as exc:
        parse_text('<http://ex/a> <http://ex/p> <http://ex/b> .\nnot a triple\n')
    assert exc.value.line == 2


def test_lenient_mode_skips_and_logs(fixtures_dir):
    good = (fixtures_dir / "small.nt").read_text()
    lines = good.splitlines()
    bad = ["this is noise", "<http://ex/a> missing-object .", '<http://ex/a> <http://ex/p> "unterminated .',
           "<no-subject> oops", "<http://ex/a> <http://ex/p> <http://ex/b> extra ."]
    corpus = []
    positions = [3, 9, 15, 21, 27]
    it = iter(lines)
    for i in range(len(lines) + len(bad)):
        if positions and i == positions[0]:
            corpus.append(bad[len(bad) - len(positions)])
            positions.pop(0)
        else:
            corpus.append(next(it))
    result = parse_text("\n".join(corpus) + "\n", lenient=True)
    assert len(result.issues) == 5
    assert [i.line for i in result.issues] == [4, 10, 16, 22, 28]
    assert len(result.store) == 28


def test_gzip_transparent(tmp_path, fixtures_dir):
    data = (fixtures_dir / "small.nt").read_bytes()
    gz = tmp_path / "small.nt.gz"
    gz.write_bytes(gzip.compress(data))
    assert len(parse_dump(gz).store) == 28


def test_unsupported_format(tmp_path):
    p = tmp_path / "dump.rdfxml"
    p.write_text("")
    with pytest.raises(UnsupportedFormat):
        parse_dump(p)


def test_missing_file():
    with pytest.raises(IoError):
        parse_dump("/nonexistent/dump.nt")


def test_turtle_fixture(fixtures_dir):
    store = parse_dump(fixtures_dir / "sample.ttl").store
    ex = "http://ttl.example/"
    xsd = "http://www.w3.org/2001/XMLSchema#"
    books = store.match(p=Term.iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), o=Term.iri(ex + "Book"))
    assert len(books) == 2
    [pages] = store.objects_of(Term.iri(ex + "book2"), Term.iri(ex + "pages"))
    assert pages == Term.literal("96", datatype=XSD_INT)
    [title] = store.objects_of(Term.iri(ex + "book2"), Term.iri(ex + "title"))
    assert title.lang == "fr"
    [price] = store.objects_of(Term.iri(ex + "book1"), Term.iri(ex + "price"))
    assert price == Term.literal("19.95", datatype=xsd + "decimal")
    [in_print] = store.objects_of(Term.iri(ex + "book1"), Term.iri(ex + "inPrint"))
    assert in_print == Term.literal("true", datatype=xsd + "boolean")
    [published] = store.objects_of(Term.iri(ex + "book1"), Term.iri(ex + "published"))
    assert published == Term.literal("1999-11-09", datatype=xsd + "date")
    subjects = store.objects_of(Term.iri(ex + "book1"), Term.iri(ex + "subject"))
    assert {s.value for s in subjects} == {ex + "web", ex + "history"}
    holds = store.match(p=Term.iri(ex + "holds"))
    assert len(holds) == 2 and all(t.subject.value == "b0" for t in holds)


def test_iri_unicode_escape():
    r = parse_text("<http://ex/\\u0041bc> <http://ex/p> <http://ex/o> .\n")
    [t] = list(r.store.triples())
    assert t.subject.value == "http://ex/Abc"


def test_turtle_double_shorthand():
    r = parse_text("@prefix ex: <http://ex/> .\nex:a ex:v 1.5e3 .\n", format="turtle")
    [t] = list(r.store.triples())
    assert t.object == Term.literal("1.5e3", datatype="http://www.w3.org/2001/XMLSchema#double")


def test_turtle_undefined_prefix_fails():
    with pytest.raises(RdfSyntaxError):
        parse_text("nope:a <http://ex/p> <http://ex/b> .", format="turtle")


@pytest.mark.parametrize("name", ["small.nt", "academic.nt", "chain.nt", "sample.ttl"])
def test_roundtrip_fixtures(name, fixtures_dir, tmp_path):
    first = parse_dump(fixtures_dir / name).store
    out = tmp_path / "roundtrip.nt"
    out.write_text(first.serialize(), encoding="utf-8")
    second = parse_dump(out).store
    assert triple_set(first) == triple_set(second)


_iri = st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")), min_size=1, max_size=8).map(
    lambda s: Term.iri("http://fuzz.example/" + s)
)
_literal = st.builds(
    Term.literal,
    st.text(max_size=20),
    datatype=st.one_of(st.none(), st.just(XSD_INT)),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_iri, _iri, st.one_of(_iri, _literal)), max_size=25))
def test_serialize_parse_roundtrip_random(triples):
    from rdf2gml.store import TripleStore

    store = TripleStore()
    for s, p, o in triples:
        store.add(Triple(s, p, o))
    store.finalize()
    reparsed = parse_text(store.serialize()).store
    assert triple_set(store) == triple_set(reparsed)
