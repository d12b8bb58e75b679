import io
import random

import pytest

from k2triples.ingest import (
    LineError,
    NTriplesError,
    RawTriple,
    build_from_file,
    build_from_triples,
    deduplicate,
    parse_line,
    parse_ntriples,
    write_ntriples,
)


def test_minimal_line():
    assert list(parse_ntriples("<a> <b> <c> .\n")) == [RawTriple("<a>", "<b>", "<c>", 1)]


def test_literal_subject_is_error():
    reader = parse_ntriples('<a> <b> <c> .\n"lit" <b> <c> .\n<x> <y> <z> .\n')
    assert [t.subject for t in reader] == ["<a>", "<x>"]
    assert reader.errors == [LineError(2, "literal in subject position")]
    assert str(reader.errors[0]) == "line:2 literal in subject position"


def test_literal_in_predicate():
    with pytest.raises(ValueError, match="predicate must be an IRI"):
        parse_line('<a> "lit" <c> .')


@pytest.mark.parametrize("line,reason", [
    ("<a> <b> <c>", "missing terminating '.'"),
    ("<a> <b> .", "expected 3 terms, found 2"),
    ("<a> <b> <c> <d> .", "expected 3 terms, found 4"),
    ("<a> _:b <c> .", "predicate must be an IRI"),
    ("<a> <b> <c> . <d>", "unexpected content after '.'"),
    ("<a> <b> c .", "unexpected character 'c'"),
    ('<a> <b> "open .', "unexpected character"),
])
def test_malformed_lines(line, reason):
    with pytest.raises(ValueError, match=reason):
        parse_line(line)


@pytest.mark.parametrize("line,obj", [
    ('<s> <p> "hello"@en-GB .', '"hello"@en-GB'),
    ('<s> <p> "42"^^<http://www.w3.org/2001/XMLSchema#integer> .', '"42"^^<http://www.w3.org/2001/XMLSchema#integer>'),
    ('<s> <p> "say \\"hi\\"" .', '"say \\"hi\\""'),
    ("<s> <p> _:b0 .", "_:b0"),
    ("<s> <p> <o>. # trailing comment", "<o>"),
    ("<s>\t<p>\t<o>\t.", "<o>"),
])
def test_term_forms(line, obj):
    assert parse_line(line)[2] == obj


def test_blank_subject():
    assert parse_line("_:x <p> <o> .") == ("_:x", "<p>", "<o>")


def test_comments_and_blank_lines_skipped():
    src = b"# header\n\n   \n<a> <b> <c> .\r\n"
    reader = parse_ntriples(src)
    assert [t.line_no for t in reader] == [4]
    assert reader.errors == []


def test_strict_mode_aborts():
    reader = parse_ntriples("<a> <b> <c> .\nbad line\n<d> <e> <f> .\n", strict=True)
    it = iter(reader)
    assert next(it).subject == "<a>"
    with pytest.raises(NTriplesError, match="line:2"):
        next(it)


def test_invalid_utf8_reported():
    reader = parse_ntriples(b"<a> <b> \"\xff\" .\n<a> <b> <c> .\n")
    assert len(list(reader)) == 1
    assert reader.errors[0].line_no == 1
    assert "UTF-8" in reader.errors[0].reason


def _generated(seed, n=1000):
    r = random.Random(seed)
    terms = [f"<http://ex.org/r{i}>" for i in range(60)] + [f"_:b{i}" for i in range(10)]
    objects = terms + [f'"lit {i}"' for i in range(20)] + ['"x"@fr', '"5"^^<http://ex.org/int>']
    preds = [f"<http://ex.org/p{i}>" for i in range(8)]
    return [(r.choice(terms), r.choice(preds), r.choice(objects)) for _ in range(n)]


def test_generated_file_parses_to_generator_set():
    triples = _generated(1)
    text = "".join(f"{s} {p} {o} .\n" for s, p, o in triples)
    assert [t.terms for t in parse_ntriples(text.encode())] == triples


def test_parse_serialize_identity():
    first = list(parse_ntriples("".join(f"{s}  {p}\t{o}.\n" for s, p, o in _generated(2, 300))))
    buf = io.StringIO()
    write_ntriples(first, buf)
    again = list(parse_ntriples(buf.getvalue()))
    assert [t.terms for t in again] == [t.terms for t in first]
    assert "".join(t.to_ntriples() for t in first) == buf.getvalue()


def test_deduplicate():
    t = RawTriple("<a>", "<b>", "<c>", 1)
    assert list(deduplicate([t, t._replace(line_no=2)])) == [t]
    assert list(deduplicate([])) == []


def test_deduplicate_planted():
    r = random.Random(4)
    base = [RawTriple(*t, i) for i, t in enumerate(_generated(3, 300))]
    stream = base + [r.choice(base) for _ in range(200)]
    r.shuffle(stream)
    out = list(deduplicate(stream))
    assert sorted(t.terms for t in out) == sorted({t.terms for t in stream})
    assert list(deduplicate(out)) == out
    # first occurrences keep their relative order
    firsts = []
    seen = set()
    for t in stream:
        if t.terms not in seen:
            seen.add(t.terms)
            firsts.append(t)
    assert out == firsts


def test_literal_dedup_is_byte_exact():
    a = RawTriple("<s>", "<p>", '"1"^^<http://www.w3.org/2001/XMLSchema#integer>')
    b = RawTriple("<s>", "<p>", '"01"^^<http://www.w3.org/2001/XMLSchema#integer>')
    assert len(list(deduplicate([a, b]))) == 2


def test_build_from_file_drops_duplicates(tmp_path):
    path = tmp_path / "dup.nt"
    path.write_text("<a> <p> <b> .\n<a> <p> <b> .\nnot a triple\n<b> <p> <a> .\n")
    store, dictionary, errors = build_from_file(path)
    assert len(store) == 2
    assert dictionary.sizes == (2, 0, 0, 1)
    assert [e.line_no for e in errors] == [3]
    with pytest.raises(NTriplesError):
        build_from_file(path, strict=True)


def test_build_from_triples_matches_file(tmp_path):
    triples = _generated(5, 400)
    path = tmp_path / "g.nt"
    path.write_text("".join(f"{s} {p} {o} .\n" for s, p, o in triples))
    a, da, _ = build_from_file(path)
    b, db = build_from_triples(triples)
    assert da == db
    assert [t.to_bytes() for t in a.trees] == [t.to_bytes() for t in b.trees]
