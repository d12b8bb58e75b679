"""Line-oriented N-Triples reader with per-line error recovery."""

from __future__ import annotations

import io
import re
from array import array
from os import PathLike
from typing import IO, Iterable, Iterator, NamedTuple, Union

import numpy as np

from .dictionary import Role, TermDictionary, build_dictionary
from .triplestore import TripleStore

IRI_PATTERN = r'<(?:[^\x00-\x20<>"{}|^`\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>'
BNODE_PATTERN = r"_:\w(?:[\w.\-]*[\w\-])?"
LITERAL_PATTERN = r'"(?:[^"\\\n\r]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^' + IRI_PATTERN + r")?"

_TOKEN = re.compile(
    rf"[ \t]*(?:(?P<iri>{IRI_PATTERN})|(?P<bnode>{BNODE_PATTERN})|(?P<literal>{LITERAL_PATTERN})|(?P<dot>\.)|(?P<comment>#.*))"
)
_TRAILING_SPACE = re.compile(r"[ \t]*\Z")

Source = Union[IO[bytes], IO[str], bytes, str, Iterable[Union[bytes, str]]]


class RawTriple(NamedTuple):
    subject: str
    predicate: str
    object: str
    line_no: int = 0

    @property
    def terms(self) -> tuple[str, str, str]:
        return self.subject, self.predicate, self.object

    def to_ntriples(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} .\n"


class LineError(NamedTuple):
    line_no: int
    reason: str

    def __str__(self) -> str:
        return f"line:{self.line_no} {self.reason}"


class NTriplesError(ValueError):
    def __init__(self, error: LineError):
        super().__init__(str(error))
        self.error = error


def parse_line(line: str) -> tuple[str, str, str] | None:
    """Terms of one line, or None for blank/comment lines. Raises ValueError with a reason."""
    tokens = []
    pos = 0
    end = len(line.rstrip("\r\n"))
    while pos < end:
        if _TRAILING_SPACE.match(line, pos, end):
            break
        m = _TOKEN.match(line, pos, end)
        if m is None or m.end() == pos:
            bad = pos + len(line[pos:end]) - len(line[pos:end].lstrip(" \t"))
            raise ValueError(f"unexpected character {line[bad]!r} at column {bad + 1}")
        if m.lastgroup == "comment":
            break
        tokens.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()

    if not tokens:
        return None
    dots = [i for i, (kind, _) in enumerate(tokens) if kind == "dot"]
    if not dots:
        raise ValueError("missing terminating '.'")
    if dots[0] != len(tokens) - 1:
        raise ValueError("unexpected content after '.'")
    terms = tokens[:-1]
    if len(terms) != 3:
        raise ValueError(f"expected 3 terms, found {len(terms)}")
    (sk, s), (pk, p), (_, o) = terms
    if sk == "literal":
        raise ValueError("literal in subject position")
    if pk != "iri":
        raise ValueError(f"predicate must be an IRI, found {'literal' if pk == 'literal' else 'blank node'}")
    return s, p, o


class NTriplesReader:
    """Iterate the triples of an N-Triples source.

    Malformed lines are collected in ``errors`` and skipped, or raise
    :class:`NTriplesError` when ``strict`` is set.
    """

    def __init__(self, source: Source, strict: bool = False):
        self.source = source
        self.strict = strict
        self.errors: list[LineError] = []

    def _lines(self) -> Iterator[Union[bytes, str]]:
        src = self.source
        if isinstance(src, (bytes, bytearray)):
            return iter(io.BytesIO(src))
        if isinstance(src, str):
            return iter(io.StringIO(src))
        return iter(src)

    def _fail(self, line_no: int, reason: str) -> None:
        err = LineError(line_no, reason)
        if self.strict:
            raise NTriplesError(err)
        self.errors.append(err)

    def __iter__(self) -> Iterator[RawTriple]:
        for line_no, line in enumerate(self._lines(), 1):
            if isinstance(line, (bytes, bytearray)):
                try:
                    line = line.decode("utf-8")
                except UnicodeDecodeError as exc:
                    self._fail(line_no, f"invalid UTF-8 at byte {exc.start}")
                    continue
            try:
                terms = parse_line(line)
            except ValueError as exc:
                self._fail(line_no, str(exc))
                continue
            if terms is not None:
                yield RawTriple(*terms, line_no)


def parse_ntriples(source: Source, strict: bool = False) -> NTriplesReader:
    return NTriplesReader(source, strict)


def deduplicate(triples: Iterable[RawTriple]) -> Iterator[RawTriple]:
    """Drop exact (byte-identical) repeats, keeping the first occurrence."""
    seen: set[tuple[str, str, str]] = set()
    for t in triples:
        key = (t.subject, t.predicate, t.object)
        if key not in seen:
            seen.add(key)
            yield t


def write_ntriples(triples: Iterable[RawTriple | tuple[str, str, str]], out: IO[str]) -> None:
    for t in triples:
        out.write(f"{t[0]} {t[1]} {t[2]} .\n")


def build_from_triples(triples: Iterable[tuple[str, str, str]], k: int = 2) -> tuple[TripleStore, TermDictionary]:
    """Dictionary-encode term triples and build the store. Duplicates are dropped."""
    triples = list(triples)
    dictionary = build_dictionary(triples)
    ids = np.array(list(dictionary.encode(triples)), dtype=np.int64).reshape(-1, 3)
    return TripleStore.build(ids, dictionary.sizes, k), dictionary


def build_from_file(path: str | PathLike, k: int = 2,
                    strict: bool = False) -> tuple[TripleStore, TermDictionary, list[LineError]]:
    """Two streaming passes over an N-Triples file: classify terms, then encode.

    Only the distinct terms and the packed ID triples are held in memory.
    """
    with open(path, "rb") as fh:
        reader = NTriplesReader(fh, strict)
        dictionary = build_dictionary(t.terms for t in reader)
    ids = array("q")
    with open(path, "rb") as fh:
        for t in NTriplesReader(fh, strict=False):
            ids.extend((dictionary.id_for(t.subject, Role.SUBJECT),
                        dictionary.id_for(t.predicate, Role.PREDICATE),
                        dictionary.id_for(t.object, Role.OBJECT)))
    arr = np.frombuffer(ids, dtype=np.int64).reshape(-1, 3) if len(ids) else np.zeros((0, 3), np.int64)
    return TripleStore.build(arr, dictionary.sizes, k), dictionary, reader.errors
