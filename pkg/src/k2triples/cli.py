"""``k2triples`` command line: build, query, join, stats.

Exit codes: 0 success, 1 usage, 2 I/O or input, 3 corrupt store.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from .dictionary import Role, TermDictionary
from .ingest import BNODE_PATTERN, IRI_PATTERN, LITERAL_PATTERN, NTriplesError, build_from_file
from .joins import JoinError, JoinQuery, classify, execute
from .triplestore import StoreFormatError, TriplePattern, TripleStore, dump_store, is_var, load_store, \
    triples_section_size

log = logging.getLogger("k2triples")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CORRUPT = 0, 1, 2, 3

_ITEM = re.compile(
    rf"\s*(?:(?P<var>\?[A-Za-z_]\w*)|(?P<id>#\d+)|(?P<term>{IRI_PATTERN}|{BNODE_PATTERN}|{LITERAL_PATTERN}))\s*"
)
_ROLES = (Role.SUBJECT, Role.PREDICATE, Role.OBJECT)


class UsageError(Exception):
    pass


class UnknownTerm(Exception):
    pass


@dataclass
class StoreStats:
    triples: int
    so: int
    s: int
    o: int
    p: int
    predicate_ones: list[int] = field(default_factory=list)
    predicate_bits: list[int] = field(default_factory=list)
    total_bytes: int = 0
    triples_bytes: int = 0

    @property
    def bits_per_triple(self) -> float | None:
        if not self.triples:
            return None
        return 8 * self.triples_bytes / self.triples

    def render(self) -> str:
        bpt = "n/a" if self.bits_per_triple is None else f"{self.bits_per_triple:.3f}"
        lines = [
            f"{self.triples} triples, |SO|={self.so} |S|={self.s} |O|={self.o} |P|={self.p}",
            f"{self.total_bytes} bytes on disk, {self.triples_bytes} in the triples section, {bpt} bits/triple",
            f"triples={self.triples}",
            f"so={self.so}",
            f"s={self.s}",
            f"o={self.o}",
            f"p={self.p}",
            f"total_bytes={self.total_bytes}",
            f"triples_bytes={self.triples_bytes}",
            f"bits_per_triple={bpt}",
        ]
        for i, (ones, bits) in enumerate(zip(self.predicate_ones, self.predicate_bits), 1):
            lines.append(f"predicate.{i}.ones={ones}")
            lines.append(f"predicate.{i}.bits={bits}")
        return "\n".join(lines)


def store_stats(store: TripleStore, dictionary: TermDictionary | None = None) -> StoreStats:
    so, s, o, p = store.sizes
    return StoreStats(
        triples=len(store), so=so, s=s, o=o, p=p,
        predicate_ones=[t.ones for t in store.trees],
        predicate_bits=[t.bit_size().serialized_bits for t in store.trees],
        total_bytes=len(dump_store(store, dictionary)),
        triples_bytes=triples_section_size(store),
    )


def parse_pattern_text(text: str) -> list[tuple[str, str]]:
    """Split ``(a, b, c)`` into three ``(kind, value)`` items; kind is var, id or term."""
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    items = []
    pos = 0
    while True:
        m = _ITEM.match(body, pos)
        if m is None:
            raise UsageError(f"cannot parse pattern {text!r} near {body[pos:pos + 20]!r}")
        kind = m.lastgroup
        value = m.group(kind)
        items.append((kind, value[1:] if kind in ("var", "id") else value))
        pos = m.end()
        if pos == len(body):
            break
        if body[pos] != ",":
            raise UsageError(f"expected ',' in pattern {text!r} at {body[pos:pos + 20]!r}")
        pos += 1
    if len(items) != 3:
        raise UsageError(f"pattern {text!r} has {len(items)} items, expected 3")
    return items


def resolve_pattern(text: str, store: TripleStore, dictionary: TermDictionary | None) -> TriplePattern:
    slots = []
    for (kind, value), role in zip(parse_pattern_text(text), _ROLES):
        if kind == "var":
            slots.append(value)
        elif kind == "id":
            ident = int(value)
            if ident < 1:
                raise UsageError(f"ids are 1-based, got #{ident}")
            if role is Role.PREDICATE and ident > store.num_predicates:
                raise UsageError(f"predicate #{ident} outside [1, {store.num_predicates}]")
            slots.append(ident)
        else:
            ident = dictionary.id_for(value, role) if dictionary is not None else None
            if ident is None:
                raise UnknownTerm(f"{value} is not a known {role.value}")
            slots.append(ident)
    return TriplePattern(*slots)


def _render(value: int, role: Role, dictionary: TermDictionary | None, ids: bool) -> str:
    if ids or dictionary is None:
        return str(value)
    return dictionary.term_for(value, role)


def _load(path: str) -> tuple[TripleStore, TermDictionary | None]:
    return load_store(Path(path).read_bytes())


def cmd_build(args, out: TextIO) -> int:
    try:
        store, dictionary, errors = build_from_file(args.input, k=args.k, strict=args.strict)
    except NTriplesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for err in errors:
        print(err, file=sys.stderr)
    Path(args.output).write_bytes(dump_store(store, dictionary))
    print(store_stats(store, dictionary).render(), file=out)
    return EXIT_OK


def cmd_query(args, out: TextIO) -> int:
    store, dictionary = _load(args.store)
    try:
        pattern = resolve_pattern(args.pattern, store, dictionary)
    except UnknownTerm as exc:
        log.warning("%s; no results", exc)
        if args.count:
            print(0, file=out)
        return EXIT_OK
    start = time.perf_counter()
    rows = list(store.solve(pattern))
    elapsed = time.perf_counter() - start
    if args.count:
        print(len(rows), file=out)
    else:
        for row in rows:
            print("\t".join(_render(v, r, dictionary, args.ids) for v, r in zip(row, _ROLES)), file=out)
    if args.time:
        print(f"time_us={elapsed * 1e6:.1f}", file=sys.stderr)
    return EXIT_OK


def _shape(text: str) -> TriplePattern:
    """The pattern's variable structure, constants replaced by a placeholder ID."""
    return TriplePattern(*(v if kind == "var" else 1 for kind, v in parse_pattern_text(text)))


def cmd_join(args, out: TextIO) -> int:
    store, dictionary = _load(args.store)
    query = JoinQuery(_shape(args.pattern1), _shape(args.pattern2))
    try:
        query = JoinQuery(resolve_pattern(args.pattern1, store, dictionary),
                          resolve_pattern(args.pattern2, store, dictionary))
        unknown = None
    except UnknownTerm as exc:
        unknown = exc
    if args.explain:
        print(f"{query.axis.value} / {classify(query)}", file=out)
    print("\t".join(f"?{v}" for v in query.variables), file=out)
    if unknown is not None:
        log.warning("%s; no results", unknown)
        return EXIT_OK
    start = time.perf_counter()
    result = execute(store, query)
    elapsed = time.perf_counter() - start
    roles = {}
    for pat in (query.left, query.right):
        for slot, role in zip(pat, _ROLES):
            if is_var(slot):
                roles.setdefault(slot, role)
    for row in result.rows:
        print("\t".join(_render(v, roles[name], dictionary, args.ids)
                        for v, name in zip(row, result.variables)), file=out)
    if args.time:
        print(f"time_us={elapsed * 1e6:.1f}", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args, out: TextIO) -> int:
    store, dictionary = _load(args.store)
    print(store_stats(store, dictionary).render(), file=out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="k2triples", description="Compressed k²-tree RDF triple store.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build a store file from N-Triples")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--k", type=int, default=2, help="k²-tree branching factor (default 2)")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="solve one triple pattern")
    p.add_argument("store")
    p.add_argument("pattern", help="e.g. '(?s, <http://x/p>, #3)'")
    p.add_argument("--ids", action="store_true", help="print raw IDs")
    p.add_argument("--count", action="store_true", help="print only the number of results")
    p.add_argument("--time", action="store_true", help="print wall-clock microseconds to stderr")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("join", help="solve a two-pattern join")
    p.add_argument("store")
    p.add_argument("pattern1")
    p.add_argument("pattern2")
    p.add_argument("--explain", action="store_true", help="print axis and category first")
    p.add_argument("--ids", action="store_true", help="print raw IDs")
    p.add_argument("--time", action="store_true", help="print wall-clock microseconds to stderr")
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("stats", help="print compression statistics")
    p.add_argument("store")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    out = out or sys.stdout
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "k", 2) < 2:
            parser.error("--k must be >= 2")
    except SystemExit as exc:
        # --help exits 0; everything else argparse rejects is a usage error.
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, JoinError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StoreFormatError as exc:
        print(f"error: corrupt store: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
