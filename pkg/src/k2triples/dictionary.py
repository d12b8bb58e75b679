"""Four-partition term dictionary (shared subject-objects, subjects, objects, predicates).

Subject and object IDs share the range ``[1, |SO|]`` for terms that play
both roles; subject-only and object-only terms continue from ``|SO| + 1``
in their own, overlapping, ranges. Predicates have an independent space.
Within each partition terms are ordered by their UTF-8 bytes.
"""

from __future__ import annotations

import enum
import struct
from typing import Iterable, Iterator, Sequence

Term = str

_COUNT = struct.Struct("<Q")
_TERM_LEN = struct.Struct("<I")


class Role(enum.Enum):
    SUBJECT = "subject"
    PREDICATE = "predicate"
    OBJECT = "object"


class TermDictionary:
    def __init__(self, so_terms: Sequence[Term], s_terms: Sequence[Term],
                 o_terms: Sequence[Term], p_terms: Sequence[Term]):
        self.so_terms = list(so_terms)
        self.s_terms = list(s_terms)
        self.o_terms = list(o_terms)
        self.p_terms = list(p_terms)
        for name, part in (("SO", self.so_terms), ("S", self.s_terms),
                           ("O", self.o_terms), ("P", self.p_terms)):
            if len(set(part)) != len(part):
                raise ValueError(f"duplicate term in partition {name}")
        if set(self.so_terms) & (set(self.s_terms) | set(self.o_terms)) or set(self.s_terms) & set(self.o_terms):
            raise ValueError("SO, S and O partitions must be disjoint")

        n_so = len(self.so_terms)
        self._so = {t: i for i, t in enumerate(self.so_terms, 1)}
        self._s = {t: i for i, t in enumerate(self.s_terms, n_so + 1)}
        self._o = {t: i for i, t in enumerate(self.o_terms, n_so + 1)}
        self._p = {t: i for i, t in enumerate(self.p_terms, 1)}

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        """``(|SO|, |S|, |O|, |P|)``."""
        return len(self.so_terms), len(self.s_terms), len(self.o_terms), len(self.p_terms)

    @property
    def max_subject_id(self) -> int:
        return len(self.so_terms) + len(self.s_terms)

    @property
    def max_object_id(self) -> int:
        return len(self.so_terms) + len(self.o_terms)

    def __repr__(self) -> str:
        so, s, o, p = self.sizes
        return f"TermDictionary(|SO|={so}, |S|={s}, |O|={o}, |P|={p})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermDictionary):
            return NotImplemented
        return (self.so_terms, self.s_terms, self.o_terms, self.p_terms) == (
            other.so_terms, other.s_terms, other.o_terms, other.p_terms)

    def id_for(self, term: Term, role: Role) -> int | None:
        """ID of ``term`` in ``role``'s space, or None if it never plays that role."""
        if role is Role.PREDICATE:
            return self._p.get(term)
        found = self._so.get(term)
        if found is not None:
            return found
        return (self._s if role is Role.SUBJECT else self._o).get(term)

    def term_for(self, id_: int, role: Role) -> Term:
        if role is Role.PREDICATE:
            if not 1 <= id_ <= len(self.p_terms):
                raise ValueError(f"predicate id {id_} outside [1, {len(self.p_terms)}]")
            return self.p_terms[id_ - 1]
        n_so = len(self.so_terms)
        rest = self.s_terms if role is Role.SUBJECT else self.o_terms
        if not 1 <= id_ <= n_so + len(rest):
            raise ValueError(f"{role.value} id {id_} outside [1, {n_so + len(rest)}]")
        return self.so_terms[id_ - 1] if id_ <= n_so else rest[id_ - n_so - 1]

    def encode(self, triples: Iterable[tuple[Term, Term, Term]]) -> Iterator[tuple[int, int, int]]:
        """Map term triples to ID triples; every term must be known in its role."""
        for s, p, o in triples:
            ids = (self.id_for(s, Role.SUBJECT), self.id_for(p, Role.PREDICATE), self.id_for(o, Role.OBJECT))
            if None in ids:
                raise KeyError(f"triple ({s}, {p}, {o}) has terms missing from the dictionary")
            yield ids  # type: ignore[misc]

    def decode(self, triple: tuple[int, int, int]) -> tuple[Term, Term, Term]:
        s, p, o = triple
        return self.term_for(s, Role.SUBJECT), self.term_for(p, Role.PREDICATE), self.term_for(o, Role.OBJECT)

    def to_bytes(self) -> bytes:
        out = bytearray()
        for part in (self.so_terms, self.s_terms, self.o_terms, self.p_terms):
            out += _COUNT.pack(len(part))
            for term in part:
                raw = term.encode("utf-8")
                out += _TERM_LEN.pack(len(raw))
                out += raw
        return bytes(out)

    @classmethod
    def from_bytes(cls, buf: bytes | memoryview, offset: int = 0) -> tuple["TermDictionary", int]:
        parts = []
        try:
            for _ in range(4):
                (count,) = _COUNT.unpack_from(buf, offset)
                offset += _COUNT.size
                terms = []
                for _ in range(count):
                    (size,) = _TERM_LEN.unpack_from(buf, offset)
                    offset += _TERM_LEN.size
                    if offset + size > len(buf):
                        raise ValueError("truncated term")
                    terms.append(bytes(buf[offset:offset + size]).decode("utf-8"))
                    offset += size
                parts.append(terms)
        except struct.error as exc:
            raise ValueError(f"truncated dictionary: {exc}") from None
        return cls(*parts), offset


def build_dictionary(triples: Iterable[tuple[Term, Term, Term]]) -> TermDictionary:
    subjects: set[Term] = set()
    predicates: set[Term] = set()
    objects: set[Term] = set()
    for s, p, o in triples:
        subjects.add(s)
        predicates.add(p)
        objects.add(o)
    # Code-point order equals UTF-8 byte order for str.
    return TermDictionary(
        sorted(subjects & objects),
        sorted(subjects - objects),
        sorted(objects - subjects),
        sorted(predicates),
    )
