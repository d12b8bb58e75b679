"""Vertically partitioned triple store: one k²-tree per predicate.

Every tree is a subject×object matrix of the same side
``|SO| + max(|S|, |O|)``, so row and column IDs compare across predicates.
IDs are 1-based; tree coordinates are ``id - 1``.
"""

from __future__ import annotations

import struct
from typing import Iterable, Iterator, NamedTuple, Union

import numpy as np

from .dictionary import TermDictionary
from .k2tree import K2Tree, height_for

MAGIC = b"K2TS"
FORMAT_VERSION = 1

_FILE_HEADER = struct.Struct("<4sIQQQQH")
_U64 = struct.Struct("<Q")

Slot = Union[int, str]
IdTriple = tuple[int, int, int]


class StoreFormatError(ValueError):
    """Raised when a store file is truncated or has a bad magic/version."""


def is_var(slot: Slot) -> bool:
    return isinstance(slot, str)


class TriplePattern(NamedTuple):
    """A triple whose positions are IDs (int) or variable names (str)."""

    s: Slot
    p: Slot
    o: Slot

    @property
    def variables(self) -> list[str]:
        return [x for x in self if isinstance(x, str)]

    @property
    def form(self) -> str:
        """Shape such as ``"S?PO"``: bound letters, ``?`` before unbound ones."""
        return "".join(("?" if is_var(x) else "") + name for x, name in zip(self, "SPO"))

    def bind(self, var: str, value: int) -> "TriplePattern":
        return TriplePattern(*(value if x == var else x for x in self))

    def __str__(self) -> str:
        return "(" + ", ".join(f"?{x}" if is_var(x) else str(x) for x in self) + ")"


class TripleStore:
    def __init__(self, sizes: tuple[int, int, int, int], trees: list[K2Tree], k: int = 2):
        so, s, o, p = sizes
        if min(sizes) < 0:
            raise ValueError(f"negative partition size in {sizes}")
        if len(trees) != p:
            raise ValueError(f"expected {p} trees, got {len(trees)}")
        self.sizes = (so, s, o, p)
        self.k = k
        self.side = so + max(s, o)
        self.trees = trees
        self.n = k ** height_for(self.side, k)
        if any(t.k != k or t.n != self.n for t in trees):
            raise ValueError(f"all trees must have k={k} and n={self.n}")

    @classmethod
    def build(cls, id_triples: Iterable[IdTriple] | np.ndarray, sizes: tuple[int, int, int, int],
              k: int = 2) -> "TripleStore":
        so, s, o, p = sizes
        side = so + max(s, o)
        arr = np.asarray(id_triples if isinstance(id_triples, np.ndarray) else list(id_triples),
                         dtype=np.int64).reshape(-1, 3)
        if len(arr):
            bad = ((arr[:, 0] < 1) | (arr[:, 0] > so + s) | (arr[:, 1] < 1) | (arr[:, 1] > p)
                   | (arr[:, 2] < 1) | (arr[:, 2] > so + o))
            if bad.any():
                raise ValueError(f"triple {tuple(arr[np.argmax(bad)].tolist())} has an id outside sizes {sizes}")
        arr = arr[np.argsort(arr[:, 1], kind="stable")]
        bounds = np.searchsorted(arr[:, 1], np.arange(1, p + 2))
        trees = [
            K2Tree.build(arr[bounds[i]:bounds[i + 1]][:, [0, 2]] - 1, side, k)
            for i in range(p)
        ]
        return cls(sizes, trees, k)

    def __repr__(self) -> str:
        so, s, o, p = self.sizes
        return f"TripleStore(|SO|={so}, |S|={s}, |O|={o}, |P|={p}, triples={len(self)}, k={self.k})"

    def __len__(self) -> int:
        return sum(t.ones for t in self.trees)

    @property
    def max_subject_id(self) -> int:
        return self.sizes[0] + self.sizes[1]

    @property
    def max_object_id(self) -> int:
        return self.sizes[0] + self.sizes[2]

    @property
    def num_predicates(self) -> int:
        return self.sizes[3]

    def tree(self, p: int, touched: set[int] | None = None) -> K2Tree:
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or not 1 <= p <= self.sizes[3]:
            raise ValueError(f"predicate id {p} outside [1, {self.sizes[3]}]")
        if touched is not None:
            touched.add(int(p))
        return self.trees[p - 1]

    def _subject_ok(self, s: int) -> bool:
        if s < 1:
            raise ValueError(f"subject id {s} must be >= 1")
        return s <= self.max_subject_id

    def _object_ok(self, o: int) -> bool:
        if o < 1:
            raise ValueError(f"object id {o} must be >= 1")
        return o <= self.max_object_id

    # -- single-tree primitives ---------------------------------------------

    def contains(self, s: int, p: int, o: int, touched: set[int] | None = None) -> bool:
        tree = self.tree(p, touched)
        if not (self._subject_ok(s) and self._object_ok(o)):
            return False
        return tree.contains(s - 1, o - 1)

    def objects(self, s: int, p: int, touched: set[int] | None = None) -> list[int]:
        """Objects related to ``s`` through ``p``, ascending."""
        tree = self.tree(p, touched)
        if not self._subject_ok(s):
            return []
        return [c + 1 for c in tree.direct_neighbors(s - 1)]

    def subjects(self, p: int, o: int, touched: set[int] | None = None) -> list[int]:
        """Subjects related to ``o`` through ``p``, ascending."""
        tree = self.tree(p, touched)
        if not self._object_ok(o):
            return []
        return [r + 1 for r in tree.reverse_neighbors(o - 1)]

    def pairs(self, p: int, touched: set[int] | None = None) -> list[tuple[int, int]]:
        tree = self.tree(p, touched)
        return [(r + 1, c + 1) for r, c in tree.points()]

    # -- patterns -------------------------------------------------------------

    def solve(self, pattern: TriplePattern | tuple, touched: set[int] | None = None) -> Iterator[IdTriple]:
        """Lazily yield the ID triples matching ``pattern``.

        Bounded-predicate forms read one tree; unbounded forms read every
        tree in ascending predicate order, each in its native order.
        """
        s, p, o = pattern
        if not is_var(p):
            self.tree(p)  # validate eagerly, before the generator starts
            preds: Iterable[int] = (p,)
        else:
            preds = range(1, self.sizes[3] + 1)
        s_var, o_var = is_var(s), is_var(o)
        # IDs beyond a role's range cannot match: no tree is read.
        if (not s_var and not self._subject_ok(s)) or (not o_var and not self._object_ok(o)):
            return iter(())
        return self._solve(s, preds, o, s_var, o_var, touched)

    def _solve(self, s: Slot, preds: Iterable[int], o: Slot, s_var: bool, o_var: bool,
               touched: set[int] | None) -> Iterator[IdTriple]:
        for p in preds:
            tree = self.tree(p, touched)
            if not s_var and not o_var:
                if tree.contains(s - 1, o - 1):
                    yield (s, p, o)
            elif not s_var:
                for c in tree.direct_neighbors(s - 1):
                    yield (s, p, c + 1)
            elif not o_var:
                for r in tree.reverse_neighbors(o - 1):
                    yield (r + 1, p, o)
            else:
                for r, c in tree.points():
                    yield (r + 1, p, c + 1)

    def tree_access_count(self, pattern: TriplePattern | tuple) -> int:
        """Distinct trees read while fully draining ``solve(pattern)``."""
        touched: set[int] = set()
        for _ in self.solve(pattern, touched):
            pass
        return len(touched)


def build_store(id_triples: Iterable[IdTriple], sizes: tuple[int, int, int, int], k: int = 2) -> TripleStore:
    return TripleStore.build(id_triples, sizes, k)


def solve_pattern(store: TripleStore, pattern: TriplePattern | tuple) -> Iterator[IdTriple]:
    return store.solve(pattern)


def tree_access_count(store: TripleStore, pattern: TriplePattern | tuple) -> int:
    return store.tree_access_count(pattern)


# -- store files ----------------------------------------------------------------

def dump_store(store: TripleStore, dictionary: TermDictionary | None = None) -> bytes:
    """Serialize to the ``K2TS`` format. Without a dictionary an empty one is written."""
    if dictionary is not None and dictionary.sizes != store.sizes:
        raise ValueError(f"dictionary sizes {dictionary.sizes} do not match store sizes {store.sizes}")
    parts = [_FILE_HEADER.pack(MAGIC, FORMAT_VERSION, *store.sizes, store.k)]
    for tree in store.trees:
        raw = tree.to_bytes()
        parts.append(_U64.pack(len(raw)))
        parts.append(raw)
    parts.append((dictionary or TermDictionary([], [], [], [])).to_bytes())
    return b"".join(parts)


def triples_section_size(store: TripleStore) -> int:
    """Bytes of the store file excluding the dictionary section."""
    return _FILE_HEADER.size + sum(_U64.size + len(t.to_bytes()) for t in store.trees)


def load_store(buf: bytes) -> tuple[TripleStore, TermDictionary | None]:
    """Inverse of :func:`dump_store`.

    Returns ``None`` for the dictionary when the file holds an empty one
    for a non-empty ID space (an ID-only store).
    """
    view = memoryview(buf)
    if len(view) < _FILE_HEADER.size:
        raise StoreFormatError("file too short for a K2TS header")
    magic, version, so, s, o, p, k = _FILE_HEADER.unpack_from(view, 0)
    if magic != MAGIC:
        raise StoreFormatError(f"bad magic {bytes(magic)!r}")
    if version != FORMAT_VERSION:
        raise StoreFormatError(f"unsupported format version {version}")
    offset = _FILE_HEADER.size
    trees = []
    try:
        for i in range(p):
            if offset + _U64.size > len(view):
                raise StoreFormatError(f"truncated before tree {i + 1}")
            (size,) = _U64.unpack_from(view, offset)
            offset += _U64.size
            tree, end = K2Tree.from_bytes(view[:offset + size], offset)
            if end != offset + size:
                raise StoreFormatError(f"tree {i + 1} length mismatch")
            trees.append(tree)
            offset = end
        dictionary, offset = TermDictionary.from_bytes(view, offset)
        store = TripleStore((so, s, o, p), trees, k)
    except StoreFormatError:
        raise
    except ValueError as exc:
        raise StoreFormatError(str(exc)) from None
    if offset != len(view):
        raise StoreFormatError(f"{len(view) - offset} trailing bytes")
    if dictionary.sizes == (0, 0, 0, 0) and store.sizes != (0, 0, 0, 0):
        return store, None
    if dictionary.sizes != store.sizes:
        raise StoreFormatError(f"dictionary sizes {dictionary.sizes} disagree with header {store.sizes}")
    return store, dictionary
