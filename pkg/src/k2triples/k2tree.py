"""Static k²-tree over an n×n binary matrix.

The matrix is split recursively into k×k sub-blocks. Every non-empty
block contributes k² bits (one per child, row-major) to the level below;
all-zero blocks stop there. Internal levels are concatenated in ``T``,
the last level in ``L``. The children of the 1-bit at position ``p`` of
``T`` start at ``rank1(T, p + 1) * k²`` in the ``T ++ L`` address space.
"""

from __future__ import annotations

import struct
from typing import Iterable, NamedTuple

import numpy as np

from .bitseq import DEFAULT_SAMPLE, BitSequence

# n² must fit the int64 Morton codes used during build.
MAX_SIDE = 1 << 31

_HEADER = struct.Struct("<HHQ")


class BitSize(NamedTuple):
    t_bits: int
    l_bits: int
    serialized_bits: int
    rank_bits: int

    @property
    def total(self) -> int:
        return self.serialized_bits + self.rank_bits


def height_for(side: int, k: int) -> int:
    """Smallest h >= 1 with k**h >= side."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if side < 0:
        raise ValueError(f"negative side {side}")
    h, n = 1, k
    while n < side:
        h += 1
        n *= k
    return h


class K2Tree:
    """Immutable k²-tree. Build with :meth:`build`, load with :meth:`from_bytes`."""

    __slots__ = ("k", "height", "n", "ones", "T", "L", "_k2", "_t_len")

    def __init__(self, k: int, height: int, ones: int, T: BitSequence, L: BitSequence):
        if k < 2:
            raise ValueError(f"k must be >= 2, got {k}")
        if height < 1:
            raise ValueError(f"height must be >= 1, got {height}")
        k2 = k * k
        if len(L) % k2 or len(T) % k2:
            raise ValueError("T and L lengths must be multiples of k²")
        if L.ones != ones:
            raise ValueError(f"L holds {L.ones} ones but header says {ones}")
        if ones == 0:
            if len(T) or len(L):
                raise ValueError("empty tree must have empty T and L")
        else:
            # One root block plus one block per 1-bit of T.
            if (1 + T.ones) * k2 != len(T) + len(L):
                raise ValueError("T/L block structure is inconsistent")
            if height == 1 and len(T):
                raise ValueError("a height-1 tree has no internal levels")
        self.k = k
        self.height = height
        self.n = k ** height
        self.ones = ones
        self.T = T
        self.L = L
        self._k2 = k2
        self._t_len = len(T)

    def __repr__(self) -> str:
        return f"K2Tree(k={self.k}, n={self.n}, ones={self.ones}, |T|={len(self.T)}, |L|={len(self.L)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, K2Tree):
            return NotImplemented
        return (self.k, self.height, self.T, self.L) == (other.k, other.height, other.T, other.L)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def build(cls, points: Iterable[tuple[int, int]] | np.ndarray, side: int, k: int = 2,
              sample: int = DEFAULT_SAMPLE) -> "K2Tree":
        """Build the tree holding exactly ``points`` in a matrix of logical side ``side``.

        The matrix is padded with zero rows/columns up to the next power of k.
        Duplicate points are collapsed.
        """
        height = height_for(side, k)
        if k ** height > MAX_SIDE:
            raise ValueError(f"side {side} exceeds the supported maximum {MAX_SIDE}")
        if not isinstance(points, np.ndarray):
            points = list(points)
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        if len(pts):
            bad = (pts < 0).any(axis=1) | (pts >= side).any(axis=1)
            if bad.any():
                r, c = pts[np.argmax(bad)].tolist()
                raise ValueError(f"point ({r}, {c}) outside [0, {side})")
        empty = BitSequence(b"", 0, sample)
        if not len(pts):
            return cls(k, height, 0, empty, empty)

        k2 = k * k
        rows, cols = pts[:, 0], pts[:, 1]
        codes = np.zeros(len(pts), dtype=np.int64)
        for level in range(height):
            shift = k ** (height - 1 - level)
            codes = codes * k2 + (rows // shift % k) * k + (cols // shift % k)
        codes = np.unique(codes)

        levels = []
        parents = np.zeros(1, dtype=np.int64)
        for level in range(height):
            prefixes = codes // (k2 ** (height - 1 - level))
            keep = np.empty(len(prefixes), dtype=bool)
            keep[0] = True
            np.not_equal(prefixes[1:], prefixes[:-1], out=keep[1:])
            children = prefixes[keep]
            slot = np.searchsorted(parents, children // k2) * k2 + children % k2
            bits = np.zeros(len(parents) * k2, dtype=bool)
            bits[slot] = True
            levels.append(bits)
            parents = children

        t_bits = np.concatenate(levels[:-1]) if height > 1 else np.zeros(0, dtype=bool)
        T = BitSequence.from_bits(t_bits, sample)
        L = BitSequence.from_bits(levels[-1], sample)
        return cls(k, height, len(codes), T, L)

    # -- queries ---------------------------------------------------------

    def _check_coord(self, name: str, value: int) -> None:
        if not 0 <= value < self.n:
            raise ValueError(f"{name} {value} outside [0, {self.n})")

    def contains(self, row: int, col: int) -> bool:
        self._check_coord("row", row)
        self._check_coord("col", col)
        if not self.ones:
            return False
        k, k2, t_len = self.k, self._k2, self._t_len
        tdata, ldata, rank = self.T.data, self.L.data, self.T.rank1
        size = self.n // k
        base = 0
        while True:
            pos = base + (row // size) * k + col // size
            if pos >= t_len:
                pos -= t_len
                return bool((ldata[pos >> 3] >> (7 - (pos & 7))) & 1)
            if not (tdata[pos >> 3] >> (7 - (pos & 7))) & 1:
                return False
            base = rank(pos + 1) * k2
            row %= size
            col %= size
            size //= k

    def direct_neighbors(self, row: int) -> list[int]:
        """Columns set in ``row``, ascending."""
        self._check_coord("row", row)
        if not self.ones:
            return []
        k, k2, t_len = self.k, self._k2, self._t_len
        tdata, ldata, rank = self.T.data, self.L.data, self.T.rank1
        size = self.n // k
        frontier = [(0, 0)]
        for _ in range(self.height - 1):
            band = (row // size) * k
            row %= size
            nxt = []
            for base, off in frontier:
                pos = base + band
                seen = rank(pos)
                for j in range(k):
                    q = pos + j
                    if (tdata[q >> 3] >> (7 - (q & 7))) & 1:
                        seen += 1
                        nxt.append((seen * k2, off + j * size))
            if not nxt:
                return []
            frontier = nxt
            size //= k
        band = row * k - t_len
        out = []
        for base, off in frontier:
            pos = base + band
            for j in range(k):
                q = pos + j
                if (ldata[q >> 3] >> (7 - (q & 7))) & 1:
                    out.append(off + j)
        return out

    def reverse_neighbors(self, col: int) -> list[int]:
        """Rows set in ``col``, ascending."""
        self._check_coord("col", col)
        if not self.ones:
            return []
        k, k2, t_len = self.k, self._k2, self._t_len
        tdata, ldata, rank = self.T.data, self.L.data, self.T.rank1
        size = self.n // k
        frontier = [(0, 0)]
        for _ in range(self.height - 1):
            band = col // size
            col %= size
            nxt = []
            for base, off in frontier:
                pos = base + band
                for i in range(k):
                    q = pos + i * k
                    if (tdata[q >> 3] >> (7 - (q & 7))) & 1:
                        nxt.append((rank(q + 1) * k2, off + i * size))
            if not nxt:
                return []
            frontier = nxt
            size //= k
        band = col - t_len
        out = []
        for base, off in frontier:
            pos = base + band
            for i in range(k):
                q = pos + i * k
                if (ldata[q >> 3] >> (7 - (q & 7))) & 1:
                    out.append(off + i)
        return out

    def range(self, row_lo: int, row_hi: int, col_lo: int, col_hi: int) -> list[tuple[int, int]]:
        """All 1-cells in the inclusive rectangle, row-major ascending."""
        for name, value in (("row_lo", row_lo), ("row_hi", row_hi), ("col_lo", col_lo), ("col_hi", col_hi)):
            self._check_coord(name, value)
        if row_lo > row_hi or col_lo > col_hi:
            raise ValueError(f"inverted range rows [{row_lo}, {row_hi}] cols [{col_lo}, {col_hi}]")
        if not self.ones:
            return []
        k, k2, t_len = self.k, self._k2, self._t_len
        tdata, ldata, rank = self.T.data, self.L.data, self.T.rank1
        size = self.n // k
        frontier = [(0, 0, 0)]
        out: list[tuple[int, int]] = []
        for level in range(self.height):
            leaf = level == self.height - 1
            nxt = []
            for base, roff, coff in frontier:
                i_lo = max(0, (row_lo - roff) // size)
                i_hi = min(k - 1, (row_hi - roff) // size)
                j_lo = max(0, (col_lo - coff) // size)
                j_hi = min(k - 1, (col_hi - coff) // size)
                for i in range(i_lo, i_hi + 1):
                    for j in range(j_lo, j_hi + 1):
                        q = base + i * k + j
                        if leaf:
                            q -= t_len
                            if (ldata[q >> 3] >> (7 - (q & 7))) & 1:
                                out.append((roff + i, coff + j))
                        elif (tdata[q >> 3] >> (7 - (q & 7))) & 1:
                            nxt.append((rank(q + 1) * k2, roff + i * size, coff + j * size))
            if leaf:
                break
            if not nxt:
                return []
            frontier = nxt
            size //= k
        out.sort()
        return out

    def points(self) -> list[tuple[int, int]]:
        return self.range(0, self.n - 1, 0, self.n - 1)

    # -- size and wire form ----------------------------------------------

    def bit_size(self) -> BitSize:
        t, l = len(self.T), len(self.L)
        serialized = 8 * (_HEADER.size + len(self.T.to_bytes()) + len(self.L.to_bytes()))
        return BitSize(t, l, serialized, self.T.rank_overhead_bits + self.L.rank_overhead_bits)

    def to_bytes(self) -> bytes:
        return _HEADER.pack(self.k, self.height, self.ones) + self.T.to_bytes() + self.L.to_bytes()

    @classmethod
    def from_bytes(cls, buf: bytes | memoryview, offset: int = 0,
                   sample: int = DEFAULT_SAMPLE) -> tuple["K2Tree", int]:
        if offset + _HEADER.size > len(buf):
            raise ValueError("truncated k2-tree header")
        k, height, ones = _HEADER.unpack_from(buf, offset)
        T, offset = BitSequence.from_buffer(buf, offset + _HEADER.size, sample)
        L, offset = BitSequence.from_buffer(buf, offset, sample)
        return cls(k, height, ones, T, L), offset
