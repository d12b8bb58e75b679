"""Static bit sequence with sampled rank support.

Bits are packed most-significant-first into bytes, so bit ``i`` lives in
byte ``i >> 3`` at shift ``7 - (i & 7)``. The rank directory keeps one
absolute 1-count per ``sample`` bits and is rebuilt on load.
"""

from __future__ import annotations

import struct
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SAMPLE = 512

_LEN = struct.Struct("<Q")


class BitSequence:
    """Immutable bit vector answering ``access`` and ``rank1``.

    ``rank_dir[j]`` holds the number of 1-bits in ``[0, j * sample)`` for
    every block start below ``length``.
    """

    __slots__ = ("length", "data", "sample", "rank_dir", "_ones")

    def __init__(self, data: bytes, length: int, sample: int = DEFAULT_SAMPLE):
        if sample <= 0:
            raise ValueError(f"sample must be positive, got {sample}")
        if length < 0:
            raise ValueError(f"negative length {length}")
        if len(data) != (length + 7) >> 3:
            raise ValueError(
                f"payload has {len(data)} bytes, expected {(length + 7) >> 3} for {length} bits"
            )
        if length & 7 and data[-1] & ((1 << (8 - (length & 7))) - 1):
            raise ValueError("padding bits after the last position must be zero")
        self.length = length
        self.data = bytes(data)
        self.sample = sample
        self.rank_dir, self._ones = _build_directory(self.data, length, sample)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray, sample: int = DEFAULT_SAMPLE) -> "BitSequence":
        arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits))
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        arr = arr.astype(bool, copy=False).ravel()
        return cls(np.packbits(arr).tobytes(), int(arr.size), sample)

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"BitSequence(length={self.length}, ones={self._ones})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitSequence):
            return NotImplemented
        return self.length == other.length and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.length, self.data))

    @property
    def ones(self) -> int:
        return self._ones

    def access(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"bit index {i} out of range [0, {self.length})")
        return (self.data[i >> 3] >> (7 - (i & 7))) & 1

    __getitem__ = access

    def rank1(self, i: int) -> int:
        """Number of 1-bits in positions ``[0, i)``."""
        if not 0 <= i <= self.length:
            raise IndexError(f"rank position {i} out of range [0, {self.length}]")
        if i == self.length:
            return self._ones
        block = i // self.sample
        start = block * self.sample
        count = self.rank_dir[block]
        if i == start:
            return count
        lo = start >> 3
        hi = (i + 7) >> 3
        word = int.from_bytes(self.data[lo:hi], "big") >> ((hi << 3) - i)
        return count + (word & ((1 << (i - start)) - 1)).bit_count()

    def to_list(self) -> list[int]:
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8), count=self.length).tolist()

    def to_bytes(self) -> bytes:
        return _LEN.pack(self.length) + self.data

    @classmethod
    def from_buffer(cls, buf: bytes | memoryview, offset: int = 0, sample: int = DEFAULT_SAMPLE) -> tuple["BitSequence", int]:
        """Decode one sequence at ``offset``; returns it with the offset just past it."""
        if offset + _LEN.size > len(buf):
            raise ValueError("truncated bit sequence header")
        (length,) = _LEN.unpack_from(buf, offset)
        offset += _LEN.size
        nbytes = (length + 7) >> 3
        if offset + nbytes > len(buf):
            raise ValueError(f"truncated bit sequence payload: need {nbytes} bytes")
        return cls(bytes(buf[offset:offset + nbytes]), length, sample), offset + nbytes

    @property
    def rank_overhead_bits(self) -> int:
        # One 64-bit absolute counter per sampled block.
        return 64 * len(self.rank_dir)


def _build_directory(data: bytes, length: int, sample: int) -> tuple[list[int], int]:
    if length == 0:
        return [], 0
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=length)
    nblocks = (length + sample - 1) // sample
    padded = np.zeros(nblocks * sample, dtype=np.int64)
    padded[:length] = bits
    per_block = padded.reshape(nblocks, sample).sum(axis=1)
    directory = np.concatenate(([0], np.cumsum(per_block)[:-1]))
    return directory.tolist(), int(per_block.sum())


def from_bits(bits: Sequence[int], sample: int = DEFAULT_SAMPLE) -> BitSequence:
    return BitSequence.from_bits(bits, sample)
