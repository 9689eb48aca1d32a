"""Bit-packed words and matrices over GF(2).

A word of length ``n`` is stored in a Python int. Bit index 0 is the leftmost
character of the printed word, so position ``j`` lives at ``1 << (n - 1 - j)``.
The same convention is used for basis-state indices in :mod:`cssqec.qstate`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import CapabilityError, UsageError

MAX_BITS = 32


@dataclass(frozen=True)
class BitWord:
    value: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_BITS:
            raise CapabilityError(f"word length {self.n} outside 0..{MAX_BITS}")
        if not 0 <= self.value < (1 << self.n) and not (self.n == 0 and self.value == 0):
            raise UsageError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, text: str) -> BitWord:
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise UsageError(f"not a binary word: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitWord:
        bits = list(bits)
        value = 0
        for b in bits:
            value = (value << 1) | (int(b) & 1)
        return cls(value, len(bits))

    @classmethod
    def zero(cls, n: int) -> BitWord:
        return cls(0, n)

    @classmethod
    def unit(cls, n: int, j: int) -> BitWord:
        return cls(1 << (n - 1 - j), n)

    @classmethod
    def from_positions(cls, n: int, positions: Iterable[int]) -> BitWord:
        value = 0
        for j in positions:
            value |= 1 << (n - 1 - j)
        return cls(value, n)

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b") if self.n else ""

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.n:
            raise IndexError(j)
        return (self.value >> (self.n - 1 - j)) & 1

    def __iter__(self) -> Iterator[int]:
        return (self[j] for j in range(self.n))

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def support(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if self[j])

    def _check(self, other: BitWord) -> None:
        if self.n != other.n:
            raise UsageError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: BitWord) -> BitWord:
        self._check(other)
        return BitWord(self.value ^ other.value, self.n)

    def __and__(self, other: BitWord) -> BitWord:
        self._check(other)
        return BitWord(self.value & other.value, self.n)

    def distance(self, other: BitWord) -> int:
        return (self ^ other).weight


def xor(a: BitWord, b: BitWord) -> BitWord:
    return a ^ b


def weight(w: BitWord) -> int:
    return w.weight


def parity_check(h: BitWord, u: BitWord) -> bool:
    """True when ``u`` satisfies the check ``h`` (even overlap)."""
    return (h & u).weight % 2 == 0


def parity(value: int) -> int:
    return value.bit_count() & 1


@dataclass(frozen=True)
class BinaryMatrix:
    """Rows over GF(2), each packed into an int of width ``n``."""

    rows: tuple[int, ...]
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_BITS:
            raise CapabilityError(f"row length {self.n} outside 0..{MAX_BITS}")
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        limit = 1 << self.n
        for r in self.rows:
            if not 0 <= r < limit:
                raise UsageError(f"row {r} does not fit in {self.n} bits")

    @classmethod
    def from_words(cls, words: Sequence[BitWord], n: int | None = None) -> BinaryMatrix:
        if n is None:
            if not words:
                raise UsageError("width required for an empty matrix")
            n = words[0].n
        for w in words:
            if w.n != n:
                raise UsageError(f"row length {w.n} differs from {n}")
        return cls(tuple(w.value for w in words), n)

    @classmethod
    def from_strings(cls, lines: Sequence[str], n: int | None = None) -> BinaryMatrix:
        return cls.from_words([BitWord.from_str(s) for s in lines], n)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> BinaryMatrix:
        lines = [ln.strip() for ln in text.splitlines()]
        return cls.from_strings([ln for ln in lines if ln and not ln.startswith("#")], n)

    @classmethod
    def from_array(cls, array) -> BinaryMatrix:
        a = np.asarray(array, dtype=np.int64) & 1
        if a.ndim != 2:
            raise UsageError("expected a 2-d array")
        return cls.from_words([BitWord.from_bits(row) for row in a], a.shape[1])

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls(tuple(1 << (n - 1 - j) for j in range(n)), n)

    @classmethod
    def empty(cls, n: int) -> BinaryMatrix:
        return cls((), n)

    @property
    def m(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i: int) -> BitWord:
        return BitWord(self.rows[i], self.n)

    def __iter__(self) -> Iterator[BitWord]:
        return (BitWord(r, self.n) for r in self.rows)

    def to_text(self) -> str:
        return "\n".join(str(w) for w in self)

    def to_strings(self) -> list[str]:
        return [str(w) for w in self]

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, w in enumerate(self):
            out[i] = list(w)
        return out

    def stack(self, other: BinaryMatrix) -> BinaryMatrix:
        if other.n != self.n:
            raise UsageError(f"width mismatch: {self.n} vs {other.n}")
        return BinaryMatrix(self.rows + other.rows, self.n)

    @property
    def rank(self) -> int:
        return row_reduce(self)[1]

    def syndrome(self, word: BitWord) -> BitWord:
        """Check outcomes of ``word`` against every row; bit i is 1 when row i fails."""
        if word.n != self.n:
            raise UsageError(f"length mismatch: {word.n} vs {self.n}")
        value = 0
        for r in self.rows:
            value = (value << 1) | parity(r & word.value)
        return BitWord(value, self.m)


def row_reduce(m: BinaryMatrix) -> tuple[BinaryMatrix, int, tuple[int, ...]]:
    """Reduced row-echelon form. Zero rows are kept at the bottom.

    Pivots are chosen left to right, so ties go to the leftmost column.
    """
    rows = list(m.rows)
    n = m.n
    pivots: list[int] = []
    r = 0
    for col in range(n):
        if r == len(rows):
            break
        mask = 1 << (n - 1 - col)
        hit = next((i for i in range(r, len(rows)) if rows[i] & mask), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & mask:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
    return BinaryMatrix(tuple(rows), n), r, tuple(pivots)


def row_basis(m: BinaryMatrix) -> BinaryMatrix:
    """The nonzero rows of the reduced form of ``m``."""
    red, rank, _ = row_reduce(m)
    return BinaryMatrix(red.rows[:rank], m.n)


def null_space(m: BinaryMatrix) -> BinaryMatrix:
    """Generator rows of ``{v : row . v even for every row}``, one per free column."""
    red, rank, pivots = row_reduce(m)
    n = m.n
    free = [c for c in range(n) if c not in set(pivots)]
    out = []
    for f in free:
        fmask = 1 << (n - 1 - f)
        v = fmask
        for i, p in enumerate(pivots):
            if red.rows[i] & fmask:
                v |= 1 << (n - 1 - p)
        out.append(v)
    return BinaryMatrix(tuple(out), n)


def span(m: BinaryMatrix) -> np.ndarray:
    """All XOR combinations of the rows, as a uint64 array of length ``2**m``.

    Rows are not deduplicated; pass an independent set to get distinct words.
    """
    words = np.zeros(1, dtype=np.uint64)
    for r in m.rows:
        words = np.concatenate([words, words ^ np.uint64(r)])
    return words


def in_row_space(word: BitWord, m: BinaryMatrix) -> bool:
    return row_reduce(m.stack(BinaryMatrix((word.value,), m.n)))[1] == m.rank


def same_row_space(a: BinaryMatrix, b: BinaryMatrix) -> bool:
    if a.n != b.n:
        return False
    ra = a.rank
    return ra == b.rank and a.stack(b).rank == ra


def popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words.astype(np.uint64))
