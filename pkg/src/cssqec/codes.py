"""Binary linear codes, cosets, syndrome tables and CSS triples."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import CapabilityError, ConstructionError, UsageError
from .gf2 import (
    BinaryMatrix,
    BitWord,
    null_space,
    parity,
    popcount,
    row_basis,
    row_reduce,
    same_row_space,
    span,
)

MAX_ENUM_K = 24
MAX_TABLE_N = 20


class LinearCode:
    """An ``[n, k, d]`` binary linear code.

    The generator and check rows are kept as given when they are valid, so
    matrices copied from a reference print back verbatim.
    """

    def __init__(self, generator: BinaryMatrix, check: BinaryMatrix | None = None, name: str = ""):
        if generator.rank != generator.m:
            generator = row_basis(generator)
        self.generator = generator
        self.n = generator.n
        self.k = generator.m
        if check is None:
            check = null_space(generator)
        else:
            if check.n != self.n:
                raise ConstructionError(f"check width {check.n} != {self.n}")
            if check.rank != self.n - self.k:
                raise ConstructionError(
                    f"check rank {check.rank} != n - k = {self.n - self.k}"
                )
            for h in check.rows:
                for g in generator.rows:
                    if parity(h & g):
                        raise ConstructionError("generator row fails a check row")
        self.check = check
        self.name = name

    @classmethod
    def from_checks(cls, check: BinaryMatrix, name: str = "") -> LinearCode:
        return cls(null_space(check), check, name)

    @classmethod
    def full(cls, n: int) -> LinearCode:
        return cls(BinaryMatrix.identity(n), BinaryMatrix.empty(n), f"full{n}")

    @cached_property
    def d(self) -> int:
        return min_distance(self)

    def codewords(self) -> np.ndarray:
        """Sorted codewords as uint64 ints."""
        if self.k > MAX_ENUM_K:
            raise CapabilityError(f"k = {self.k} exceeds enumeration bound {MAX_ENUM_K}")
        return np.sort(span(self.generator))

    def word_set(self) -> frozenset[int]:
        return frozenset(int(w) for w in self.codewords())

    def __contains__(self, word: BitWord) -> bool:
        return all(parity(h & word.value) == 0 for h in self.check.rows)

    def syndrome(self, word: BitWord) -> BitWord:
        return self.check.syndrome(word)

    def same_code(self, other: LinearCode) -> bool:
        return same_row_space(self.generator, other.generator)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<LinearCode{label} [{self.n},{self.k}]>"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "generator": self.generator.to_strings(),
            "check": self.check.to_strings(),
        }


def min_distance(c: LinearCode) -> int:
    """Minimum nonzero codeword weight by full enumeration; ``n`` for ``k = 0``."""
    if c.k == 0:
        return c.n
    if c.k > MAX_ENUM_K:
        raise CapabilityError(f"k = {c.k} exceeds enumeration bound {MAX_ENUM_K}")
    w = popcount(span(c.generator)[1:])
    return int(w.min())


def dual(c: LinearCode) -> LinearCode:
    name = f"dual({c.name})" if c.name else ""
    return LinearCode(null_space(c.generator), c.generator, name)


def kth_order_subcode(c: LinearCode, extra_checks: BinaryMatrix) -> LinearCode:
    """Subcode cut out by appending ``extra_checks`` to ``c``'s check rows."""
    if extra_checks.n != c.n:
        raise UsageError(f"extra rows have width {extra_checks.n}, code has n = {c.n}")
    stacked = c.check.stack(extra_checks)
    if stacked.rank != c.check.rank + extra_checks.m:
        raise ConstructionError(
            "extra check rows are not independent of the existing checks; increase n"
        )
    return LinearCode.from_checks(stacked)


@dataclass(frozen=True)
class Coset:
    base: LinearCode
    offset: BitWord

    def words(self) -> np.ndarray:
        return np.sort(self.base.codewords() ^ np.uint64(self.offset.value))

    def word_set(self) -> frozenset[int]:
        return frozenset(int(w) for w in self.words())

    def __contains__(self, word: BitWord) -> bool:
        return (word ^ self.offset) in self.base

    def leader(self) -> BitWord:
        return BitWord(int(self.words()[0]), self.base.n)


def coset_decompose(c: LinearCode, positions) -> list[Coset]:
    """Split ``c`` by the values of the bits at ``positions``.

    Coset ``j`` holds the codewords whose chosen bits spell ``j`` in binary,
    the first listed position being the most significant bit of ``j``.
    """
    positions = list(positions)
    x = len(positions)
    if len(set(positions)) != x or any(not 0 <= p < c.n for p in positions):
        raise UsageError(f"bad positions {positions} for n = {c.n}")
    indicators = BinaryMatrix(tuple(1 << (c.n - 1 - p) for p in positions), c.n)
    sub = kth_order_subcode(c, indicators)
    words = c.codewords()
    key = np.zeros(len(words), dtype=np.int64)
    for p in positions:
        key = (key << 1) | ((words >> np.uint64(c.n - 1 - p)) & np.uint64(1)).astype(np.int64)
    cosets = []
    for j in range(1 << x):
        # words are sorted, so the first hit is the smallest member
        first = int(words[np.argmax(key == j)])
        cosets.append(Coset(sub, BitWord(first, c.n)))
    return cosets


@dataclass
class SyndromeTable:
    code: LinearCode
    check: BinaryMatrix
    table: dict[int, int]
    max_correctable: int

    def syndrome(self, word: BitWord) -> BitWord:
        return self.check.syndrome(word)

    def lookup(self, syndrome: BitWord) -> BitWord:
        if syndrome.n != self.check.m:
            raise UsageError(f"syndrome length {syndrome.n} != {self.check.m}")
        return BitWord(self.table[syndrome.value], self.code.n)

    def decode(self, word: BitWord) -> BitWord:
        return word ^ self.lookup(self.syndrome(word))


def build_syndrome_table(c: LinearCode, check: BinaryMatrix | None = None) -> SyndromeTable:
    """Coset leaders for every reachable syndrome of ``check`` (default ``c.check``).

    Leaders have minimum weight; ties go to the lexicographically smallest word.
    """
    if c.n > MAX_TABLE_N:
        raise CapabilityError(f"n = {c.n} exceeds syndrome-table bound {MAX_TABLE_N}")
    check = c.check if check is None else check
    if not same_row_space(check, c.check):
        raise UsageError("check rows do not span the code's check space")
    n = c.n
    reachable = 1 << check.rank
    table: dict[int, int] = {}
    for w in range(n + 1):
        batch = sorted(
            sum(1 << (n - 1 - j) for j in combo) for combo in itertools.combinations(range(n), w)
        )
        for e in batch:
            s = check.syndrome(BitWord(e, n)).value
            table.setdefault(s, e)
        if len(table) == reachable:
            break
    return SyndromeTable(c, check, table, (c.d - 1) // 2)


@dataclass
class CssTriple:
    c_plus: LinearCode
    c: LinearCode
    c_perp: LinearCode
    K: int
    extra_rows: BinaryMatrix
    name: str = field(default="")

    @property
    def n(self) -> int:
        return self.c.n

    @property
    def k1(self) -> int:
        return self.c_plus.k

    @property
    def k2(self) -> int:
        return self.c_perp.k

    @property
    def d1(self) -> int:
        return self.c_plus.d

    @property
    def d2(self) -> int:
        return self.c_perp.d

    @property
    def correctable(self) -> int:
        """Number of arbitrary qubit errors the pair of bases can undo."""
        return min((self.d1 - 1) // 2, (self.d2 - 1) // 2)

    def verify(self) -> None:
        if self.c_plus.k - self.c.k != self.K:
            raise ConstructionError("dim(c_plus) - dim(c) != K")
        if any(BitWord(int(w), self.n) not in self.c_plus for w in span(self.c.generator)):
            raise ConstructionError("c is not contained in c_plus")
        if not dual(self.c).same_code(self.c_perp):
            raise ConstructionError("c_perp is not the dual of c")
        if self.k1 + self.k2 != self.n + self.K:
            raise ConstructionError("k1 + k2 != n + K")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "K": self.K,
            "d1": self.d1,
            "d2": self.d2,
            "extra_rows": self.extra_rows.to_strings(),
            "c_plus": self.c_plus.to_dict(),
            "c": self.c.to_dict(),
            "c_perp": self.c_perp.to_dict(),
        }


def build_css(c_plus: LinearCode, extra_rows: BinaryMatrix, name: str = "") -> CssTriple:
    c = kth_order_subcode(c_plus, extra_rows)
    triple = CssTriple(c_plus, c, dual(c), extra_rows.m, extra_rows, name)
    triple.verify()
    return triple


def _random_self_orthogonal(n: int, x: int, rng: np.random.Generator) -> BinaryMatrix | None:
    rows: list[int] = []
    for _ in range(x):
        current = BinaryMatrix(tuple(rows), n)
        # candidates must be orthogonal to the rows so far and to themselves
        allowed = null_space(current)
        for _attempt in range(32):
            coeffs = rng.integers(0, 2, size=allowed.m)
            v = 0
            for bit, r in zip(coeffs, allowed.rows):
                if bit:
                    v ^= r
            if v and parity(v) == 0 and row_reduce(current.stack(BinaryMatrix((v,), n)))[1] == len(rows) + 1:
                rows.append(v)
                break
        else:
            return None
    return BinaryMatrix(tuple(rows), n)


def search_weakly_self_dual(
    n: int,
    K: int,
    d_target: int,
    seed: int,
    max_attempts: int = 100_000,
) -> CssTriple | None:
    """Randomized search for a triple with both distances at least ``d_target``.

    Each attempt draws a random self-orthogonal ``C`` of dimension
    ``(n - K) // 2``, so ``C^perp`` contains ``C``; ``c_plus`` is ``C`` plus
    ``K`` random rows of ``C^perp``. Returns None when the budget runs out.
    """
    if n > MAX_TABLE_N:
        raise CapabilityError(f"n = {n} exceeds search bound {MAX_TABLE_N}")
    if not 1 <= K <= n:
        raise UsageError(f"K = {K} outside 1..{n}")
    rng = np.random.Generator(np.random.Philox(seed))
    x = (n - K) // 2
    for _ in range(max_attempts):
        gen_c = _random_self_orthogonal(n, x, rng) if x else BinaryMatrix.empty(n)
        if gen_c is None:
            continue
        c = LinearCode(gen_c) if x else LinearCode(gen_c, BinaryMatrix.identity(n))
        c_perp = dual(c)
        if c_perp.d < d_target:
            continue
        # extend C by K random words of C^perp to get c_plus
        plus_rows = list(gen_c.rows)
        perp_rows = c_perp.generator.rows
        tries = 0
        while len(plus_rows) < x + K and tries < 64:
            tries += 1
            coeffs = rng.integers(0, 2, size=len(perp_rows))
            v = 0
            for bit, r in zip(coeffs, perp_rows):
                if bit:
                    v ^= r
            trial = BinaryMatrix(tuple(plus_rows) + (v,), n)
            if trial.rank == len(plus_rows) + 1:
                plus_rows.append(v)
        if len(plus_rows) < x + K:
            continue
        c_plus = LinearCode(BinaryMatrix(tuple(plus_rows), n))
        if c_plus.d < d_target:
            continue
        extra = _extra_checks(c_plus, c)
        triple = build_css(c_plus, extra, name=f"search(n={n},K={K},d={d_target},seed={seed})")
        return triple
    return None


def _extra_checks(c_plus: LinearCode, c: LinearCode) -> BinaryMatrix:
    """Rows of ``c``'s check space that extend ``c_plus``'s check rows to a basis."""
    rows = list(c_plus.check.rows)
    extra = []
    for h in c.check.rows:
        trial = BinaryMatrix(tuple(rows) + (h,), c.n)
        if trial.rank == len(rows) + 1:
            rows.append(h)
            extra.append(h)
    return BinaryMatrix(tuple(extra), c.n)


# Code zoo: matrices copied verbatim from the construction they come from.

H_REP = BinaryMatrix.from_strings(["110", "101"])
G_SIMPLEX = BinaryMatrix.from_strings(["0001111", "0110011", "1010101"])
H_SIMPLEX = BinaryMatrix.from_strings(["1101001", "0101010", "1001100", "1110000"])
H_HAMMING = BinaryMatrix.from_strings(["0111100", "1011010", "1101001"])


def repetition3() -> LinearCode:
    return LinearCode(BinaryMatrix.from_strings(["111"]), H_REP, "repetition3")


def even_parity3() -> LinearCode:
    return LinearCode(H_REP, BinaryMatrix.from_strings(["111"]), "even_parity3")


def hamming7() -> LinearCode:
    return LinearCode.from_checks(H_HAMMING, "hamming7")


def simplex7() -> LinearCode:
    return LinearCode(G_SIMPLEX, H_SIMPLEX, "simplex7")


ZOO = {
    "repetition3": repetition3,
    "even_parity3": even_parity3,
    "hamming7": hamming7,
    "simplex7": simplex7,
}


def get_code(name: str) -> LinearCode:
    if name.startswith("full") and name[4:].isdigit():
        return LinearCode.full(int(name[4:]))
    try:
        return ZOO[name]()
    except KeyError:
        raise UsageError(f"unknown code {name!r}; known: {sorted(ZOO)}") from None


def seven_qubit_triple() -> CssTriple:
    """Hamming [7,4,3] with the all-ones check: two cosets of the simplex code."""
    return build_css(hamming7(), BinaryMatrix.from_strings(["1111111"]), "seven")


def three_qubit_triple() -> CssTriple:
    """All 3-bit words split by overall parity; protects basis 2 only."""
    return build_css(LinearCode.full(3), BinaryMatrix.from_strings(["111"]), "n3")


CSS_ZOO = {"seven": seven_qubit_triple, "n3": three_qubit_triple}


def get_css(name: str) -> CssTriple:
    try:
        return CSS_ZOO[name]()
    except KeyError:
        raise UsageError(f"unknown CSS triple {name!r}; known: {sorted(CSS_ZOO)}") from None
