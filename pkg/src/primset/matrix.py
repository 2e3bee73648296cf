"""Square binary matrices stored as bit rows, matrix sets and their text format.

Row ``i`` of a matrix is a Python int whose bit ``j`` is the entry ``(i, j)``.
Indices are 0-based throughout the library.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidWord, ParseError

MAX_N = 512

FORMAT_MAGIC = "primset 1"


def iter_bits(x: int):
    """Yield the indices of the set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def popcount(x: int) -> int:
    return bin(x).count("1")


class BinaryMatrix:
    """Immutable square 0/1 matrix."""

    __slots__ = ("n", "rows", "_hash")

    def __init__(self, n: int, rows: Iterable[int]):
        rows = tuple(int(r) for r in rows)
        if not 1 <= n <= MAX_N:
            raise DimensionMismatch(f"dimension {n} outside 1..{MAX_N}")
        if len(rows) != n:
            raise DimensionMismatch(f"expected {n} rows, got {len(rows)}")
        full = (1 << n) - 1
        for r in rows:
            if r < 0 or r & ~full:
                raise DimensionMismatch(f"row {r:#x} does not fit in {n} columns")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_hash", hash((n, rows)))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryMatrix is immutable")

    # constructors

    @classmethod
    def zeros(cls, n: int) -> BinaryMatrix:
        return cls(n, [0] * n)

    @classmethod
    def ones(cls, n: int) -> BinaryMatrix:
        return cls(n, [(1 << n) - 1] * n)

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls(n, [1 << i for i in range(n)])

    @classmethod
    def elementary(cls, n: int, i: int, j: int) -> BinaryMatrix:
        """The matrix with a single 1 at ``(i, j)``."""
        rows = [0] * n
        rows[i] = 1 << j
        return cls(n, rows)

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> BinaryMatrix:
        """Permutation matrix with ``P[i, perm[i]] = 1``."""
        return cls(len(perm), [1 << p for p in perm])

    @classmethod
    def from_function(cls, f: Sequence[int]) -> BinaryMatrix:
        """Row-stochastic matrix of the map ``i -> f[i]``."""
        return cls(len(f), [1 << t for t in f])

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> BinaryMatrix:
        n = len(lines)
        rows = []
        for line in lines:
            if len(line) != n or set(line) - {"0", "1"}:
                raise ValueError(f"bad row {line!r} for dimension {n}")
            rows.append(int(line[::-1], 2))
        return cls(n, rows)

    @classmethod
    def from_array(cls, a) -> BinaryMatrix:
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square array, got shape {a.shape}")
        n = a.shape[0]
        packed = np.packbits(a.astype(bool), axis=1, bitorder="little")
        return cls(n, [int.from_bytes(row.tobytes(), "little") for row in packed])

    # accessors

    def __getitem__(self, ij) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    def to_array(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        buf = b"".join(r.to_bytes(nbytes, "little") for r in self.rows)
        bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8).reshape(self.n, nbytes),
                             axis=1, bitorder="little")
        return bits[:, : self.n].copy()

    def to_strings(self) -> list[str]:
        return [format(r, f"0{self.n}b")[::-1] for r in self.rows]

    def columns(self) -> tuple[int, ...]:
        cols = [0] * self.n
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                cols[j] |= 1 << i
        return tuple(cols)

    @property
    def T(self) -> BinaryMatrix:
        return BinaryMatrix(self.n, self.columns())

    def count_ones(self) -> int:
        return sum(popcount(r) for r in self.rows)

    def with_entry(self, i: int, j: int, value: int) -> BinaryMatrix:
        rows = list(self.rows)
        if value:
            rows[i] |= 1 << j
        else:
            rows[i] &= ~(1 << j)
        return BinaryMatrix(self.n, rows)

    def is_positive(self) -> bool:
        full = (1 << self.n) - 1
        return all(r == full for r in self.rows)

    def as_function(self) -> tuple[int, ...] | None:
        """Target state of every row for a row-stochastic matrix, else None."""
        out = []
        for r in self.rows:
            if r == 0 or r & (r - 1):
                return None
            out.append(r.bit_length() - 1)
        return tuple(out)

    # algebra

    def __matmul__(self, other: BinaryMatrix) -> BinaryMatrix:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatch(f"{self.n} vs {other.n}")
        brows = other.rows
        out = []
        for r in self.rows:
            acc = 0
            while r:
                low = r & -r
                acc |= brows[low.bit_length() - 1]
                r ^= low
            out.append(acc)
        return BinaryMatrix(self.n, out)

    def __or__(self, other: BinaryMatrix) -> BinaryMatrix:
        if other.n != self.n:
            raise DimensionMismatch(f"{self.n} vs {other.n}")
        return BinaryMatrix(self.n, [a | b for a, b in zip(self.rows, other.rows)])

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryMatrix) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.n}, {'/'.join(self.to_strings())})"


def dominates(a: BinaryMatrix, b: BinaryMatrix) -> bool:
    """True iff ``a[i, j] >= b[i, j]`` everywhere."""
    if a.n != b.n:
        raise DimensionMismatch(f"{a.n} vs {b.n}")
    return all(rb & ~ra == 0 for ra, rb in zip(a.rows, b.rows))


@dataclass(frozen=True)
class MatrixClass:
    is_nz: bool
    is_positive: bool
    has_zero_row: bool
    has_zero_col: bool
    is_permutation: bool
    is_row_stochastic: bool
    is_perturbed_permutation: bool


def classify(m: BinaryMatrix) -> MatrixClass:
    n = m.n
    full = (1 << n) - 1
    union = 0
    for r in m.rows:
        union |= r
    has_zero_row = any(r == 0 for r in m.rows)
    has_zero_col = union != full
    row_stochastic = all(r and not r & (r - 1) for r in m.rows)
    permutation = row_stochastic and has_zero_col is False
    ones = m.count_ones()
    perturbed = False
    if ones == n + 1 and not has_zero_row and not has_zero_col:
        # exactly one row holds two ones; dropping either must leave a permutation
        (i,) = [k for k, r in enumerate(m.rows) if r & (r - 1)]
        others = 0
        for k, r in enumerate(m.rows):
            if k != i:
                others |= r
        perturbed = popcount(others) == n - 1 and popcount(m.rows[i] & ~others) == 1
    return MatrixClass(
        is_nz=not has_zero_row and not has_zero_col,
        is_positive=all(r == full for r in m.rows),
        has_zero_row=has_zero_row,
        has_zero_col=has_zero_col,
        is_permutation=permutation,
        is_row_stochastic=row_stochastic,
        is_perturbed_permutation=perturbed,
    )


class MatrixSet:
    """Ordered, non-empty list of same-size binary matrices (equivalently an NDFA)."""

    __slots__ = ("n", "mats")

    def __init__(self, mats: Iterable[BinaryMatrix]):
        mats = tuple(mats)
        if not mats:
            raise ValueError("a matrix set needs at least one matrix")
        n = mats[0].n
        for m in mats:
            if m.n != n:
                raise DimensionMismatch(f"mixed dimensions {n} and {m.n}")
        self.n = n
        self.mats = mats

    def __len__(self) -> int:
        return len(self.mats)

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, k: int) -> BinaryMatrix:
        return self.mats[k]

    def __eq__(self, other) -> bool:
        return isinstance(other, MatrixSet) and self.mats == other.mats

    def __hash__(self) -> int:
        return hash(self.mats)

    def __repr__(self) -> str:
        return f"MatrixSet(n={self.n}, m={len(self.mats)})"

    def without(self, k: int) -> MatrixSet:
        return MatrixSet(m for i, m in enumerate(self.mats) if i != k)

    def total(self) -> BinaryMatrix:
        """Boolean sum of the members."""
        out = self.mats[0]
        for m in self.mats[1:]:
            out = out | m
        return out


def word_product(s: MatrixSet, word: Sequence[int]) -> BinaryMatrix:
    """Boolean product ``M[w0] M[w1] ...``; the empty word gives the identity."""
    m = len(s)
    for k in word:
        if not 0 <= k < m:
            raise InvalidWord(f"letter {k} outside 0..{m - 1}")
    out = BinaryMatrix.identity(s.n)
    for k in word:
        out = out @ s[k]
    return out


def transpose_set(s: MatrixSet) -> MatrixSet:
    return MatrixSet(m.T for m in s)


# text format


def serialize(s: MatrixSet) -> str:
    lines = [FORMAT_MAGIC, f"{s.n} {len(s)}"]
    for k, m in enumerate(s, start=1):
        lines.append(f"matrix {k}")
        lines.extend(m.to_strings())
    return "\n".join(lines) + "\n"


def parse(text: str) -> MatrixSet:
    lines = text.splitlines()
    pos = 0

    def next_line():
        # returns (1-based line number, stripped content) of the next non-blank line
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise ParseError("unexpected end of input", pos + 1)
        pos += 1
        return pos, lines[pos - 1].strip()

    lineno, head = next_line()
    if head != FORMAT_MAGIC:
        raise ParseError(f"expected {FORMAT_MAGIC!r}, got {head!r}", lineno)
    lineno, dims = next_line()
    parts = dims.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(f"malformed header {dims!r}", lineno)
    n, m = int(parts[0]), int(parts[1])
    if not 1 <= n <= MAX_N or m < 1:
        raise ParseError(f"bad dimensions n={n} m={m}", lineno)
    mats = []
    for k in range(1, m + 1):
        lineno, tag = next_line()
        if tag != f"matrix {k}":
            raise ParseError(f"expected 'matrix {k}', got {tag!r}", lineno)
        rows = []
        for _ in range(n):
            if pos >= len(lines):
                raise ParseError("unexpected end of input", pos + 1)
            pos += 1
            line = lines[pos - 1].strip()
            if len(line) != n:
                raise ParseError(f"row has {len(line)} characters, expected {n}", pos)
            if set(line) - {"0", "1"}:
                raise ParseError(f"row contains characters outside {{0,1}}: {line!r}", pos)
            rows.append(line)
        mats.append(BinaryMatrix.from_strings(rows))
    while pos < len(lines):
        if lines[pos].strip():
            raise ParseError(f"trailing content {lines[pos].strip()!r}", pos + 1)
        pos += 1
    return MatrixSet(mats)
