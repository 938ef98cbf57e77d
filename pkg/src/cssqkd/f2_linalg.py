"""
Bit-packed linear algebra over GF(2).

Vectors are stored as a Python ``int`` payload plus an explicit length.
Bit ``i`` of the payload is coordinate ``i``; the string form lists
coordinate 0 first, so ``BitVector.from_str("1011")`` has ones at
positions 0, 2 and 3.  Bits at or above ``length`` are always zero, which
makes equality and hashing exact.

Matrices are tuples of row payloads.  Row reduction picks the leftmost
available column (lowest index) as the next pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, MembershipError


def _popcount(x: int) -> int:
    return x.bit_count()


def _parity(x: int) -> int:
    return _popcount(x) & 1


def _mask(length: int) -> int:
    return (1 << length) - 1


@dataclass(frozen=True, slots=True)
class BitVector:
    """Immutable vector in F_2^length backed by an integer."""

    length: int
    bits: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise DimensionError(f"negative length {self.length}")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionError(
                f"payload {self.bits:#x} has bits beyond length {self.length}"
            )

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length, 0)

    @classmethod
    def ones(cls, length: int) -> BitVector:
        return cls(length, _mask(length))

    @classmethod
    def unit(cls, length: int, index: int) -> BitVector:
        if not 0 <= index < length:
            raise IndexError(f"index {index} out of range for length {length}")
        return cls(length, 1 << index)

    @classmethod
    def from_str(cls, s: str) -> BitVector:
        s = s.strip()
        if any(c not in "01" for c in s):
            raise ValueError(f"not a 0/1 string: {s!r}")
        bits = 0
        for i, c in enumerate(s):
            if c == "1":
                bits |= 1 << i
        return cls(len(s), bits)

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> BitVector:
        bits = 0
        n = 0
        for i, v in enumerate(values):
            if v & 1:
                bits |= 1 << i
            n = i + 1
        return cls(n, bits)

    @classmethod
    def from_array(cls, arr) -> BitVector:
        arr = np.asarray(arr, dtype=np.uint8).ravel() & 1
        packed = np.packbits(arr, bitorder="little")
        return cls(arr.size, int.from_bytes(packed.tobytes(), "little"))

    @classmethod
    def from_support(cls, length: int, positions: Iterable[int]) -> BitVector:
        bits = 0
        for p in map(int, positions):
            if not 0 <= p < length:
                raise IndexError(f"position {p} out of range for length {length}")
            bits |= 1 << p
        return cls(length, bits)

    # views --------------------------------------------------------------
    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __iter__(self):
        b = self.bits
        for _ in range(self.length):
            yield b & 1
            b >>= 1

    def __str__(self) -> str:
        return "".join(str(b) for b in self)

    def __repr__(self) -> str:
        return f"BitVector('{self}')"

    def to_array(self) -> np.ndarray:
        nbytes = (self.length + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.length].copy()

    def weight(self) -> int:
        return _popcount(self.bits)

    def support(self) -> list[int]:
        return [i for i, b in enumerate(self) if b]

    def is_zero(self) -> bool:
        return self.bits == 0

    # algebra ------------------------------------------------------------
    def _check(self, other: BitVector) -> None:
        if self.length != other.length:
            raise DimensionError(f"length mismatch: {self.length} vs {other.length}")

    def __add__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.length, self.bits ^ other.bits)

    __xor__ = __add__
    __sub__ = __add__

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.length, self.bits & other.bits)

    def dot(self, other: BitVector) -> int:
        self._check(other)
        return _parity(self.bits & other.bits)

    def flip(self, i: int) -> BitVector:
        return self + BitVector.unit(self.length, i)

    def select(self, positions: Sequence[int]) -> BitVector:
        """Sub-vector at ``positions`` (in that order)."""
        b = self.bits
        out = 0
        positions = [int(p) for p in positions]
        for j, p in enumerate(positions):
            if not 0 <= p < self.length:
                raise IndexError(p)
            out |= ((b >> p) & 1) << j
        return BitVector(len(positions), out)

    def concat(self, other: BitVector) -> BitVector:
        return BitVector(self.length + other.length, self.bits | (other.bits << self.length))

    def permute(self, perm: Sequence[int]) -> BitVector:
        """Return w with ``w[perm[i]] = self[i]``."""
        if len(perm) != self.length:
            raise DimensionError("permutation length mismatch")
        out = 0
        for i, b in enumerate(self):
            if b:
                out |= 1 << int(perm[i])
        return BitVector(self.length, out)


def add(a: BitVector, b: BitVector) -> BitVector:
    return a + b


@dataclass(frozen=True, slots=True)
class BitMatrix:
    """Immutable binary matrix; ``row_bits[k]`` is the payload of row k."""

    rows: int
    cols: int
    row_bits: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.row_bits) != self.rows:
            raise DimensionError(f"{len(self.row_bits)} rows given, expected {self.rows}")
        for r in self.row_bits:
            if r < 0 or r >> self.cols:
                raise DimensionError(f"row {r:#x} wider than {self.cols} columns")

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], cols: int | None = None) -> BitMatrix:
        if cols is None:
            if not rows:
                raise DimensionError("column count required for an empty matrix")
            cols = rows[0].length
        for r in rows:
            if r.length != cols:
                raise DimensionError(f"row length {r.length} != {cols}")
        return cls(len(rows), cols, tuple(r.bits for r in rows))

    @classmethod
    def from_strs(cls, rows: Sequence[str], cols: int | None = None) -> BitMatrix:
        return cls.from_rows([BitVector.from_str(s) for s in rows], cols)

    @classmethod
    def from_array(cls, arr) -> BitMatrix:
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls.from_rows([BitVector.from_array(r) for r in arr], arr.shape[1])

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def empty(cls, cols: int) -> BitMatrix:
        return cls(0, cols, ())

    def row(self, k: int) -> BitVector:
        return BitVector(self.cols, self.row_bits[k])

    def row_vectors(self) -> list[BitVector]:
        return [BitVector(self.cols, r) for r in self.row_bits]

    def column(self, j: int) -> BitVector:
        return BitVector(self.rows, sum(((r >> j) & 1) << k for k, r in enumerate(self.row_bits)))

    def to_array(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        return np.stack([self.row(k).to_array() for k in range(self.rows)])

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_rows([self.column(j) for j in range(self.cols)], self.rows)

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if self.cols != other.cols:
            raise DimensionError("column mismatch in vstack")
        return BitMatrix(self.rows + other.rows, self.cols, self.row_bits + other.row_bits)

    def __str__(self) -> str:
        return "\n".join(str(v) for v in self.row_vectors())

    def mat_vec(self, w: BitVector) -> BitVector:
        return mat_vec(self, w)

    def rank(self) -> int:
        return rref(self)[1]


def mat_vec(h: BitMatrix, w: BitVector) -> BitVector:
    """Syndrome ``H w``: bit k is the parity of row k AND w."""
    if h.cols != w.length:
        raise DimensionError(f"matrix has {h.cols} columns, vector length {w.length}")
    wb = w.bits
    out = 0
    for k, r in enumerate(h.row_bits):
        out |= _parity(r & wb) << k
    return BitVector(h.rows, out)


def syndrome_int(row_bits: Sequence[int], w: int) -> int:
    """Raw-integer version of :func:`mat_vec` for hot loops."""
    out = 0
    for k, r in enumerate(row_bits):
        out |= _parity(r & w) << k
    return out


def _eliminate(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Gauss-Jordan on the first ``ncols`` columns; returns all rows and pivots.

    Bits at or above ``ncols`` ride along, which lets callers augment rows.
    """
    rows = list(rows)
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        if top == len(rows):
            break
        bit = 1 << col
        sel = next((i for i in range(top, len(rows)) if rows[i] & bit), None)
        if sel is None:
            continue
        rows[top], rows[sel] = rows[sel], rows[top]
        p = rows[top]
        for i in range(len(rows)):
            if i != top and rows[i] & bit:
                rows[i] ^= p
        pivots.append(col)
        top += 1
    return rows, pivots


def _rref_rows(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    rows, pivots = _eliminate(rows, ncols)
    return rows[: len(pivots)], pivots


def rref(m: BitMatrix) -> tuple[BitMatrix, int, list[int]]:
    """Reduced row echelon form.

    Returns the nonzero rows of the RREF (zero rows are dropped, so the
    row space is preserved and the row count equals the rank), the rank,
    and the pivot columns in increasing order.
    """
    rows, pivots = _rref_rows(m.row_bits, m.cols)
    return BitMatrix(len(rows), m.cols, tuple(rows)), len(pivots), pivots


def rank(m: BitMatrix) -> int:
    return rref(m)[1]


def nullspace(m: BitMatrix) -> BitMatrix:
    """Basis of ``{v : M v = 0}``, one free column per basis row."""
    rows, pivots = _rref_rows(m.row_bits, m.cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        v = 1 << f
        for r, p in zip(rows, pivots):
            if (r >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return BitMatrix(len(basis), m.cols, tuple(basis))


def solve(m: BitMatrix, s: BitVector) -> BitVector:
    """Particular solution of ``M x = s`` with every free coordinate zero."""
    if s.length != m.rows:
        raise DimensionError(f"right-hand side length {s.length} != {m.rows} rows")
    tag = 1 << m.cols
    aug = [r | (tag if (s.bits >> k) & 1 else 0) for k, r in enumerate(m.row_bits)]
    rows, pivots = _eliminate(aug, m.cols)
    if any(r & tag for r in rows[len(pivots):]):
        raise MembershipError("system has no solution")
    x = 0
    for r, p in zip(rows, pivots):
        if r & tag:
            x |= 1 << p
    return BitVector(m.cols, x)


def _reduce(v: int, rows: Sequence[int], pivots: Sequence[int]) -> int:
    for r, p in zip(rows, pivots):
        if (v >> p) & 1:
            v ^= r
    return v


def in_row_space(v: BitVector, m: BitMatrix) -> bool:
    if v.length != m.cols:
        raise DimensionError("vector/matrix width mismatch")
    rows, pivots = _rref_rows(m.row_bits, m.cols)
    return _reduce(v.bits, rows, pivots) == 0


def is_subspace(a: BitMatrix, b: BitMatrix) -> bool:
    """True iff rowspace(a) is contained in rowspace(b)."""
    if a.cols != b.cols:
        raise DimensionError(f"column mismatch: {a.cols} vs {b.cols}")
    rows, pivots = _rref_rows(b.row_bits, b.cols)
    return all(_reduce(r, rows, pivots) == 0 for r in a.row_bits)


def row_space(m: BitMatrix) -> list[BitVector]:
    """All 2^rank elements of the row space (small matrices only)."""
    basis, r, _ = rref(m)
    out = []
    for mask in range(1 << r):
        v = 0
        for k in range(r):
            if (mask >> k) & 1:
                v ^= basis.row_bits[k]
        out.append(BitVector(m.cols, v))
    return out


class CosetBasis:
    """Canonical labelling of the cosets of C2 inside C1.

    The C2 generators are brought to RREF; C1's generators are reduced
    against that basis and the remainder is brought to RREF as well,
    giving complement rows that vanish on every C2 pivot.  The label of
    v is read off the complement pivots after clearing C2's pivots, so
    it is linear in v and zero exactly on C2.
    """

    def __init__(self, c1_gen: BitMatrix, c2_gen: BitMatrix):
        if c1_gen.cols != c2_gen.cols:
            raise DimensionError("C1/C2 width mismatch")
        self.n = c1_gen.cols
        self._c2_rows, self._c2_piv = _rref_rows(c2_gen.row_bits, self.n)
        reduced = [_reduce(r, self._c2_rows, self._c2_piv) for r in c1_gen.row_bits]
        self._f_rows, self._f_piv = _rref_rows(reduced, self.n)
        for r in self._c2_rows:
            if not in_row_space(BitVector(self.n, r), c1_gen):
                raise MembershipError("C2 is not contained in C1")
        self.k = len(self._f_rows)

    @property
    def dim_c2(self) -> int:
        return len(self._c2_rows)

    def label_int(self, v: int) -> int:
        r = _reduce(v, self._c2_rows, self._c2_piv)
        lab = 0
        for j, (f, p) in enumerate(zip(self._f_rows, self._f_piv)):
            if (r >> p) & 1:
                r ^= f
                lab |= 1 << j
        if r:
            raise MembershipError("vector is not in C1")
        return lab

    def label(self, v: BitVector) -> BitVector:
        if v.length != self.n:
            raise DimensionError("vector length mismatch")
        return BitVector(self.k, self.label_int(v.bits))

    def representative(self, label: BitVector) -> BitVector:
        """The element of span(complement rows) carrying ``label``."""
        if label.length != self.k:
            raise DimensionError("label length mismatch")
        v = 0
        for j, f in enumerate(self._f_rows):
            if (label.bits >> j) & 1:
                v ^= f
        return BitVector(self.n, v)


def coset_label(v: BitVector, c1_gen: BitMatrix, c2_gen: BitMatrix) -> BitVector:
    return CosetBasis(c1_gen, c2_gen).label(v)


def random_codeword(gen: BitMatrix, rng: np.random.Generator) -> BitVector:
    """Uniform element of rowspace(gen); gen must have full row rank."""
    if gen.rows == 0:
        return BitVector.zeros(gen.cols)
    coeffs = rng.integers(0, 2, size=gen.rows)
    v = 0
    for c, r in zip(coeffs, gen.row_bits):
        if c:
            v ^= r
    return BitVector(gen.cols, v)


def random_full_rank(rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
    """Random ``rows x cols`` matrix of full row rank (rejection sampling)."""
    if rows > cols:
        raise DimensionError("cannot have full row rank with rows > cols")
    while True:
        arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        m = BitMatrix.from_array(arr) if rows else BitMatrix.empty(cols)
        if rank(m) == rows:
            return m
