"""
CSS code pairs built from nested binary codes C2 < C1 < F_2^n.

A pair carries generators for C1 and C2, the parity check H1 of C1
(a basis of C1-perp) and the parity check H2 of C2-perp (a basis of C2).
Bit-flip syndromes come from H1 and phase-flip syndromes from H2, and the
two are decoded independently with syndrome lookup tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DecodeFailure, DimensionError, DomainError, MembershipError
from .f2_linalg import (
    BitMatrix,
    BitVector,
    CosetBasis,
    in_row_space,
    is_subspace,
    mat_vec,
    nullspace,
    random_full_rank,
    rank,
    rref,
    row_space,
    syndrome_int,
)


@dataclass(frozen=True)
class SyndromePair:
    bit_syndrome: BitVector
    phase_syndrome: BitVector


@dataclass(frozen=True)
class CodewordDescription:
    """Support and signs of one Q_{x,z} basis state.

    The state is ``sum_i signs[i] |support[i]>`` scaled by |C2|^{-1/2}.
    """

    x: BitVector
    z: BitVector
    v: BitVector
    support: tuple[BitVector, ...]
    signs: tuple[int, ...]

    @property
    def amplitude(self) -> float:
        return 1.0 / math.sqrt(len(self.support))


@dataclass(frozen=True)
class PairCheck:
    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class SyndromeTable:
    """Minimum-weight lookup decoder for one parity-check matrix.

    Errors are enumerated by increasing weight and, within a weight, in
    lexicographic order of their supports; the first error seen for a
    syndrome wins.
    """

    def __init__(self, h: BitMatrix, t: int):
        self.h = h
        self.t = t
        self._rows = h.row_bits
        table: dict[int, int] = {}
        for w in range(t + 1):
            for support in combinations(range(h.cols), w):
                e = 0
                for p in support:
                    e |= 1 << p
                table.setdefault(syndrome_int(self._rows, e), e)
        self._table = table

    def __len__(self) -> int:
        return len(self._table)

    def lookup_int(self, syndrome: int) -> int:
        try:
            return self._table[syndrome]
        except KeyError:
            raise DecodeFailure(BitVector(self.h.rows, syndrome), self.t) from None

    def decode(self, syndrome: BitVector) -> BitVector:
        if syndrome.length != self.h.rows:
            raise DimensionError(
                f"syndrome length {syndrome.length} != {self.h.rows} check rows"
            )
        return BitVector(self.h.cols, self.lookup_int(syndrome.bits))


@dataclass(frozen=True)
class CssCodePair:
    """Nested pair C2 < C1 with its two parity-check matrices.

    ``t_bit`` and ``t_phase`` are the designed correction radii of C1 and
    C2-perp; ``t`` is the smaller of the two.
    """

    n: int
    c1_gen: BitMatrix
    c2_gen: BitMatrix
    h1: BitMatrix
    h2: BitMatrix
    t_bit: int
    t_phase: int
    name: str = field(default="custom", compare=False)

    @classmethod
    def from_codes(
        cls,
        c1_gen: BitMatrix,
        c2_gen: BitMatrix,
        t: int | None = None,
        *,
        t_bit: int | None = None,
        t_phase: int | None = None,
        name: str = "custom",
    ) -> CssCodePair:
        """Derive H1 = basis of C1-perp and H2 = basis of C2 from generators."""
        if c1_gen.cols != c2_gen.cols:
            raise DimensionError("C1 and C2 generators differ in width")
        c1, _, _ = rref(c1_gen)
        c2, _, _ = rref(c2_gen)
        t_bit = t if t_bit is None else t_bit
        t_phase = t if t_phase is None else t_phase
        if t_bit is None or t_phase is None:
            raise ValueError("correction radius not given")
        return cls(c1_gen.cols, c1, c2, nullspace(c1), c2, t_bit, t_phase, name)

    @property
    def t(self) -> int:
        return min(self.t_bit, self.t_phase)

    @cached_property
    def dim_c1(self) -> int:
        return rank(self.c1_gen)

    @cached_property
    def dim_c2(self) -> int:
        return rank(self.c2_gen)

    @property
    def k(self) -> int:
        return self.dim_c1 - self.dim_c2

    @cached_property
    def cosets(self) -> CosetBasis:
        return CosetBasis(self.c1_gen, self.c2_gen)

    @cached_property
    def bit_table(self) -> SyndromeTable:
        return SyndromeTable(self.h1, self.t_bit)

    @cached_property
    def phase_table(self) -> SyndromeTable:
        return SyndromeTable(self.h2, self.t_phase)

    @cached_property
    def c1_perp(self) -> CosetBasis:
        """Cosets of C1-perp in C2-perp, used to classify residual phase errors."""
        return CosetBasis(nullspace(self.c2_gen), self.h1)

    def in_c1(self, v: BitVector) -> bool:
        return mat_vec(self.h1, v).is_zero()

    def in_c2(self, v: BitVector) -> bool:
        return in_row_space(v, self.c2_gen)

    def coset_label(self, v: BitVector) -> BitVector:
        return self.cosets.label(v)

    def key_representative(self, key: BitVector) -> BitVector:
        """A C1 element whose C2-coset carries ``key``."""
        return self.cosets.representative(key)

    def dual(self) -> CssCodePair:
        """The code Q* built from C1-perp < C2-perp."""
        return CssCodePair.from_codes(
            nullspace(self.c2_gen),
            self.h1,
            t_bit=self.t_phase,
            t_phase=self.t_bit,
            name=f"{self.name}*",
        )


def validate_pair(pair: CssCodePair) -> PairCheck:
    n = pair.n
    for label, m in (("C1", pair.c1_gen), ("C2", pair.c2_gen), ("H1", pair.h1), ("H2", pair.h2)):
        if m.cols != n:
            return PairCheck(False, f"{label} has {m.cols} columns, expected {n}")
    if not is_subspace(pair.c2_gen, pair.c1_gen):
        return PairCheck(False, "containment: C2 is not a subspace of C1")
    for r in pair.h1.row_vectors():
        for g in pair.c1_gen.row_vectors():
            if r.dot(g):
                return PairCheck(False, "H1 row not orthogonal to C1")
    if rank(pair.h1) != n - pair.dim_c1:
        return PairCheck(False, "H1 does not span C1-perp")
    c2_perp = nullspace(pair.c2_gen)
    for r in pair.h2.row_vectors():
        for g in c2_perp.row_vectors():
            if r.dot(g):
                return PairCheck(False, "H2 row not orthogonal to C2-perp")
    if rank(pair.h2) != pair.dim_c2:
        return PairCheck(False, "H2 does not span C2")
    for r in pair.h1.row_vectors():
        for g in pair.c2_gen.row_vectors():
            if r.dot(g):
                return PairCheck(False, "commutation: C1-perp and C2 not orthogonal")
    if pair.k < 1:
        return PairCheck(False, f"encoded dimension k = {pair.k} < 1")
    return PairCheck(True)


def codeword_description(
    pair: CssCodePair, v: BitVector, x: BitVector | None = None, z: BitVector | None = None
) -> CodewordDescription:
    n = pair.n
    x = BitVector.zeros(n) if x is None else x
    z = BitVector.zeros(n) if z is None else z
    if x.length != n or z.length != n or v.length != n:
        raise DimensionError("v, x, z must have length n")
    if not pair.in_c1(v):
        raise MembershipError(f"{v} is not in C1")
    ws = row_space(pair.c2_gen)
    support = tuple(x + v + w for w in ws)
    signs = tuple(-1 if z.dot(w) else 1 for w in ws)
    return CodewordDescription(x, z, v, support, signs)


def syndromes_of_error(pair: CssCodePair, bit_err: BitVector, phase_err: BitVector) -> SyndromePair:
    return SyndromePair(mat_vec(pair.h1, bit_err), mat_vec(pair.h2, phase_err))


def decode_syndrome(h: BitMatrix, syndrome: BitVector, t: int) -> BitVector:
    """Minimum-weight error of weight <= t with ``H e = syndrome``.

    Raises DecodeFailure when no such error exists.
    """
    return SyndromeTable(h, t).decode(syndrome)


def correct_to_codeword(pair: CssCodePair, noisy: BitVector) -> BitVector:
    s = mat_vec(pair.h1, noisy)
    return noisy + pair.bit_table.decode(s)


# rates ---------------------------------------------------------------------

def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def gv_rate(delta: float) -> float:
    """Gilbert-Varshamov CSS rate 1 - 2 H(2 delta)."""
    if not 0.0 <= delta <= 0.5:
        raise DomainError(f"delta {delta} outside [0, 1/2]")
    return 1.0 - 2.0 * binary_entropy(2.0 * delta)


def shannon_rate(delta: float) -> float:
    """Random-error CSS rate 1 - 2 H(delta)."""
    if not 0.0 <= delta <= 0.5:
        raise DomainError(f"delta {delta} outside [0, 1/2]")
    return 1.0 - 2.0 * binary_entropy(delta)


def shannon_threshold(tol: float = 1e-9) -> float:
    """Bisection root of the Shannon rate on (0, 1/2)."""
    lo, hi = 1e-12, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if shannon_rate(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# shipped codes ---------------------------------------------------------------

HAMMING_7_4_CHECK = ("0001111", "0110011", "1010101")


def hamming_check_matrix() -> BitMatrix:
    """Check matrix whose column j is the binary expansion of j + 1."""
    return BitMatrix.from_strs(HAMMING_7_4_CHECK)


def steane_pair() -> CssCodePair:
    h = hamming_check_matrix()
    c1 = nullspace(h)
    return CssCodePair.from_codes(c1, h, t=1, name="steane")


def repetition_pair(n: int = 3) -> CssCodePair:
    """Bit-flip repetition code: C1 = {0, 1...1}, C2 = {0}."""
    c1 = BitMatrix.from_rows([BitVector.ones(n)])
    return CssCodePair.from_codes(
        c1, BitMatrix.empty(n), t_bit=(n - 1) // 2, t_phase=0, name=f"rep{n}"
    )


def phase_repetition_pair(n: int = 3) -> CssCodePair:
    """Phase-flip repetition code, the dual of :func:`repetition_pair`."""
    return replace(repetition_pair(n).dual(), name=f"phase{n}")


def trivial_pair() -> CssCodePair:
    """Single qubit, no protection: C1 = F_2, C2 = {0}."""
    return CssCodePair.from_codes(BitMatrix.identity(1), BitMatrix.empty(1), t=0, name="trivial1")


def random_nested_pair(
    n: int, dim_c1: int, dim_c2: int, rng: np.random.Generator, t: int = 1
) -> CssCodePair:
    """Random C2 < C1 of the given dimensions; ``t`` is nominal, not guaranteed."""
    if not 0 <= dim_c2 < dim_c1 <= n:
        raise DomainError("need 0 <= dim C2 < dim C1 <= n")
    c1 = random_full_rank(dim_c1, n, rng)
    c2 = BitMatrix(dim_c2, n, c1.row_bits[:dim_c2])
    return CssCodePair.from_codes(c1, c2, t=t, name=f"random{n}")


SHIPPED = {
    "steane": steane_pair,
    "rep3": lambda: repetition_pair(3),
    "phase3": lambda: phase_repetition_pair(3),
    "trivial1": trivial_pair,
}


def get_pair(name: str, **kwargs) -> CssCodePair:
    """Look up a shipped pair, or build ``random`` with n/dim_c1/dim_c2/t/seed."""
    if name == "random":
        seed = kwargs.pop("seed", 0)
        return random_nested_pair(rng=np.random.default_rng(seed), **kwargs)
    try:
        return SHIPPED[name]()
    except KeyError:
        raise KeyError(f"unknown code {name!r}; known: {sorted(SHIPPED) + ['random']}") from None


# text serialization ------------------------------------------------------------

def dump_pair(pair: CssCodePair) -> str:
    """Plain-text form: header lines, then each matrix as rows of 0/1."""
    lines = [
        "# css-pair v1",
        f"name {pair.name}",
        f"n {pair.n}",
        f"t_bit {pair.t_bit}",
        f"t_phase {pair.t_phase}",
        f"dim_c1 {pair.dim_c1}",
        f"dim_c2 {pair.dim_c2}",
    ]
    for label, m in (("C1", pair.c1_gen), ("C2", pair.c2_gen), ("H1", pair.h1), ("H2", pair.h2)):
        lines.append(f"{label} {m.rows}")
        lines.extend(str(r) for r in m.row_vectors())
    return "\n".join(lines) + "\n"


def load_pair(text: str) -> CssCodePair:
    header: dict[str, str] = {}
    mats: dict[str, BitMatrix] = {}
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    i = 0
    while i < len(lines):
        key, _, value = lines[i].partition(" ")
        i += 1
        if key in ("C1", "C2", "H1", "H2"):
            count = int(value)
            rows = lines[i : i + count]
            i += count
            mats[key] = BitMatrix.from_strs(rows, int(header["n"]))
        else:
            header[key] = value
    missing = {"C1", "C2", "H1", "H2"} - mats.keys()
    if missing or "n" not in header:
        raise ValueError(f"incomplete pair text, missing {sorted(missing) or ['n']}")
    pair = CssCodePair(
        int(header["n"]),
        mats["C1"],
        mats["C2"],
        mats["H1"],
        mats["H2"],
        int(header.get("t_bit", 0)),
        int(header.get("t_phase", 0)),
        header.get("name", "custom"),
    )
    for key, dim in (("dim_c1", pair.dim_c1), ("dim_c2", pair.dim_c2)):
        if key in header and int(header[key]) != dim:
            raise ValueError(f"header {key}={header[key]} but matrix rank is {dim}")
    return pair
