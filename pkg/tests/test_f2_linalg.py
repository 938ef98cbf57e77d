import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cssqkd.errors import DimensionError, MembershipError
from cssqkd.f2_linalg import (
    BitMatrix,
    BitVector,
    CosetBasis,
    coset_label,
    in_row_space,
    is_subspace,
    nullspace,
    random_codeword,
    random_full_rank,
    rank,
    row_space,
    rref,
    solve,
)


def brute_span(rows, n):
    """Every XOR combination of the rows, as a set of ints."""
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return span


@st.composite
def matrices(draw, max_rows=6, max_cols=8):
    cols = draw(st.integers(1, max_cols))
    rows = draw(st.integers(0, max_rows))
    bits = draw(st.lists(st.integers(0, (1 << cols) - 1), min_size=rows, max_size=rows))
    return BitMatrix(rows, cols, tuple(bits))


def test_string_form_puts_position_zero_first():
    v = BitVector.from_str("1100")
    assert v[0] == 1 and v[1] == 1 and v[3] == 0
    assert v.bits == 0b0011
    assert str(v) == "1100"


def test_from_array_roundtrip():
    arr = np.array([1, 0, 1, 1, 0, 0, 0, 0, 1, 1], dtype=np.uint8)
    v = BitVector.from_array(arr)
    assert v.support() == [0, 2, 3, 8, 9]
    assert np.array_equal(v.to_array(), arr)


def test_length_mismatch_raises():
    with pytest.raises(DimensionError):
        BitVector.from_str("101") + BitVector.from_str("10")
    with pytest.raises(DimensionError):
        BitVector.from_str("101").dot(BitVector.from_str("1"))


def test_bits_beyond_length_rejected():
    with pytest.raises(ValueError):
        BitVector(2, 0b100)


def test_select_accepts_numpy_indices_on_long_vectors():
    v = BitVector.from_support(300, [5, 250, 299])
    got = v.select(np.array([299, 250, 0], dtype=np.int64))
    assert str(got) == "110"


def test_permute():
    v = BitVector.from_str("1100")
    # position i moves to perm[i]
    assert str(v.permute([3, 2, 1, 0])) == "0011"


def test_rref_hamming_frozen():
    h = BitMatrix.from_strs(["0001111", "0110011", "1010101"])
    r, k, piv = rref(h)
    assert k == 3
    assert piv == [0, 1, 3]
    assert [str(x) for x in r.row_vectors()] == ["1010101", "0110011", "0001111"]


def test_nullspace_hamming_is_hamming_code():
    h = BitMatrix.from_strs(["0001111", "0110011", "1010101"])
    ns = nullspace(h)
    assert ns.rows == 4
    words = brute_span(ns.row_bits, 7)
    assert len(words) == 16
    weights = sorted(bin(w).count("1") for w in words)
    # weight enumerator of the [7,4,3] code
    assert weights.count(3) == 7 and weights.count(4) == 7 and weights.count(7) == 1


@given(matrices())
def test_rank_matches_span_size(m):
    assert 2 ** rank(m) == len(brute_span(m.row_bits, m.cols))


@given(matrices())
def test_rank_nullity(m):
    ns = nullspace(m)
    assert rank(m) + ns.rows == m.cols
    for z in ns.row_vectors():
        assert m.mat_vec(z).is_zero()


@given(matrices())
def test_nullspace_is_whole_kernel(m):
    kernel = {x for x in range(1 << m.cols) if m.mat_vec(BitVector(m.cols, x)).is_zero()}
    assert brute_span(nullspace(m).row_bits, m.cols) == kernel


@given(matrices())
def test_rref_preserves_row_space(m):
    r, k, piv = rref(m)
    assert brute_span(r.row_bits, m.cols) == brute_span(m.row_bits, m.cols)
    assert r.rows == k
    for i, p in enumerate(piv):
        col = r.column(p)
        assert col.support() == [i]


@given(matrices(), st.data())
def test_solve_finds_preimage(m, data):
    x = BitVector(m.cols, data.draw(st.integers(0, (1 << m.cols) - 1)))
    s = m.mat_vec(x)
    y = solve(m, s)
    assert m.mat_vec(y) == s


def test_solve_inconsistent():
    m = BitMatrix.from_strs(["11", "11"])
    with pytest.raises(MembershipError):
        solve(m, BitVector.from_str("10"))


@given(matrices())
def test_row_space_enumeration(m):
    assert {v.bits for v in row_space(m)} == brute_span(m.row_bits, m.cols)


@given(matrices(), st.data())
def test_in_row_space(m, data):
    x = data.draw(st.integers(0, (1 << m.cols) - 1))
    assert in_row_space(BitVector(m.cols, x), m) == (x in brute_span(m.row_bits, m.cols))


@given(st.lists(st.integers(0, 255), min_size=2, max_size=8), st.integers(0, 255))
def test_add_is_group(xs, y):
    vs = [BitVector(8, x) for x in xs]
    total = BitVector.zeros(8)
    for v in vs:
        total = total + v
    assert (total + total).is_zero()
    assert vs[0] + vs[1] == vs[1] + vs[0]
    assert (vs[0] + BitVector(8, y)).weight() <= vs[0].weight() + BitVector(8, y).weight()


def nested(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 8))
    d1 = int(rng.integers(1, n + 1))
    d2 = int(rng.integers(0, d1))
    c1 = random_full_rank(d1, n, rng)
    return c1, BitMatrix(d2, n, c1.row_bits[:d2])


@given(st.integers(0, 10_000))
def test_coset_label_is_linear_and_constant_on_cosets(seed):
    c1, c2 = nested(seed)
    cb = CosetBasis(c1, c2)
    words = row_space(c1)
    c2_words = row_space(c2)
    rng = np.random.default_rng(seed)
    a, b = words[rng.integers(len(words))], words[rng.integers(len(words))]
    assert cb.label(a + b) == cb.label(a) + cb.label(b)
    for w in c2_words:
        assert cb.label(a + w) == cb.label(a)
        assert cb.label(w).is_zero()


@given(st.integers(0, 10_000))
def test_labels_biject_onto_cosets(seed):
    c1, c2 = nested(seed)
    cb = CosetBasis(c1, c2)
    k = c1.rows - c2.rows
    assert cb.k == k
    labels = {cb.label(w).bits for w in row_space(c1)}
    assert labels == set(range(1 << k))
    for lab in range(1 << k):
        rep = cb.representative(BitVector(k, lab))
        assert in_row_space(rep, c1)
        assert cb.label(rep).bits == lab


def test_coset_label_rejects_non_members():
    c1 = BitMatrix.from_strs(["111"])
    c2 = BitMatrix.empty(3)
    with pytest.raises(MembershipError):
        coset_label(BitVector.from_str("100"), c1, c2)
    with pytest.raises(MembershipError):
        CosetBasis(BitMatrix.from_strs(["110"]), BitMatrix.from_strs(["111"]))


def test_is_subspace():
    a = BitMatrix.from_strs(["1100"])
    b = BitMatrix.from_strs(["1000", "0100"])
    assert is_subspace(a, b)
    assert not is_subspace(b, a)


def test_random_codeword_uniform():
    gen = BitMatrix.from_strs(["1100", "0011"])
    rng = np.random.default_rng(5)
    counts = {}
    for _ in range(4000):
        w = random_codeword(gen, rng)
        counts[w.bits] = counts.get(w.bits, 0) + 1
    assert set(counts) == brute_span(gen.row_bits, 4)
    assert all(abs(c - 1000) < 150 for c in counts.values())


def test_random_full_rank():
    rng = np.random.default_rng(1)
    for rows, cols in itertools.product(range(1, 5), range(4, 8)):
        assert rank(random_full_rank(rows, cols, rng)) == rows
