"""
Dense statevector oracle for small registers.

Basis index ``i`` has qubit ``q`` equal to bit ``q`` of ``i``, so a
:class:`BitVector` payload is directly the index of its computational
basis state.  Everything here is brute force and meant as ground truth
for the frame simulator and the code constructions, not for speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .css_code import CssCodePair
from .errors import DimensionError, MembershipError, SizeLimitError
from .f2_linalg import BitVector, row_space

DEFAULT_QUBIT_CAP = 12

_S = 1 / math.sqrt(2)
GATES = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# targets (control, target); index = control + 2 * target
CNOT = np.eye(4, dtype=complex)[[0, 3, 2, 1]]


class DenseState:
    """Normalised amplitude vector over ``qubit_count`` qubits."""

    __slots__ = ("qubit_count", "amplitudes")

    def __init__(self, amplitudes, *, cap: int = DEFAULT_QUBIT_CAP, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(math.log2(amps.size))) if amps.size else -1
        if n < 0 or 1 << n != amps.size:
            raise DimensionError(f"amplitude count {amps.size} is not a power of two")
        if n > cap:
            raise SizeLimitError(f"{n} qubits exceeds the cap of {cap}")
        norm = np.linalg.norm(amps)
        if normalize:
            amps = amps / norm
        elif abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm} differs from 1")
        self.qubit_count = n
        self.amplitudes = amps

    @classmethod
    def basis(cls, n: int, index: int | BitVector = 0, **kw) -> DenseState:
        if isinstance(index, BitVector):
            if index.length != n:
                raise DimensionError("basis label length mismatch")
            index = index.bits
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps, **kw)

    @classmethod
    def from_ket(cls, ket: str, **kw) -> DenseState:
        """``from_ket("01")`` is qubit 0 in |0>, qubit 1 in |1>."""
        return cls.basis(len(ket), BitVector.from_str(ket), **kw)

    def tensor(self, other: DenseState, *, cap: int = DEFAULT_QUBIT_CAP) -> DenseState:
        """``self`` on the low qubits, ``other`` on the high ones."""
        return DenseState(np.kron(other.amplitudes, self.amplitudes), cap=cap)

    def inner(self, other: DenseState) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _new(self, amps: np.ndarray) -> DenseState:
        out = object.__new__(DenseState)
        out.qubit_count = self.qubit_count
        out.amplitudes = amps
        return out


BELL_STATES = {
    "phi+": (DenseState.from_ket("00").amplitudes + DenseState.from_ket("11").amplitudes) * _S,
    "phi-": (DenseState.from_ket("00").amplitudes - DenseState.from_ket("11").amplitudes) * _S,
    "psi+": (DenseState.from_ket("01").amplitudes + DenseState.from_ket("10").amplitudes) * _S,
    "psi-": (DenseState.from_ket("01").amplitudes - DenseState.from_ket("10").amplitudes) * _S,
}


def bell_state(label: str) -> DenseState:
    return DenseState(BELL_STATES[label])


def bell_pairs(labels: Sequence[str], *, cap: int = DEFAULT_QUBIT_CAP) -> DenseState:
    """Pairs ``(i, i + n)``: Alice holds qubits 0..n-1 and Bob n..2n-1."""
    n = len(labels)
    if 2 * n > cap:
        raise SizeLimitError(f"{2 * n} qubits exceeds the cap of {cap}")
    amps = np.zeros(1 << (2 * n), dtype=complex)
    # expand the product over pairs; each pair lives on bits (i, i + n)
    terms = [(0, 1.0 + 0j)]
    for i, lab in enumerate(labels):
        vec = BELL_STATES[lab]
        nxt = []
        for idx, a in terms:
            for local in range(4):
                c = vec[local]
                if c == 0:
                    continue
                bit_a, bit_b = local & 1, local >> 1
                nxt.append((idx | (bit_a << i) | (bit_b << (i + n)), a * c))
        terms = nxt
    for idx, a in terms:
        amps[idx] += a
    return DenseState(amps, cap=cap)


# gates -----------------------------------------------------------------------

def apply_unitary(state: DenseState, u: np.ndarray, targets: Sequence[int]) -> DenseState:
    """Apply ``u`` to ``targets``; ``targets[j]`` is bit j of u's index."""
    n = state.qubit_count
    k = len(targets)
    if len(set(targets)) != k or any(not 0 <= t < n for t in targets):
        raise IndexError(f"bad targets {targets} for {n} qubits")
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << k, 1 << k):
        raise DimensionError(f"unitary shape {u.shape} does not act on {k} qubits")
    psi = state.amplitudes.reshape([2] * n)
    axes = [n - 1 - t for t in reversed(targets)]
    res = np.tensordot(u.reshape([2] * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    res = np.moveaxis(res, list(range(k)), axes)
    return state._new(np.ascontiguousarray(res).reshape(-1))


def apply_gate(state: DenseState, gate: str, targets: int | Sequence[int]) -> DenseState:
    """Apply H, X, Y, Z (one target) or CNOT (targets = control, target)."""
    if isinstance(targets, int):
        targets = (targets,)
    gate = gate.upper()
    if gate in ("CNOT", "CX"):
        if len(targets) != 2:
            raise ValueError("CNOT needs (control, target)")
        return apply_unitary(state, CNOT, targets)
    if gate not in GATES or len(targets) != 1:
        raise ValueError(f"unsupported gate {gate} on {targets}")
    return apply_unitary(state, GATES[gate], targets)


# Pauli strings ---------------------------------------------------------------

def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _parity_mask(n: int, s: int) -> np.ndarray:
    return (np.bitwise_count(_indices(n) & s) & 1).astype(bool)


def pauli_string_apply(state: DenseState, axis: str, support: BitVector | int) -> np.ndarray:
    """Unnormalised vector ``sigma_axis^[s] |psi>``."""
    n = state.qubit_count
    s = support.bits if isinstance(support, BitVector) else int(support)
    if isinstance(support, BitVector) and support.length != n:
        raise DimensionError("support length must equal the qubit count")
    amps = state.amplitudes
    idx = _indices(n)
    if axis == "z":
        return np.where(_parity_mask(n, s), -amps, amps)
    if axis == "x":
        return amps[idx ^ s]
    if axis == "y":
        # Y = i X Z on each qubit of the support
        zpsi = np.where(_parity_mask(n, s), -amps, amps)
        return (1j) ** (s.bit_count()) * zpsi[idx ^ s]
    raise ValueError(f"unknown axis {axis!r}")


def expectation(state: DenseState, axis: str, support: BitVector | int) -> float:
    return float(np.vdot(state.amplitudes, pauli_string_apply(state, axis, support)).real)


def observable_project(
    state: DenseState, axis: str, support: BitVector | int, eigenvalue: int
) -> tuple[float, DenseState | None]:
    """Probability of ``eigenvalue`` and the renormalised post-state."""
    p_psi = pauli_string_apply(state, axis, support)
    proj = 0.5 * (state.amplitudes + eigenvalue * p_psi)
    prob = float(np.vdot(proj, proj).real)
    if prob < 1e-15:
        return 0.0, None
    return prob, state._new(proj / math.sqrt(prob))


def measure_observable(
    state: DenseState, axis: str, support: BitVector | int, rng: np.random.Generator
) -> tuple[int, DenseState]:
    """Projective measurement of a Pauli string; returns (+1 or -1, post-state)."""
    p_plus, post_plus = observable_project(state, axis, support, +1)
    if rng.random() < p_plus:
        return +1, post_plus
    _, post_minus = observable_project(state, axis, support, -1)
    if post_minus is None:
        return +1, post_plus
    return -1, post_minus


def z_marginal(state: DenseState, qubits: Sequence[int]) -> np.ndarray:
    """Exact distribution of Z outcomes on ``qubits`` (outcome j has bit i = qubit i)."""
    idx = _indices(state.qubit_count)
    key = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << j
    return np.bincount(key, weights=state.probabilities(), minlength=1 << len(qubits))


def measure_z(
    state: DenseState, qubits: Sequence[int], rng: np.random.Generator
) -> tuple[int, DenseState]:
    """Z-measure ``qubits``; outcome bit j belongs to ``qubits[j]``."""
    probs = z_marginal(state, qubits)
    outcome = int(rng.choice(probs.size, p=probs / probs.sum()))
    idx = _indices(state.qubit_count)
    keep = np.ones(idx.size, dtype=bool)
    for j, q in enumerate(qubits):
        keep &= ((idx >> q) & 1) == ((outcome >> j) & 1)
    amps = np.where(keep, state.amplitudes, 0)
    return outcome, state._new(amps / math.sqrt(probs[outcome]))


# Bell measurement ------------------------------------------------------------

_BELL_FROM_BITS = {(0, 0): "phi+", (1, 0): "phi-", (0, 1): "psi+", (1, 1): "psi-"}


def _to_bell_frame(state: DenseState, q1: int, q2: int) -> DenseState:
    return apply_gate(apply_gate(state, "CNOT", (q1, q2)), "H", q1)


def bell_probabilities(state: DenseState, q1: int, q2: int) -> dict[str, float]:
    if q1 == q2:
        raise IndexError("Bell measurement needs two distinct qubits")
    probs = z_marginal(_to_bell_frame(state, q1, q2), (q1, q2))
    return {_BELL_FROM_BITS[(j & 1, j >> 1)]: float(probs[j]) for j in range(4)}


def bell_measure(
    state: DenseState, q1: int, q2: int, rng: np.random.Generator
) -> tuple[str, DenseState]:
    if q1 == q2:
        raise IndexError("Bell measurement needs two distinct qubits")
    rotated = _to_bell_frame(state, q1, q2)
    outcome, post = measure_z(rotated, (q1, q2), rng)
    post = apply_gate(apply_gate(post, "H", q1), "CNOT", (q1, q2))
    return _BELL_FROM_BITS[(outcome & 1, outcome >> 1)], post


# CSS codewords -----------------------------------------------------------------

def build_css_codeword(
    pair: CssCodePair,
    v: BitVector,
    x: BitVector | None = None,
    z: BitVector | None = None,
    *,
    cap: int = DEFAULT_QUBIT_CAP,
) -> DenseState:
    """The Q_{x,z} basis state for coset v + C2 as a dense vector."""
    n = pair.n
    if n > cap:
        raise SizeLimitError(f"{n} qubits exceeds the cap of {cap}")
    x = BitVector.zeros(n) if x is None else x
    z = BitVector.zeros(n) if z is None else z
    if not pair.in_c1(v):
        raise MembershipError(f"{v} is not in C1")
    words = row_space(pair.c2_gen)
    amps = np.zeros(1 << n, dtype=complex)
    a = 1 / math.sqrt(len(words))
    for w in words:
        amps[(x + v + w).bits] += -a if z.dot(w) else a
    return DenseState(amps, cap=cap)


def code_basis(pair: CssCodePair, x=None, z=None, *, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Columns are the 2^k orthonormal codewords of Q_{x,z}."""
    cols = []
    for lab in range(1 << pair.k):
        v = pair.key_representative(BitVector(pair.k, lab))
        cols.append(build_css_codeword(pair, v, x, z, cap=cap).amplitudes)
    return np.stack(cols, axis=1)


def hadamard_all(amps: np.ndarray, n: int) -> np.ndarray:
    """H on every qubit of each column of ``amps`` (fast Walsh-Hadamard)."""
    out = np.array(amps, dtype=complex).reshape((2,) * n + (-1,))
    for ax in range(n):
        a = np.take(out, 0, axis=ax)
        b = np.take(out, 1, axis=ax)
        out = np.stack(((a + b) * _S, (a - b) * _S), axis=ax)
    return out.reshape(1 << n, -1)


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral-norm distance between projectors onto the column spans.

    Both inputs must have orthonormal columns.
    """
    if a.shape[1] != b.shape[1]:
        return 1.0
    # forming the projectors avoids the sqrt(1 - cos^2) cancellation
    diff = a @ a.conj().T - b @ b.conj().T
    return float(np.linalg.norm(diff, 2))


@dataclass(frozen=True)
class OracleReport:
    ok: bool
    distance: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_hadamard_duality(
    pair: CssCodePair, dual: CssCodePair | None = None, *, tol: float = 1e-10,
    cap: int = DEFAULT_QUBIT_CAP,
) -> OracleReport:
    """Check that H on every qubit maps span(Q) onto span(Q*).

    Only subspace equality is tested; individual codewords need not map to
    codewords.
    """
    dual = pair.dual() if dual is None else dual
    mapped = hadamard_all(code_basis(pair, cap=cap), pair.n)
    target = code_basis(dual, cap=cap)
    d = subspace_distance(mapped, target)
    return OracleReport(d <= tol, d, f"projector distance {d:.3e}")


def bell_projector_identities() -> tuple[float, float]:
    """Entrywise residuals of the two check-bit projector identities.

    Psi+ Psi+^dag + Psi- Psi-^dag = |01><01| + |10><10|
    Phi- Phi-^dag + Psi- Psi-^dag = |+-><+-| + |-+><-+|
    """
    def proj(v):
        return np.outer(v, np.conj(v))

    def ket(s):
        return DenseState.from_ket(s).amplitudes

    plus = np.array([1, 1], dtype=complex) * _S
    minus = np.array([1, -1], dtype=complex) * _S

    def pair_ket(first, second):
        return np.kron(second, first)  # qubit 0 is the low bit

    lhs1 = proj(BELL_STATES["psi+"]) + proj(BELL_STATES["psi-"])
    rhs1 = proj(ket("01")) + proj(ket("10"))
    lhs2 = proj(BELL_STATES["phi-"]) + proj(BELL_STATES["psi-"])
    rhs2 = proj(pair_ket(plus, minus)) + proj(pair_ket(minus, plus))
    return float(np.abs(lhs1 - rhs1).max()), float(np.abs(lhs2 - rhs2).max())
