"""
Pauli-frame simulation of EPR pairs in the Bell basis.

Each pair is summarised by two bits relative to Phi+:

    (eb, ep) = (0, 0) Phi+    (1, 0) Psi+    (0, 1) Phi-    (1, 1) Psi-

which is exact for Bell-diagonal states acted on by Bob-side Paulis and
Hadamards and measured in the Z or X basis.  Global phases are dropped.

A Bob-side Hadamard does not keep a pair Bell-diagonal: H_B Phi+ equals
H_A Phi+, not Phi+.  Using (I x M) Phi+ = (M^T x I) Phi+, a pair is held as
``H_A^h P_B Phi+`` and a Bob-side Hadamard conjugates P (swapping eb and
ep) while toggling the pending Alice-side bit h.  Undoing the Hadamard, as
every protocol here does before measuring, clears h again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .css_code import CssCodePair, SyndromePair
from .errors import DecodeFailure, DimensionError
from .f2_linalg import BitVector, mat_vec, syndrome_int

BELL_LABELS = {(0, 0): "phi+", (1, 0): "psi+", (0, 1): "phi-", (1, 1): "psi-"}
LABEL_BITS = {v: k for k, v in BELL_LABELS.items()}


@dataclass(frozen=True, slots=True)
class BellFrameState:
    n: int
    eb: BitVector
    ep: BitVector
    alice_h: BitVector | None = None

    def __post_init__(self):
        if self.alice_h is None:
            object.__setattr__(self, "alice_h", BitVector.zeros(self.n))
        if self.eb.length != self.n or self.ep.length != self.n or self.alice_h.length != self.n:
            raise DimensionError("frame vectors must have length n")

    @classmethod
    def perfect(cls, n: int) -> BellFrameState:
        return cls(n, BitVector.zeros(n), BitVector.zeros(n))

    @property
    def bell_diagonal(self) -> bool:
        """True when no pending Alice-side Hadamard remains."""
        return self.alice_h.is_zero()

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> BellFrameState:
        bits = [LABEL_BITS[s] for s in labels]
        return cls(
            len(bits),
            BitVector.from_bits(b for b, _ in bits) if bits else BitVector.zeros(0),
            BitVector.from_bits(p for _, p in bits) if bits else BitVector.zeros(0),
        )

    def label(self, i: int) -> str:
        return BELL_LABELS[(self.eb[i], self.ep[i])]

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(self.n)]

    def restrict(self, indices: Sequence[int]) -> BellFrameState:
        return BellFrameState(
            len(indices),
            self.eb.select(indices),
            self.ep.select(indices),
            self.alice_h.select(indices),
        )


@dataclass(frozen=True, slots=True)
class PauliOp:
    axis: str
    index: int

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"unknown Pauli axis {self.axis!r}")


def _check_index(state: BellFrameState, i: int) -> None:
    if not 0 <= i < state.n:
        raise IndexError(f"pair index {i} out of range for {state.n} pairs")


def apply_pauli(state: BellFrameState, op: PauliOp) -> BellFrameState:
    """Apply a Pauli to Bob's half of one pair."""
    _check_index(state, op.index)
    unit = BitVector.unit(state.n, op.index)
    eb, ep = state.eb, state.ep
    if op.axis in ("x", "y"):
        eb = eb + unit
    if op.axis in ("z", "y"):
        ep = ep + unit
    return BellFrameState(state.n, eb, ep, state.alice_h)


def apply_pauli_pattern(state: BellFrameState, bit: BitVector, phase: BitVector) -> BellFrameState:
    """Apply X on ``bit``'s support and Z on ``phase``'s support (Bob side)."""
    return BellFrameState(state.n, state.eb + bit, state.ep + phase, state.alice_h)


def apply_hadamard_bob(state: BellFrameState, index: int) -> BellFrameState:
    _check_index(state, index)
    return apply_hadamard_bob_mask(state, BitVector.unit(state.n, index))


def apply_hadamard_bob_mask(state: BellFrameState, mask: BitVector) -> BellFrameState:
    """Bob-side Hadamard on every pair in ``mask``.

    Swaps eb and ep there and toggles the pending Alice-side Hadamard.
    """
    m = mask.bits
    eb, ep = state.eb.bits, state.ep.bits
    n = state.n
    return BellFrameState(
        n,
        BitVector(n, (eb & ~m) | (ep & m)),
        BitVector(n, (ep & ~m) | (eb & m)),
        state.alice_h + mask,
    )


def apply_hadamard_alice(state: BellFrameState, index: int) -> BellFrameState:
    _check_index(state, index)
    return BellFrameState(
        state.n, state.eb, state.ep, state.alice_h + BitVector.unit(state.n, index)
    )


def check_disagree_probability(state: BellFrameState, index: int, basis: str = "z") -> float:
    """Probability that both halves, measured in ``basis``, disagree."""
    _check_index(state, index)
    if state.alice_h[index]:
        return 0.5
    if basis == "z":
        return float(state.eb[index])
    if basis == "x":
        return float(state.ep[index])
    raise ValueError(f"unknown basis {basis!r}")


def measure_check_pair(
    state: BellFrameState, index: int, rng: np.random.Generator | None = None, basis: str = "z"
) -> bool:
    """Measure both halves of one pair; True when the outcomes disagree.

    On a Bell-diagonal pair the result is deterministic (Z basis: Psi+/Psi-
    disagree; X basis: Phi-/Psi- disagree).  A pending Alice-side Hadamard
    makes it a fair coin, which needs ``rng``.
    """
    p = check_disagree_probability(state, index, basis)
    if p in (0.0, 1.0):
        return bool(p)
    if rng is None:
        raise ValueError("outcome is random for this pair; pass rng")
    return bool(rng.random() < p)


def syndrome_compare(
    state: BellFrameState, pair: CssCodePair, code_indices: Sequence[int]
) -> SyndromePair:
    """Relative syndromes Alice and Bob obtain on the selected code pairs."""
    if len(code_indices) != pair.n:
        raise DimensionError(f"{len(code_indices)} code pairs selected, code has n = {pair.n}")
    block = state.restrict(code_indices)
    if not block.bell_diagonal:
        raise ValueError("code pairs still carry a pending Hadamard")
    return SyndromePair(mat_vec(pair.h1, block.eb), mat_vec(pair.h2, block.ep))


@dataclass(frozen=True)
class PurifyResult:
    """Outcome of syndrome-guided correction on one code block.

    ``bit_class`` is the C2-coset of the residual bit error (it flips the
    key when nonzero); ``phase_class`` the C1-perp coset of the residual
    phase error.  Both are ``None`` when a syndrome could not be decoded.
    """

    success: bool
    bit_class: BitVector | None
    phase_class: BitVector | None
    bit_correction: BitVector | None = None
    phase_correction: BitVector | None = None
    undecodable: bool = False


def purify(state: BellFrameState, pair: CssCodePair, code_indices: Sequence[int]) -> PurifyResult:
    synd = syndrome_compare(state, pair, code_indices)
    block = state.restrict(code_indices)
    try:
        e_bit = pair.bit_table.decode(synd.bit_syndrome)
        e_phase = pair.phase_table.decode(synd.phase_syndrome)
    except DecodeFailure:
        return PurifyResult(False, None, None, undecodable=True)
    bit_class = pair.cosets.label(block.eb + e_bit)
    phase_class = pair.c1_perp.label(block.ep + e_phase)
    ok = bit_class.is_zero() and phase_class.is_zero()
    return PurifyResult(ok, bit_class, phase_class, e_bit, e_phase)


def purify_success_int(pair: CssCodePair, eb: int, ep: int) -> bool:
    """Integer fast path of :func:`purify` on a whole code block."""
    try:
        fb = pair.bit_table.lookup_int(syndrome_int(pair.h1.row_bits, eb))
        fp = pair.phase_table.lookup_int(syndrome_int(pair.h2.row_bits, ep))
    except DecodeFailure:
        return False
    return pair.cosets.label_int(eb ^ fb) == 0 and pair.c1_perp.label_int(ep ^ fp) == 0


# Bell-diagonal error distributions -------------------------------------------

def _pack_rows(arr: np.ndarray) -> list[int]:
    if arr.shape[1] == 0:
        return [0] * arr.shape[0]
    packed = np.packbits(arr.astype(np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(r.tobytes(), "little") for r in packed]


@dataclass(frozen=True)
class IidBellDiagonal:
    """Each pair independently Psi+ w.p. px, Psi- w.p. py, Phi- w.p. pz."""

    px: float
    py: float
    pz: float

    def __post_init__(self):
        if min(self.px, self.py, self.pz) < 0 or self.px + self.py + self.pz > 1 + 1e-12:
            raise ValueError("invalid Pauli probabilities")

    @property
    def bit_rate(self) -> float:
        return self.px + self.py

    @property
    def phase_rate(self) -> float:
        return self.pz + self.py

    def sample_ints(self, n: int, count: int, rng: np.random.Generator) -> tuple[list[int], list[int]]:
        u = rng.random((count, n))
        px, py, pz = self.px, self.py, self.pz
        is_x = u < px
        is_y = (u >= px) & (u < px + py)
        is_z = (u >= px + py) & (u < px + py + pz)
        return _pack_rows(is_x | is_y), _pack_rows(is_z | is_y)

    def sample(self, n: int, rng: np.random.Generator) -> BellFrameState:
        eb, ep = self.sample_ints(n, 1, rng)
        return BellFrameState(n, BitVector(n, eb[0]), BitVector(n, ep[0]))

    def prob_within(self, n: int, t_bit: int, t_phase: int) -> float:
        """Exact Pr[wt(eb) <= t_bit and wt(ep) <= t_phase] by dynamic programming."""
        p0 = 1.0 - self.px - self.py - self.pz
        cb, cp = t_bit + 1, t_phase + 1  # last index means "over the radius"
        dp = np.zeros((cb + 1, cp + 1))
        dp[0, 0] = 1.0
        moves = (((0, 0), p0), ((1, 0), self.px), ((1, 1), self.py), ((0, 1), self.pz))
        for _ in range(n):
            nxt = np.zeros_like(dp)
            for (db, dph), p in moves:
                if p == 0.0:
                    continue
                for b in range(cb + 1):
                    for q in range(cp + 1):
                        nxt[min(b + db, cb), min(q + dph, cp)] += p * dp[b, q]
            dp = nxt
        return float(dp[: t_bit + 1, : t_phase + 1].sum())


@dataclass(frozen=True)
class ExplicitBellDistribution:
    """Finite list of frame states with probabilities."""

    states: tuple[BellFrameState, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.states) != len(self.weights) or not self.states:
            raise ValueError("states and weights must be non-empty and aligned")
        if abs(sum(self.weights) - 1.0) > 1e-9 or min(self.weights) < 0:
            raise ValueError("weights must be a probability vector")

    def sample_ints(self, n: int, count: int, rng: np.random.Generator) -> tuple[list[int], list[int]]:
        idx = rng.choice(len(self.states), size=count, p=np.asarray(self.weights))
        return [self.states[i].eb.bits for i in idx], [self.states[i].ep.bits for i in idx]

    def sample(self, n: int, rng: np.random.Generator) -> BellFrameState:
        eb, ep = self.sample_ints(n, 1, rng)
        return BellFrameState(n, BitVector(n, eb[0]), BitVector(n, ep[0]))

    def prob_within(self, n: int, t_bit: int, t_phase: int) -> float:
        return float(
            sum(
                w
                for s, w in zip(self.states, self.weights)
                if s.eb.weight() <= t_bit and s.ep.weight() <= t_phase
            )
        )


@dataclass(frozen=True)
class MixtureBellDistribution:
    components: tuple
    weights: tuple[float, ...]

    def sample_ints(self, n: int, count: int, rng: np.random.Generator) -> tuple[list[int], list[int]]:
        which = rng.choice(len(self.components), size=count, p=np.asarray(self.weights))
        eb = [0] * count
        ep = [0] * count
        for c, comp in enumerate(self.components):
            idx = np.flatnonzero(which == c)
            if idx.size == 0:
                continue
            b, p = comp.sample_ints(n, idx.size, rng)
            for j, i in enumerate(idx):
                eb[i], ep[i] = b[j], p[j]
        return eb, ep

    def sample(self, n: int, rng: np.random.Generator) -> BellFrameState:
        eb, ep = self.sample_ints(n, 1, rng)
        return BellFrameState(n, BitVector(n, eb[0]), BitVector(n, ep[0]))

    def prob_within(self, n: int, t_bit: int, t_phase: int) -> float:
        return float(
            sum(w * c.prob_within(n, t_bit, t_phase) for c, w in zip(self.components, self.weights))
        )


def fidelity_lower_bound(
    distribution,
    pair: CssCodePair,
    *,
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """Probability that both error weights on the block are within the code's radius.

    ``distribution`` is one of the distribution classes above (evaluated
    exactly) or a zero-argument callable returning a BellFrameState, which
    is estimated from ``samples`` draws.
    """
    if hasattr(distribution, "prob_within"):
        return distribution.prob_within(pair.n, pair.t_bit, pair.t_phase)
    if callable(distribution):
        hits = 0
        for _ in range(samples):
            s = distribution()
            hits += s.eb.weight() <= pair.t_bit and s.ep.weight() <= pair.t_phase
        return hits / samples
    raise TypeError(f"unsupported distribution {type(distribution).__name__}")


def purify_success_rate(
    distribution, pair: CssCodePair, samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo success frequency of :func:`purify` on one block."""
    eb, ep = distribution.sample_ints(pair.n, samples, rng)
    cache: dict[tuple[int, int], bool] = {}
    hits = 0
    for b, p in zip(eb, ep):
        key = (b, p)
        ok = cache.get(key)
        if ok is None:
            ok = cache[key] = purify_success_int(pair, b, p)
        hits += ok
    return hits / samples
