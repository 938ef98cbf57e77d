"""
Eavesdropper models acting on qubits in transit.

Attacks never see which positions will later be announced as check or
code positions; they act on the transmitted register position by
position (i.i.d. kinds) or by a pattern fixed in advance.

Pauli kinds work on both state representations: on EPR halves in the
Bell frame and on BB84 product states, where X flips Z-basis bits, Z
flips X-basis bits and Y flips both.  Intercept-resend is defined only on
BB84 product states, and ``unitary`` only in the dense oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bell_frame import BellFrameState, apply_pauli_pattern
from .errors import DimensionError, UnsupportedAttack
from .f2_linalg import BitVector

KINDS = ("none", "iid_pauli", "intercept_resend", "fixed_pattern", "unitary")


@dataclass(frozen=True)
class AttackModel:
    kind: str = "none"
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0
    fraction: float = 0.0
    bit_err: BitVector | None = None
    phase_err: BitVector | None = None
    gate: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if min(self.px, self.py, self.pz) < 0 or self.px + self.py + self.pz > 1 + 1e-12:
            raise ValueError("need px, py, pz >= 0 and px + py + pz <= 1")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("intercept fraction must lie in [0, 1]")
        if self.kind == "fixed_pattern":
            if self.bit_err is None or self.phase_err is None:
                raise ValueError("fixed_pattern needs bit_err and phase_err")
            if self.bit_err.length != self.phase_err.length:
                raise DimensionError("bit and phase patterns differ in length")
        if self.kind == "unitary":
            g = np.asarray(self.gate, dtype=complex)
            w = int(round(math.log2(g.shape[0])))
            if g.shape != (1 << w, 1 << w) or not np.allclose(g.conj().T @ g, np.eye(1 << w), atol=1e-10):
                raise ValueError("unitary attack needs a square unitary on whole qubits")

    @classmethod
    def none(cls) -> AttackModel:
        return cls("none")

    @classmethod
    def iid_pauli(cls, px: float, py: float, pz: float) -> AttackModel:
        return cls("iid_pauli", px=px, py=py, pz=pz)

    @classmethod
    def intercept_resend(cls, fraction: float = 1.0) -> AttackModel:
        return cls("intercept_resend", fraction=fraction)

    @classmethod
    def fixed_pattern(cls, bit_err: BitVector, phase_err: BitVector) -> AttackModel:
        return cls("fixed_pattern", bit_err=bit_err, phase_err=phase_err)

    @classmethod
    def unitary(cls, gate: np.ndarray) -> AttackModel:
        """Apply ``gate`` to consecutive disjoint blocks of the transmitted qubits."""
        return cls("unitary", gate=np.asarray(gate, dtype=complex))

    @property
    def is_pauli(self) -> bool:
        return self.kind in ("none", "iid_pauli", "fixed_pattern")

    @property
    def gate_width(self) -> int:
        return int(round(math.log2(np.asarray(self.gate).shape[0])))

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "iid_pauli":
            out.update(px=self.px, py=self.py, pz=self.pz)
        elif self.kind == "intercept_resend":
            out["fraction"] = self.fraction
        elif self.kind == "fixed_pattern":
            out.update(bit_err=str(self.bit_err), phase_err=str(self.phase_err))
        elif self.kind == "unitary":
            out["gate_width"] = self.gate_width
        return out


@dataclass(frozen=True)
class EveRecord:
    """What Eve did to (and learned from) one transmission.

    Pauli attacks fill ``pauli_bit``/``pauli_phase``; intercept-resend
    fills the per-position arrays.
    """

    pauli_bit: BitVector | None = None
    pauli_phase: BitVector | None = None
    intercepted: np.ndarray | None = None
    eve_basis: np.ndarray | None = None
    eve_bit: np.ndarray | None = None

    def subset(self, positions: Sequence[int]) -> EveRecord:
        pos = list(positions)
        if self.intercepted is not None:
            return EveRecord(
                intercepted=self.intercepted[pos],
                eve_basis=self.eve_basis[pos],
                eve_bit=self.eve_bit[pos],
            )
        if self.pauli_bit is not None:
            return EveRecord(self.pauli_bit.select(pos), self.pauli_phase.select(pos))
        return EveRecord()

    def summary(self) -> dict:
        if self.intercepted is not None:
            return {"intercepted": int(self.intercepted.sum())}
        if self.pauli_bit is not None:
            both = self.pauli_bit & self.pauli_phase
            return {
                "x": self.pauli_bit.weight() - both.weight(),
                "y": both.weight(),
                "z": self.pauli_phase.weight() - both.weight(),
            }
        return {}


def iid_pauli_masks(
    px: float, py: float, pz: float, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Per-position (X-component, Z-component) indicators of an i.i.d. Pauli channel."""
    u = rng.random(n)
    x = u < px
    y = (u >= px) & (u < px + py)
    z = (u >= px + py) & (u < px + py + pz)
    return (x | y).astype(np.uint8), (z | y).astype(np.uint8)


def sample_pauli_pattern(
    model: AttackModel, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """X and Z components of the Pauli the model applies to ``n`` transmitted qubits."""
    if model.kind == "none":
        return np.zeros(n, np.uint8), np.zeros(n, np.uint8)
    if model.kind == "iid_pauli":
        return iid_pauli_masks(model.px, model.py, model.pz, n, rng)
    if model.kind == "fixed_pattern":
        m = model.bit_err.length
        if m > n:
            raise DimensionError(f"pattern of length {m} on a register of {n} qubits")
        b = np.zeros(n, np.uint8)
        p = np.zeros(n, np.uint8)
        b[:m] = model.bit_err.to_array()
        p[:m] = model.phase_err.to_array()
        return b, p
    raise UnsupportedAttack(f"{model.kind} is not a Pauli attack")


def attack_bell_frame(
    model: AttackModel, state: BellFrameState, rng: np.random.Generator
) -> tuple[BellFrameState, EveRecord]:
    """Apply the attack to Bob's halves of every pair."""
    if not model.is_pauli:
        raise UnsupportedAttack(f"{model.kind} cannot act on EPR halves in the Bell frame")
    b, p = sample_pauli_pattern(model, state.n, rng)
    bit, phase = BitVector.from_array(b), BitVector.from_array(p)
    if model.kind == "none":
        return state, EveRecord()
    return apply_pauli_pattern(state, bit, phase), EveRecord(bit, phase)


def attack_qubit_stream(
    model: AttackModel, bases: np.ndarray, bits: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, EveRecord]:
    """Attack BB84 product states ``(basis, bit)``; basis 0 is Z, 1 is X.

    Returns the bases and bits of the states Bob receives.
    """
    bases = np.asarray(bases, dtype=np.uint8)
    bits = np.asarray(bits, dtype=np.uint8)
    n = bases.size
    if bits.size != n:
        raise DimensionError("bases and bits differ in length")
    if model.kind == "none":
        return bases.copy(), bits.copy(), EveRecord()
    if model.is_pauli:
        xb, zb = sample_pauli_pattern(model, n, rng)
        flip = np.where(bases == 0, xb, zb)
        return bases.copy(), bits ^ flip, EveRecord(BitVector.from_array(xb), BitVector.from_array(zb))
    if model.kind == "intercept_resend":
        hit = rng.random(n) < model.fraction
        eve_basis = rng.integers(0, 2, size=n, dtype=np.uint8)
        coin = rng.integers(0, 2, size=n, dtype=np.uint8)
        eve_bit = np.where(eve_basis == bases, bits, coin).astype(np.uint8)
        out_bases = np.where(hit, eve_basis, bases).astype(np.uint8)
        out_bits = np.where(hit, eve_bit, bits).astype(np.uint8)
        return out_bases, out_bits, EveRecord(
            intercepted=hit,
            eve_basis=np.where(hit, eve_basis, 0).astype(np.uint8),
            eve_bit=np.where(hit, eve_bit, 0).astype(np.uint8),
        )
    raise UnsupportedAttack(f"{model.kind} cannot act on a BB84 qubit stream")


@dataclass(frozen=True)
class InfoEstimate:
    bits_per_bit: float
    samples: int
    low_confidence: bool


def _entropy(counts: np.ndarray) -> float:
    c = counts[counts > 0].astype(float)
    p = c / c.sum()
    return float(-(p * np.log2(p)).sum())


def eve_information_estimate(
    records: Sequence[EveRecord],
    alice_bits: Sequence[np.ndarray],
    alice_bases: Sequence[np.ndarray],
    *,
    min_samples: int = 1000,
) -> InfoEstimate:
    """Plug-in mutual information between Eve's data and Alice's sifted bits.

    Eve's observation at a position is (intercepted, her basis, her bit)
    together with Alice's publicly announced basis.  ``records`` must
    already be restricted to the sifted positions, aligned with the bit and
    basis arrays.
    """
    e_sym = []
    a_sym = []
    for rec, bits, bases in zip(records, alice_bits, alice_bases):
        bits = np.asarray(bits, dtype=np.int64)
        bases = np.asarray(bases, dtype=np.int64)
        if rec.intercepted is None:
            sym = bases * 8
        else:
            hit = rec.intercepted.astype(np.int64)
            sym = bases * 8 + hit * (1 + rec.eve_basis.astype(np.int64) * 2 + rec.eve_bit.astype(np.int64))
        e_sym.append(sym)
        a_sym.append(bits)
    if not e_sym:
        return InfoEstimate(0.0, 0, True)
    e = np.concatenate(e_sym)
    a = np.concatenate(a_sym)
    total = e.size
    if total == 0:
        return InfoEstimate(0.0, 0, True)
    joint = np.bincount(e * 2 + a, minlength=32)
    mi = _entropy(np.bincount(a, minlength=2)) + _entropy(np.bincount(e, minlength=16)) - _entropy(joint)
    return InfoEstimate(max(mi, 0.0), int(total), total < min_samples)


def coherent_pair_gate(theta: float, phi: float) -> np.ndarray:
    """Two-qubit entangling probe: exp(-i theta X(x)X) after Ry(phi) on each qubit."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    xx = np.kron(x, x)
    ent = math.cos(theta) * np.eye(4) - 1j * math.sin(theta) * xx
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return ent @ np.kron(ry, ry)


def unitary_attack_blocks(model: AttackModel, qubits: Sequence[int]) -> list[tuple[int, ...]]:
    """Disjoint consecutive blocks of ``qubits`` the gate is tiled over."""
    w = model.gate_width
    qs = list(qubits)
    return [tuple(qs[i : i + w]) for i in range(0, len(qs) - w + 1, w)]
