"""Cross-checks between the Bell frame and the dense oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bell_frame import (
    BellFrameState,
    PauliOp,
    apply_hadamard_bob,
    apply_pauli,
    check_disagree_probability,
)
from .statevector import apply_gate, bell_pairs, z_marginal

LABELS = ("phi+", "psi+", "phi-", "psi-")
OPS = ("x", "y", "z", "h")


@dataclass(frozen=True)
class FrameCircuit:
    """Bell-pair labels, then Bob-side gates, then check measurements.

    ``measured`` lists (pair, basis) with basis "z" or "x".
    """

    labels: tuple[str, ...]
    gates: tuple[tuple[str, int], ...]
    measured: tuple[tuple[int, str], ...]


def random_circuit(rng: np.random.Generator, max_pairs: int = 5, max_gates: int = 12) -> FrameCircuit:
    n = int(rng.integers(1, max_pairs + 1))
    labels = tuple(LABELS[int(i)] for i in rng.integers(0, 4, size=n))
    gates = tuple(
        (OPS[int(rng.integers(0, 4))], int(rng.integers(0, n))) for _ in range(int(rng.integers(0, max_gates + 1)))
    )
    count = int(rng.integers(1, n + 1))
    pairs = sorted(int(i) for i in rng.choice(n, size=count, replace=False))
    measured = tuple((i, "zx"[int(rng.integers(0, 2))]) for i in pairs)
    return FrameCircuit(labels, gates, measured)


def frame_distribution(c: FrameCircuit) -> np.ndarray:
    """Probability of each disagreement pattern (bit j = j-th measured pair)."""
    state = BellFrameState.from_labels(c.labels)
    for op, i in c.gates:
        state = apply_hadamard_bob(state, i) if op == "h" else apply_pauli(state, PauliOp(op, i))
    probs = np.ones(1)
    for i, basis in c.measured:
        p = check_disagree_probability(state, i, basis)
        probs = np.concatenate([probs * (1 - p), probs * p])
    return probs


def oracle_distribution(c: FrameCircuit) -> np.ndarray:
    n = len(c.labels)
    state = bell_pairs(list(c.labels))
    for op, i in c.gates:
        state = apply_gate(state, op.upper(), n + i)
    qubits = []
    for i, basis in c.measured:
        if basis == "x":
            state = apply_gate(apply_gate(state, "H", i), "H", n + i)
        qubits += [i, n + i]
    joint = z_marginal(state, qubits)
    m = len(c.measured)
    out = np.zeros(1 << m)
    for outcome in range(joint.size):
        pattern = 0
        for j in range(m):
            pattern |= (((outcome >> (2 * j)) ^ (outcome >> (2 * j + 1))) & 1) << j
        out[pattern] += joint[outcome]
    return out


def frame_oracle_difference(c: FrameCircuit) -> float:
    return float(np.abs(frame_distribution(c) - oracle_distribution(c)).max())


def frame_oracle_agreement(circuits: int, seed: int = 0, tol: float = 1e-12) -> tuple[bool, float]:
    """Worst difference seen over ``circuits`` random circuits."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(circuits):
        worst = max(worst, frame_oracle_difference(random_circuit(rng)))
    return worst <= tol, worst


def all_single_gate_circuits(n: int = 1):
    """Every one-gate circuit on ``n`` pairs with every label and basis choice."""
    for labels in product(LABELS, repeat=n):
        for op, i in product(OPS, range(n)):
            for bases in product("zx", repeat=n):
                yield FrameCircuit(labels, ((op, i),), tuple(enumerate(bases)))
