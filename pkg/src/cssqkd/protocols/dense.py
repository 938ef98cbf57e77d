"""Dense-amplitude runs of Protocols 1 and 2.

Used for attacks outside the Pauli class.  Every measurement is sampled
from the exact state, so these runs make no use of the frame shortcuts.
"""

from __future__ import annotations

import numpy as np

from ..adversary import AttackModel, EveRecord, sample_pauli_pattern, unitary_attack_blocks
from ..css_code import correct_to_codeword
from ..errors import DecodeFailure, SizeLimitError, UnsupportedAttack
from ..f2_linalg import BitVector, row_space, solve
from ..rng import trial_streams
from ..statevector import DenseState, apply_gate, apply_unitary, bell_pairs, measure_observable, measure_z
from .config import ProtocolConfig, ProtocolTranscript, choose_subset, complement, random_bits


def _attack(model: AttackModel, state: DenseState, slots: list[int], rng: np.random.Generator):
    """Apply the attack to the qubits in transmission order ``slots``."""
    if model.kind == "unitary":
        for block in unitary_attack_blocks(model, slots):
            state = apply_unitary(state, model.gate, block)
        return state, EveRecord()
    if not model.is_pauli:
        raise UnsupportedAttack(f"{model.kind} is not available in the dense runs")
    xb, zb = sample_pauli_pattern(model, len(slots), rng)
    for j, q in enumerate(slots):
        if xb[j]:
            state = apply_gate(state, "X", q)
        if zb[j]:
            state = apply_gate(state, "Z", q)
    if model.kind == "none":
        return state, EveRecord()
    return state, EveRecord(BitVector.from_array(xb), BitVector.from_array(zb))


def _bits(outcome: int, count: int) -> np.ndarray:
    return np.array([(outcome >> j) & 1 for j in range(count)], dtype=np.uint8)


def _support(qubits) -> int:
    s = 0
    for q in qubits:
        s |= 1 << int(q)
    return s


def run_protocol1_dense(config: ProtocolConfig, trial: int = 0, overrides: dict | None = None) -> ProtocolTranscript:
    ov = overrides or {}
    rng, chan = trial_streams(config.seed, trial)
    pair = config.pair
    nc, total = config.check_count, config.working_count
    tau = config.abort_threshold
    if 2 * total > config.qubit_cap:
        raise SizeLimitError(f"Protocol 1 needs {2 * total} qubits, cap is {config.qubit_cap}")

    # Alice holds qubit i of pair i, Bob qubit total + i
    state = bell_pairs(["phi+"] * total, cap=config.qubit_cap)
    b = random_bits(rng, total)
    if "b" in ov:
        b = np.asarray(ov["b"], dtype=np.uint8)
    for i in np.flatnonzero(b):
        state = apply_gate(state, "H", total + int(i))

    order = rng.permutation(total) if config.scramble else np.arange(total)
    state, eve = _attack(config.attack, state, [total + int(i) for i in order], chan)

    checks = choose_subset(rng, total, nc)
    if "check_positions" in ov:
        checks = np.asarray(ov["check_positions"], dtype=np.int64)
    code = complement(total, checks)
    for i in np.flatnonzero(b):
        state = apply_gate(state, "H", total + int(i))

    outcome, state = measure_z(state, [int(i) for i in checks] + [total + int(i) for i in checks], rng)
    bits = _bits(outcome, 2 * nc)
    alice_check, bob_check = bits[:nc], bits[nc:]
    errors = int((alice_check ^ bob_check).sum())
    ann = {"b": b, "check_positions": checks, "alice_check": alice_check, "bob_check": bob_check}
    if config.scramble:
        ann["permutation"] = order
    common = dict(protocol=1, trial=trial, n_check=nc, threshold=tau, announcements=ann, eve=eve)
    if errors > tau:
        return ProtocolTranscript(
            aborted=True, abort_reason="check", alice_key=None, bob_key=None, check_errors=errors, **common
        )

    # X-type stabilizers first, then Z on every code qubit (which fixes the Z-type syndromes)
    alice_q = [int(i) for i in code]
    bob_q = [total + int(i) for i in code]
    phase_a = []
    phase_b = []
    for row in pair.h2.row_vectors():
        sa, state = measure_observable(state, "x", _support(alice_q[j] for j in row.support()), rng)
        sb, state = measure_observable(state, "x", _support(bob_q[j] for j in row.support()), rng)
        phase_a.append(int(sa < 0))
        phase_b.append(int(sb < 0))
    out_a, state = measure_z(state, alice_q, rng)
    out_b, state = measure_z(state, bob_q, rng)
    a = BitVector(pair.n, out_a)
    bz = BitVector(pair.n, out_b)
    s_a, s_b = pair.h1.mat_vec(a), pair.h1.mat_vec(bz)
    phase_diff = BitVector.from_bits(phase_a) + BitVector.from_bits(phase_b)
    ann.update(
        alice_bit_syndrome=s_a, bob_bit_syndrome=s_b,
        alice_phase_syndrome=BitVector.from_bits(phase_a), bob_phase_syndrome=BitVector.from_bits(phase_b),
    )
    stats = {"bit_syndrome_weight": (s_a + s_b).weight(), "phase_syndrome_weight": phase_diff.weight()}
    try:
        pair.phase_table.decode(phase_diff)
        stats["phase_decoded"] = True
    except DecodeFailure:
        stats["phase_decoded"] = False
    try:
        fix = pair.bit_table.decode(s_a + s_b)
    except DecodeFailure:
        stats["decoded"] = False
        return ProtocolTranscript(
            aborted=True, abort_reason="decode", alice_key=None, bob_key=None,
            check_errors=errors, stats=stats, **common,
        )
    stats["decoded"] = True
    x_rep = solve(pair.h1, s_a)
    return ProtocolTranscript(
        aborted=False, abort_reason=None,
        alice_key=pair.coset_label(a + x_rep), bob_key=pair.coset_label(bz + fix + x_rep),
        check_errors=errors, stats=stats, **common,
    )


def run_protocol2_dense(config: ProtocolConfig, trial: int = 0, overrides: dict | None = None) -> ProtocolTranscript:
    ov = overrides or {}
    rng, chan = trial_streams(config.seed, trial)
    pair = config.pair
    nc, total = config.check_count, config.working_count
    tau = config.abort_threshold
    if total > config.qubit_cap:
        raise SizeLimitError(f"Protocol 2 needs {total} qubits, cap is {config.qubit_cap}")

    check_bits = random_bits(rng, nc)
    key = BitVector.from_array(random_bits(rng, pair.k))
    b = random_bits(rng, total)
    if "b" in ov:
        b = np.asarray(ov["b"], dtype=np.uint8)
    x = BitVector.from_array(random_bits(rng, pair.n))
    z = BitVector.from_array(random_bits(rng, pair.n))
    v = pair.key_representative(key)
    checks = choose_subset(rng, total, nc)
    if "check_positions" in ov:
        checks = np.asarray(ov["check_positions"], dtype=np.int64)
    code = complement(total, checks)

    # |c> on the check qubits times Q_{x,z}|v> on the code qubits
    base = 0
    for j, i in enumerate(checks):
        base |= int(check_bits[j]) << int(i)
    amps = np.zeros(1 << total, dtype=complex)
    words = row_space(pair.c2_gen)
    amp = 1 / np.sqrt(len(words))
    for w in words:
        word = x + v + w
        idx = base
        for j in word.support():
            idx |= 1 << int(code[j])
        amps[idx] += -amp if z.dot(w) else amp
    state = DenseState(amps, cap=config.qubit_cap)
    for i in np.flatnonzero(b):
        state = apply_gate(state, "H", int(i))

    order = rng.permutation(total) if config.scramble else np.arange(total)
    state, eve = _attack(config.attack, state, [int(i) for i in order], chan)

    ann = {"b": b, "check_positions": checks, "alice_check": check_bits, "x": x}
    if config.announce_z:
        ann["z"] = z
    if config.scramble:
        ann["permutation"] = order
    for i in np.flatnonzero(b):
        state = apply_gate(state, "H", int(i))

    out_c, state = measure_z(state, [int(i) for i in checks], rng)
    bob_check = _bits(out_c, nc)
    errors = int((bob_check ^ check_bits).sum())
    ann["bob_check"] = bob_check
    common = dict(protocol=2, trial=trial, n_check=nc, threshold=tau, announcements=ann, eve=eve)
    if errors > tau:
        return ProtocolTranscript(
            aborted=True, abort_reason="check", alice_key=None, bob_key=None, check_errors=errors, **common
        )
    out_y, state = measure_z(state, [int(i) for i in code], rng)
    y = BitVector(pair.n, out_y)
    stats = {}
    try:
        corrected = correct_to_codeword(pair, y + x)
    except DecodeFailure:
        stats["decoded"] = False
        return ProtocolTranscript(
            aborted=True, abort_reason="decode", alice_key=None, bob_key=None,
            check_errors=errors, stats=stats, **common,
        )
    stats["decoded"] = True
    return ProtocolTranscript(
        aborted=False, abort_reason=None, alice_key=key, bob_key=pair.coset_label(corrected),
        check_errors=errors, stats=stats, **common,
    )
