"""Protocol 1: EPR pairs, random Hadamards, check pairs, then purification."""

from __future__ import annotations

import numpy as np

from ..adversary import attack_bell_frame
from ..bell_frame import (
    BellFrameState,
    apply_hadamard_bob_mask,
    measure_check_pair,
    purify,
    syndrome_compare,
)
from ..errors import DecodeFailure
from ..f2_linalg import BitVector, solve
from ..rng import trial_streams
from .config import ProtocolConfig, ProtocolTranscript, choose_subset, complement, random_bits


def run_protocol1(config: ProtocolConfig, trial: int = 0, overrides: dict | None = None) -> ProtocolTranscript:
    """One trial in the Bell frame, or in the dense oracle for non-Pauli attacks.

    ``overrides`` may pin ``b`` (length n_check + n) and ``check_positions``.
    """
    if config.uses_dense():
        from .dense import run_protocol1_dense

        return run_protocol1_dense(config, trial, overrides)
    ov = overrides or {}
    rng, chan = trial_streams(config.seed, trial)
    pair = config.pair
    nc, total = config.check_count, config.working_count
    tau = config.abort_threshold

    # steps 1-2: perfect pairs, Hadamard on Bob's half where b is set
    b = random_bits(rng, total)
    if "b" in ov:
        b = np.asarray(ov["b"], dtype=np.uint8)
    b_mask = BitVector.from_array(b)
    state = apply_hadamard_bob_mask(BellFrameState.perfect(total), b_mask)

    # step 3: Bob's halves travel, optionally in permuted order
    order = rng.permutation(total) if config.scramble else None
    sent = state if order is None else state.restrict(order)
    sent, eve = attack_bell_frame(config.attack, sent, chan)
    state = sent if order is None else sent.restrict(np.argsort(order))

    # steps 4-6: checks chosen, b announced, Bob undoes the Hadamards
    checks = choose_subset(rng, total, nc)
    if "check_positions" in ov:
        checks = np.asarray(ov["check_positions"], dtype=np.int64)
    code = complement(total, checks)
    state = apply_hadamard_bob_mask(state, b_mask)

    # steps 7-8: Z-measure both halves of every check pair
    alice_check = random_bits(rng, nc)
    disagree = np.array([measure_check_pair(state, int(i), rng) for i in checks], dtype=np.uint8)
    bob_check = alice_check ^ disagree
    errors = int(disagree.sum())
    ann = {"b": b, "check_positions": checks, "alice_check": alice_check, "bob_check": bob_check}
    if order is not None:
        ann["permutation"] = order
    common = dict(protocol=1, trial=trial, n_check=nc, threshold=tau, announcements=ann, eve=eve)
    if errors > tau:
        return ProtocolTranscript(
            aborted=True, abort_reason="check", alice_key=None, bob_key=None, check_errors=errors, **common
        )

    # step 9: both sides measure the stabilizers; only the differences are physical
    synd = syndrome_compare(state, pair, code)
    a = BitVector.from_array(random_bits(rng, pair.n))
    s_bit_a = pair.h1.mat_vec(a)
    s_phase_a = BitVector.from_array(random_bits(rng, pair.dim_c2))
    ann.update(
        alice_bit_syndrome=s_bit_a,
        bob_bit_syndrome=s_bit_a + synd.bit_syndrome,
        alice_phase_syndrome=s_phase_a,
        bob_phase_syndrome=s_phase_a + synd.phase_syndrome,
    )
    result = purify(state, pair, code)
    stats = {
        "bit_syndrome_weight": synd.bit_syndrome.weight(),
        "phase_syndrome_weight": synd.phase_syndrome.weight(),
        "purified": result.success,
    }
    # a phase syndrome beyond t_phase spoils the pairs but not the Z-basis key
    stats["phase_decoded"] = _decodes(pair.phase_table, synd.phase_syndrome)
    try:
        bit_fix = pair.bit_table.decode(synd.bit_syndrome)
    except DecodeFailure:
        stats["decoded"] = False
        return ProtocolTranscript(
            aborted=True, abort_reason="decode", alice_key=None, bob_key=None,
            check_errors=errors, stats=stats, **common,
        )
    stats["decoded"] = True

    # step 10: Z-measure the purified block; the key is the C2-coset
    x_rep = solve(pair.h1, s_bit_a)
    eb = state.restrict(code).eb
    alice_key = pair.coset_label(a + x_rep)
    bob_key = pair.coset_label(a + eb + bit_fix + x_rep)
    return ProtocolTranscript(
        aborted=False, abort_reason=None, alice_key=alice_key, bob_key=bob_key,
        check_errors=errors, stats=stats, **common,
    )


def _decodes(table, syndrome: BitVector) -> bool:
    try:
        table.decode(syndrome)
    except DecodeFailure:
        return False
    return True
