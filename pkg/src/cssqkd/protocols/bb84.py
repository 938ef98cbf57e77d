"""Protocol 3: BB84 with sifting, check bits and a coset key."""

from __future__ import annotations

import numpy as np

from ..adversary import attack_qubit_stream
from ..css_code import correct_to_codeword
from ..errors import DecodeFailure
from ..f2_linalg import BitVector, random_codeword
from ..rng import trial_streams
from .config import ProtocolConfig, ProtocolTranscript, choose_subset, complement, random_bits


def run_protocol3(config: ProtocolConfig, trial: int = 0, overrides: dict | None = None) -> ProtocolTranscript:
    """One trial.

    ``overrides`` may pin ``raw_count``, ``alice_bases``, ``bob_bases``,
    ``working`` (raw indices, must all be sifted) and ``check_positions``
    (indices into the working list).
    """
    ov = overrides or {}
    rng, chan = trial_streams(config.seed, trial)
    pair = config.pair
    nc, total = config.check_count, config.working_count
    tau = config.abort_threshold
    raw = int(ov.get("raw_count", config.raw_count))

    # steps 1-2: random bits and bases (0 = Z, 1 = X)
    a = random_bits(rng, raw)
    bases = random_bits(rng, raw)
    if "alice_bases" in ov:
        bases = np.asarray(ov["alice_bases"], dtype=np.uint8)

    # step 3: transmission; with scrambling the stream order is permuted
    order = rng.permutation(raw) if config.scramble else None
    if order is None:
        recv_bases, recv_bits, eve = attack_qubit_stream(config.attack, bases, a, chan)
        inv = None
    else:
        recv_bases, recv_bits, eve = attack_qubit_stream(config.attack, bases[order], a[order], chan)
        inv = np.argsort(order)
        recv_bases, recv_bits = recv_bases[inv], recv_bits[inv]

    # step 4: Bob measures in random bases; a wrong basis gives a fair coin
    bob_bases = random_bits(rng, raw)
    if "bob_bases" in ov:
        bob_bases = np.asarray(ov["bob_bases"], dtype=np.uint8)
    coin = random_bits(rng, raw)
    bob_bits = np.where(bob_bases == recv_bases, recv_bits, coin).astype(np.uint8)

    # steps 5-6: bases announced, mismatches discarded
    sifted = np.flatnonzero(bob_bases == bases)
    sift_err = int((a[sifted] ^ bob_bits[sifted]).sum())
    stats = {"raw_count": raw, "sifted_count": int(sifted.size), "sifted_errors": sift_err}
    ann = {"alice_bases": bases, "bob_bases": bob_bases}
    if order is not None:
        ann["permutation"] = order
    common = dict(protocol=3, trial=trial, n_check=nc, threshold=tau, announcements=ann, stats=stats, eve=eve)
    extras = {"alice_bits": a, "alice_bases": bases, "sifted": sifted, "tx_of": inv}
    if sifted.size < total:
        return ProtocolTranscript(
            aborted=True, abort_reason="sifting", alice_key=None, bob_key=None,
            check_errors=None, extras=extras, **common,
        )
    working = sifted[choose_subset(rng, sifted.size, total)]
    if "working" in ov:
        working = np.asarray(ov["working"], dtype=np.int64)
    checks = choose_subset(rng, total, nc)
    if "check_positions" in ov:
        checks = np.asarray(ov["check_positions"], dtype=np.int64)
    code = complement(total, checks)
    ann.update(working=working, check_positions=checks)

    # step 7: compare check bits
    alice_check = a[working[checks]]
    bob_check = bob_bits[working[checks]]
    errors = int((alice_check ^ bob_check).sum())
    ann.update(alice_check=alice_check, bob_check=bob_check)
    if errors > tau:
        return ProtocolTranscript(
            aborted=True, abort_reason="check", alice_key=None, bob_key=None,
            check_errors=errors, extras=extras, **common,
        )

    # step 8: Alice announces u + v for random u in C1
    v = BitVector.from_array(a[working[code]])
    u = random_codeword(pair.c1_gen, rng)
    announced = u + v
    ann["u_plus_v"] = announced

    # steps 9-10: Bob holds v + e, subtracts, corrects into C1 and reads the coset
    noisy = BitVector.from_array(bob_bits[working[code]]) + announced
    stats["code_bit_errors"] = int((a[working[code]] ^ bob_bits[working[code]]).sum())
    try:
        corrected = correct_to_codeword(pair, noisy)
    except DecodeFailure:
        stats["decoded"] = False
        return ProtocolTranscript(
            aborted=True, abort_reason="decode", alice_key=None, bob_key=None,
            check_errors=errors, extras=extras, **common,
        )
    stats["decoded"] = True
    return ProtocolTranscript(
        aborted=False, abort_reason=None, alice_key=pair.coset_label(u), bob_key=pair.coset_label(corrected),
        check_errors=errors, extras=extras, **common,
    )
