"""Protocol 2: the key is sent directly inside a randomly shifted CSS codeword.

Under Pauli noise the transmitted state stays a shifted codeword, so the
run tracks the classical string x + v + w and the bit/phase error masks
rather than amplitudes.
"""

from __future__ import annotations

import numpy as np

from ..adversary import EveRecord, sample_pauli_pattern
from ..css_code import correct_to_codeword
from ..errors import DecodeFailure
from ..f2_linalg import BitVector, random_codeword
from ..rng import trial_streams
from .config import ProtocolConfig, ProtocolTranscript, choose_subset, complement, random_bits


def run_protocol2(config: ProtocolConfig, trial: int = 0, overrides: dict | None = None) -> ProtocolTranscript:
    """One trial; ``overrides`` may pin ``b`` and ``check_positions``."""
    if config.uses_dense():
        from .dense import run_protocol2_dense

        return run_protocol2_dense(config, trial, overrides)
    ov = overrides or {}
    rng, chan = trial_streams(config.seed, trial)
    pair = config.pair
    nc, total = config.check_count, config.working_count
    tau = config.abort_threshold

    # step 1: check bits, key, Hadamard string
    check_bits = random_bits(rng, nc)
    key = BitVector.from_array(random_bits(rng, pair.k))
    b = random_bits(rng, total)
    if "b" in ov:
        b = np.asarray(ov["b"], dtype=np.uint8)
    # step 2: the random shift (x, z) of the code
    x = BitVector.from_array(random_bits(rng, pair.n))
    z = BitVector.from_array(random_bits(rng, pair.n))
    # steps 3-4: encode, then pick which positions carry checks
    v = pair.key_representative(key)
    checks = choose_subset(rng, total, nc)
    if "check_positions" in ov:
        checks = np.asarray(ov["check_positions"], dtype=np.int64)
    code = complement(total, checks)

    # steps 5-6: Hadamards per b, transmit under the attack
    order = rng.permutation(total) if config.scramble else None
    xb_tx, zb_tx = sample_pauli_pattern(config.attack, total, chan)
    eve = EveRecord() if config.attack.kind == "none" else EveRecord(
        BitVector.from_array(xb_tx), BitVector.from_array(zb_tx)
    )
    if order is None:
        xb, zb = xb_tx, zb_tx
    else:
        inv = np.argsort(order)
        xb, zb = xb_tx[inv], zb_tx[inv]

    # step 7: announcements
    ann = {"b": b, "check_positions": checks, "alice_check": check_bits, "x": x}
    if config.announce_z:
        ann["z"] = z
    if order is not None:
        ann["permutation"] = order

    # step 8: undoing H swaps the roles of the X and Z components
    eff_bit = np.where(b == 1, zb, xb).astype(np.uint8)
    eff_phase = np.where(b == 1, xb, zb).astype(np.uint8)

    # step 9: Bob reads the check qubits in Z
    bob_check = check_bits ^ eff_bit[checks]
    errors = int((bob_check ^ check_bits).sum())
    ann["bob_check"] = bob_check
    common = dict(
        protocol=2, trial=trial, n_check=nc, threshold=tau, announcements=ann, eve=eve,
        extras={"bit_error": eff_bit, "phase_error": eff_phase},
    )
    stats = {
        "code_bit_errors": int(eff_bit[code].sum()),
        "code_phase_errors": int(eff_phase[code].sum()),
    }
    if errors > tau:
        return ProtocolTranscript(
            aborted=True, abort_reason="check", alice_key=None, bob_key=None,
            check_errors=errors, stats=stats, **common,
        )

    # step 10: measure the code block, remove x, correct into C1, read the coset
    w = random_codeword(pair.c2_gen, rng)
    y = x + v + w + BitVector.from_array(eff_bit[code])
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
