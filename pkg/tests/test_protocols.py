import json
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom, chisquare

from cssqkd.adversary import AttackModel, coherent_pair_gate
from cssqkd.css_code import SHIPPED, get_pair, random_nested_pair, repetition_pair, steane_pair
from cssqkd.errors import ConfigError, MembershipError, SizeLimitError
from cssqkd.f2_linalg import BitVector, row_space
from cssqkd.protocols import (
    ProtocolConfig,
    ProtocolTranscript,
    compare_counts,
    equivalence_harness,
    run_protocol,
    run_protocol1,
    run_protocol2,
    run_protocol3,
    run_trials,
    z_average_check,
)
from cssqkd.protocols.config import SIFT_SHORTFALL_TARGET

FORCED_CHECKS = list(range(7))


def fixed(bit: str, phase: str) -> AttackModel:
    return AttackModel.fixed_pattern(BitVector.from_str(bit), BitVector.from_str(phase))


@pytest.mark.parametrize("name", sorted(SHIPPED))
@pytest.mark.parametrize("protocol", [1, 2, 3])
def test_completeness(name, protocol):
    pair = get_pair(name)
    for seed in range(100):
        t = run_protocol(protocol, ProtocolConfig(pair, seed=seed))
        assert not t.aborted, t.abort_reason
        assert t.key_agreement
        assert t.alice_key.length == pair.k
        assert t.check_errors == 0


def test_protocol1_exhaustive_correctable_patterns_on_code_pairs():
    pair = steane_pair()
    rng = np.random.default_rng(0)
    for xb in [None] + list(range(7, 14)):
        for zb in [None] + list(range(7, 14)):
            bit = ["0"] * 14
            phase = ["0"] * 14
            if xb is not None:
                bit[xb] = "1"
            if zb is not None:
                phase[zb] = "1"
            cfg = ProtocolConfig(pair, attack=fixed("".join(bit), "".join(phase)), seed=1)
            x_arr = np.array([int(c) for c in bit])
            z_arr = np.array([int(c) for c in phase])
            for b in (np.zeros(14, np.uint8), rng.integers(0, 2, 14).astype(np.uint8)):
                # Bob's Hadamard swaps which component counts as a bit error
                eff_bit = np.where(b == 1, z_arr, x_arr)
                eff_phase = np.where(b == 1, x_arr, z_arr)
                if eff_bit.sum() > 1 or eff_phase.sum() > 1:
                    continue
                t = run_protocol1(cfg, overrides={"b": b, "check_positions": FORCED_CHECKS})
                assert not t.aborted and t.key_agreement and t.check_errors == 0


def test_protocol1_high_bit_flip_rate_aborts():
    # Pr[Bin(100, 0.3) <= 3] is about 1e-11, so essentially every trial aborts
    pair = random_nested_pair(100, 60, 30, np.random.default_rng(7))
    cfg = ProtocolConfig(pair, attack=AttackModel.iid_pauli(0.3, 0, 0), seed=5)
    assert cfg.abort_threshold == 3
    assert binom.cdf(3, 100, 0.3) < 1e-10
    runs = run_trials(1, cfg, 1000)
    assert sum(t.aborted for t in runs) / 1000 >= 0.99


def test_protocol2_corrects_any_single_bit_error_on_code():
    pair = steane_pair()
    for pos in range(7, 14):
        bit = "".join("1" if i == pos else "0" for i in range(14))
        cfg = ProtocolConfig(pair, attack=fixed(bit, "0" * 14), seed=pos)
        for trial in range(5):
            t = run_protocol2(cfg, trial, overrides={"b": np.zeros(14, np.uint8), "check_positions": FORCED_CHECKS})
            assert not t.aborted and t.key_agreement
            assert t.stats["code_bit_errors"] == 1


def test_decode_failure_is_an_abort_in_every_protocol():
    pair = repetition_pair(4)  # two flips of four cannot be decoded at radius 1
    cfg = ProtocolConfig(pair, threshold=1, attack=fixed("00001100", "00000000"), seed=0)
    ov = {"b": np.zeros(8, np.uint8), "check_positions": [0, 1, 2, 3]}
    for fn in (run_protocol1, run_protocol2):
        t = fn(cfg, overrides=ov)
        assert t.aborted and t.abort_reason == "decode"
    t = run_protocol3(
        cfg,
        overrides={
            "raw_count": 8, "alice_bases": np.zeros(8), "bob_bases": np.zeros(8),
            "working": np.arange(8), "check_positions": [0, 1, 2, 3],
        },
    )
    assert t.aborted and t.abort_reason == "decode"


def test_sifting_abort_rate_at_zero_delta():
    pair = steane_pair()
    cfg = ProtocolConfig(pair, delta=0.0, seed=11)
    assert cfg.raw_count == 28
    # Bin(28, 1/2) < 14 has probability (1 - Pr[=14]) / 2, close to a half
    expected = binom.cdf(13, 28, 0.5)
    runs = run_trials(3, cfg, 10_000)
    rate = sum(t.abort_reason == "sifting" for t in runs) / 10_000
    assert abs(rate - expected) < 4 * math.sqrt(expected * (1 - expected) / 10_000)
    assert 0.4 < rate < 0.5


def test_delta_half_with_fifty_checks():
    pair = steane_pair()
    cfg = ProtocolConfig(pair, n_check=50, delta=0.5, seed=3)
    w = cfg.working_count
    expected = binom.cdf(w - 1, cfg.raw_count, 0.5)
    runs = [run_protocol3(cfg, t) for t in range(100)]
    sift = sum(t.abort_reason == "sifting" for t in runs)
    assert abs(sift / 100 - expected) < 4 * math.sqrt(expected * (1 - expected) / 100) + 0.01
    assert all(t.key_agreement for t in runs if not t.aborted)
    assert all(t.abort_reason in (None, "sifting") for t in runs)


def test_auto_raw_count_meets_shortfall_target():
    for pair in (steane_pair(), get_pair("rep3")):
        cfg = ProtocolConfig(pair)
        w, r = cfg.working_count, cfg.raw_count
        assert binom.cdf(w - 1, r, 0.5) <= SIFT_SHORTFALL_TARGET
        assert binom.cdf(w - 1, r - 1, 0.5) > SIFT_SHORTFALL_TARGET


@pytest.mark.parametrize("name,trials", [("rep3", 4000), ("steane", 12_800)])
def test_announced_u_plus_v_is_uniform(name, trials):
    pair = get_pair(name)
    cfg = ProtocolConfig(pair, seed=21)
    counts = Counter(str(t.announcements["u_plus_v"]) for t in run_trials(3, cfg, trials))
    obs = [counts.get(format(i, f"0{pair.n}b"), 0) for i in range(1 << pair.n)]
    assert sum(obs) == trials
    assert chisquare(obs).pvalue > 1e-3


@pytest.mark.parametrize("protocol", [1, 2, 3])
def test_abort_monotone_in_error_rate(protocol):
    pair = steane_pair()
    rates = [0.0, 0.05, 0.1, 0.2, 0.4]
    aborted = []
    for p in rates:
        cfg = ProtocolConfig(pair, attack=AttackModel.iid_pauli(p, 0, 0), seed=9)
        aborted.append(np.array([t.abort_reason == "check" for t in run_trials(protocol, cfg, 300)]))
    for lo, hi in zip(aborted, aborted[1:]):
        # common random numbers: an abort at a lower rate persists at a higher one
        assert np.all(hi >= lo)
    assert aborted[0].sum() == 0 and aborted[-1].sum() > aborted[1].sum() + 20


@pytest.mark.parametrize("protocol", [1, 2, 3])
def test_scramble_without_attack(protocol):
    cfg = ProtocolConfig(steane_pair(), scramble=True, seed=4)
    for t in run_trials(protocol, cfg, 50):
        assert not t.aborted and t.key_agreement
        assert sorted(t.announcements["permutation"]) == list(range(len(t.announcements["permutation"])))


def test_scramble_makes_fixed_pattern_exchangeable():
    pair = steane_pair()
    attack = fixed("1" + "0" * 13, "0" * 14)
    ov = {"b": np.zeros(14, np.uint8), "check_positions": FORCED_CHECKS}
    plain = ProtocolConfig(pair, attack=attack, seed=2, threshold=2)
    for t in range(20):
        assert int(np.argmax(run_protocol2(plain, t, ov).extras["bit_error"])) == 0
    mixed = ProtocolConfig(pair, attack=attack, seed=2, threshold=2, scramble=True)
    where = [int(np.argmax(run_protocol2(mixed, t, ov).extras["bit_error"])) for t in range(7000)]
    obs = np.bincount(where, minlength=14)
    assert chisquare(obs).pvalue > 1e-3


def test_announcing_z_does_not_change_bob():
    pair = steane_pair()
    attack = AttackModel.iid_pauli(0.05, 0.02, 0.05)
    a = ProtocolConfig(pair, attack=attack, seed=6, announce_z=True)
    b = ProtocolConfig(pair, attack=attack, seed=6, announce_z=False)
    for t in range(200):
        ta, tb = run_protocol2(a, t), run_protocol2(b, t)
        assert "z" in ta.announcements and "z" not in tb.announcements
        assert ta.statistic() == tb.statistic() and ta.bob_key == tb.bob_key


@pytest.mark.parametrize("protocol", [1, 2, 3])
def test_transcript_records_are_json(protocol):
    cfg = ProtocolConfig(steane_pair(), attack=AttackModel.iid_pauli(0.1, 0, 0.1), seed=8)
    for t in run_trials(protocol, cfg, 30):
        rec = json.loads(json.dumps(t.to_record()))
        assert rec["aborted"] == (rec["alice_key"] is None) == (rec["bob_key"] is None)
        if not t.aborted:
            assert len(rec["alice_key"]) == cfg.pair.k


def test_transcript_key_invariant():
    with pytest.raises(ValueError):
        ProtocolTranscript(1, 0, True, "check", BitVector.zeros(1), None, 3, 7, 2)


def test_config_validation():
    with pytest.raises(ConfigError):
        ProtocolConfig(steane_pair(), threshold=8)
    with pytest.raises(ConfigError):
        ProtocolConfig(steane_pair(), representation="tensor")
    cfg = ProtocolConfig(steane_pair(), threshold_rate=0.11, n_check=200)
    assert cfg.abort_threshold == 22
    assert ProtocolConfig(steane_pair()).abort_threshold == 2  # ceil((1/7 + 0.02) * 7)


def test_workers_do_not_change_results():
    cfg = ProtocolConfig(steane_pair(), attack=AttackModel.iid_pauli(0.05, 0, 0.05), seed=12)
    serial = [t.to_record() for t in run_trials(3, cfg, 40)]
    pooled = [t.to_record() for t in run_trials(3, cfg, 40, workers=2)]
    assert serial == pooled


def test_dense_and_frame_protocol1_agree_on_pauli_noise():
    pair = get_pair("rep3")
    attack = AttackModel.iid_pauli(0.08, 0.04, 0.08)
    frame = ProtocolConfig(pair, attack=attack, seed=13, representation="frame")
    dense = ProtocolConfig(pair, attack=attack, seed=14, representation="dense")
    a = Counter(t.statistic() for t in run_trials(1, frame, 3000))
    b = Counter(t.statistic() for t in run_trials(1, dense, 3000))
    assert compare_counts(a, b).max_z < 4


def test_dense_and_frame_protocol2_agree_on_pauli_noise():
    pair = steane_pair()
    attack = AttackModel.iid_pauli(0.05, 0.0, 0.05)
    frame = ProtocolConfig(pair, n_check=3, threshold=1, attack=attack, seed=15, representation="frame")
    dense = ProtocolConfig(pair, n_check=3, threshold=1, attack=attack, seed=16, representation="dense")
    a = Counter(t.statistic() for t in run_trials(2, frame, 2000))
    b = Counter(t.statistic() for t in run_trials(2, dense, 2000))
    assert compare_counts(a, b).max_z < 4


def test_dense_runs_respect_qubit_cap():
    cfg = ProtocolConfig(steane_pair(), attack=AttackModel.unitary(coherent_pair_gate(0.1, 0)))
    with pytest.raises(SizeLimitError):
        run_protocol1(cfg)


def test_intercept_resend_only_in_protocol3():
    cfg = ProtocolConfig(steane_pair(), attack=AttackModel.intercept_resend(1.0))
    with pytest.raises(ValueError):
        run_protocol1(cfg)
    with pytest.raises(ValueError):
        run_protocol2(cfg)
    runs = run_trials(3, cfg, 50)
    assert sum(t.stats["sifted_errors"] for t in runs) > 0


def test_harness_rejects_mismatch():
    a = ProtocolConfig(steane_pair())
    b = ProtocolConfig(steane_pair(), n_check=9)
    with pytest.raises(ConfigError):
        equivalence_harness(a, b, 10)
    c = ProtocolConfig(get_pair("rep3"))
    with pytest.raises(ConfigError):
        equivalence_harness(a, c, 10)


def test_harness_reports_both_parts():
    cfg = ProtocolConfig(steane_pair(), attack=AttackModel.iid_pauli(0.05, 0, 0.05), seed=17)
    rep = equivalence_harness(cfg, cfg, 2000)
    assert rep.tvd < 0.05 and rep.p_value > 1e-3
    assert rep.correction is not None
    rec = rep.to_record()
    assert set(rec) >= {"tvd", "p_value", "chi2", "max_z", "correction_tvd"}


def test_compare_counts_identical():
    c = Counter({"a": 10, "b": 30})
    rep = compare_counts(c, c)
    assert rep.tvd == 0 and rep.max_z == 0 and rep.p_value == pytest.approx(1.0)


def test_z_average_steane_zero():
    pair = steane_pair()
    rep = z_average_check(pair, BitVector.zeros(7), BitVector.zeros(7))
    assert rep and rep.max_deviation <= 1e-10


def test_z_average_trivial_pair():
    pair = get_pair("trivial1")
    for k in row_space(pair.c1_gen):
        for x in (BitVector.from_str("0"), BitVector.from_str("1")):
            assert z_average_check(pair, k, x)


@settings(max_examples=15)
@given(st.integers(0, 15), st.integers(0, 127))
def test_z_average_off_diagonal_vanishes(ki, xi):
    pair = steane_pair()
    words = row_space(pair.c1_gen)
    rep = z_average_check(pair, words[ki], BitVector(7, xi))
    assert rep.ok and rep.max_off_diagonal < 1e-12


def test_z_average_rejects_non_codeword():
    with pytest.raises(MembershipError):
        z_average_check(steane_pair(), BitVector.from_str("1000000"), BitVector.zeros(7))
