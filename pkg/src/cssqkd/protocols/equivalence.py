"""Statistical comparison of two protocols, and the z-averaging identity."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2_contingency

from ..css_code import CssCodePair
from ..errors import ConfigError, MembershipError
from ..f2_linalg import BitVector, row_space
from ..statevector import build_css_codeword
from .config import ProtocolConfig, ProtocolTranscript
from .runner import run_trials


@dataclass(frozen=True)
class DistributionComparison:
    """Two empirical distributions over the same outcome labels."""

    counts_a: dict
    counts_b: dict
    tvd: float
    chi2: float
    p_value: float
    max_z: float

    @property
    def within_3sigma(self) -> bool:
        return self.max_z <= 3.0


def compare_counts(counts_a: Counter, counts_b: Counter) -> DistributionComparison:
    na, nb = sum(counts_a.values()), sum(counts_b.values())
    if na == 0 or nb == 0:
        raise ValueError("both samples must be non-empty")
    keys = sorted(set(counts_a) | set(counts_b), key=repr)
    ca = np.array([counts_a.get(k, 0) for k in keys], dtype=float)
    cb = np.array([counts_b.get(k, 0) for k in keys], dtype=float)
    tvd = 0.5 * float(np.abs(ca / na - cb / nb).sum())
    if len(keys) < 2:
        stat, p = 0.0, 1.0
    else:
        res = chi2_contingency(np.vstack([ca, cb]), correction=False)
        stat, p = float(res[0]), float(res[1])
    max_z = 0.0
    for x, y in zip(ca, cb):
        pool = (x + y) / (na + nb)
        sigma = math.sqrt(pool * (1 - pool) * (1 / na + 1 / nb))
        if sigma > 0:
            max_z = max(max_z, float(abs(x / na - y / nb) / sigma))
    return DistributionComparison(
        {k: int(v) for k, v in zip(keys, ca)}, {k: int(v) for k, v in zip(keys, cb)}, tvd, stat, p, max_z
    )


@dataclass(frozen=True)
class EquivalenceReport:
    protocols: tuple[int, int]
    trials: int
    statistic: DistributionComparison
    # announced correction string, x in Protocol 2 against u + v in Protocol 3
    correction: DistributionComparison | None = None
    abort_rates: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def tvd(self) -> float:
        return self.statistic.tvd

    @property
    def p_value(self) -> float:
        return self.statistic.p_value

    def to_record(self) -> dict:
        rec = {
            "protocols": list(self.protocols),
            "trials": self.trials,
            "tvd": self.statistic.tvd,
            "chi2": self.statistic.chi2,
            "p_value": self.statistic.p_value,
            "max_z": self.statistic.max_z,
            "abort_rate_a": self.abort_rates[0],
            "abort_rate_b": self.abort_rates[1],
        }
        if self.correction is not None:
            rec.update(
                correction_tvd=self.correction.tvd,
                correction_p_value=self.correction.p_value,
            )
        return rec


def _check_compatible(a: ProtocolConfig, b: ProtocolConfig) -> None:
    if a.pair.n != b.pair.n or a.pair.c1_gen != b.pair.c1_gen or a.pair.c2_gen != b.pair.c2_gen:
        raise ConfigError("configurations use different code pairs", "code")
    if a.check_count != b.check_count:
        raise ConfigError("configurations use different check counts", "n_check")
    if a.abort_threshold != b.abort_threshold:
        raise ConfigError("configurations use different abort thresholds", "threshold")
    if a.attack.kind != b.attack.kind:
        raise ConfigError("configurations use different attack families", "attack.kind")


def statistic_counts(transcripts: list[ProtocolTranscript]) -> Counter:
    return Counter(t.statistic() for t in transcripts)


def _correction_counts(transcripts: list[ProtocolTranscript]) -> Counter:
    out = Counter()
    for t in transcripts:
        s = t.announcements.get("x", t.announcements.get("u_plus_v"))
        if s is not None and not t.aborted:
            out[str(s)] += 1
    return out


def compare_transcripts(
    protocols: tuple[int, int], runs_a: list[ProtocolTranscript], runs_b: list[ProtocolTranscript]
) -> EquivalenceReport:
    stat = compare_counts(statistic_counts(runs_a), statistic_counts(runs_b))
    corr = None
    if set(protocols) == {2, 3}:
        ca, cb = _correction_counts(runs_a), _correction_counts(runs_b)
        if ca and cb:
            corr = compare_counts(ca, cb)
    rates = (
        sum(t.aborted for t in runs_a) / len(runs_a),
        sum(t.aborted for t in runs_b) / len(runs_b),
    )
    return EquivalenceReport(tuple(protocols), len(runs_a), stat, corr, rates)


def equivalence_harness(
    config_a: ProtocolConfig,
    config_b: ProtocolConfig,
    trials: int,
    *,
    protocols: tuple[int, int] = (2, 3),
    workers: int = 1,
) -> EquivalenceReport:
    """Run ``protocols[0]`` under ``config_a`` and ``protocols[1]`` under ``config_b``.

    The statistic compared is (aborted, check error count, keys agree).
    """
    _check_compatible(config_a, config_b)
    runs_a = run_trials(protocols[0], config_a, trials, workers=workers)
    runs_b = run_trials(protocols[1], config_b, trials, workers=workers)
    return compare_transcripts(protocols, runs_a, runs_b)


@dataclass(frozen=True)
class ZAverageReport:
    ok: bool
    max_deviation: float
    max_off_diagonal: float

    def __bool__(self) -> bool:
        return self.ok


def z_average_check(pair: CssCodePair, k_prime: BitVector, x: BitVector, tol: float = 1e-10) -> ZAverageReport:
    """Average of |psi_{x,z}><psi_{x,z}| over all z against the mixture of |k' + x + w>."""
    n = pair.n
    if not pair.in_c1(k_prime):
        raise MembershipError(f"{k_prime} is not in C1")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for zi in range(dim):
        psi = build_css_codeword(pair, k_prime, x, BitVector(n, zi)).amplitudes
        rho += np.outer(psi, psi.conj())
    rho /= dim
    target = np.zeros((dim, dim), dtype=complex)
    words = row_space(pair.c2_gen)
    for w in words:
        i = (k_prime + x + w).bits
        target[i, i] += 1 / len(words)
    dev = float(np.abs(rho - target).max())
    off = float(np.abs(rho - np.diag(np.diag(rho))).max())
    return ZAverageReport(dev <= tol, dev, off)
