"""Run configuration and per-trial transcripts shared by the three protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.stats import binom

from ..adversary import AttackModel, EveRecord
from ..css_code import CssCodePair, validate_pair
from ..errors import ConfigError
from ..f2_linalg import BitVector

THRESHOLD_MARGIN = 0.02
SIFT_SHORTFALL_TARGET = 1e-9


@dataclass(frozen=True)
class ProtocolConfig:
    """Sizes, thresholds and attack for one protocol experiment.

    ``n_check`` check positions sit next to the ``pair.n`` code positions;
    it defaults to ``pair.n`` so both halves have the same size.  The
    abort threshold is the largest tolerated number of disagreeing check
    bits.  It is taken from ``threshold`` if given, else
    ``ceil(threshold_rate * n_check)``, else ``ceil((t / n + margin) * n_check)``.

    ``delta`` is the BB84 oversampling: (4 + delta) * n raw qubits with
    n = (n_check + pair.n) / 2.  ``None`` picks the smallest value for
    which fewer than 2n sifted bits has probability below 1e-9.
    """

    pair: CssCodePair
    n_check: int | None = None
    threshold: int | None = None
    threshold_rate: float | None = None
    scramble: bool = False
    attack: AttackModel = field(default_factory=AttackModel.none)
    seed: int = 0
    delta: float | None = None
    announce_z: bool = True
    representation: str = "auto"
    qubit_cap: int = 12

    def __post_init__(self):
        check = validate_pair(self.pair)
        if not check:
            raise ConfigError(check.violation, "code")
        if self.n_check is not None and self.n_check < 1:
            raise ConfigError("need at least one check position", "n_check")
        if self.abort_threshold > self.check_count or self.abort_threshold < 0:
            raise ConfigError(
                f"threshold {self.abort_threshold} outside [0, {self.check_count}]", "threshold"
            )
        if self.representation not in ("auto", "frame", "dense"):
            raise ConfigError(f"unknown representation {self.representation!r}", "representation")
        if self.delta is not None and self.delta < 0:
            raise ConfigError("delta must be non-negative", "delta")

    @property
    def check_count(self) -> int:
        return self.pair.n if self.n_check is None else self.n_check

    @property
    def working_count(self) -> int:
        return self.check_count + self.pair.n

    @property
    def abort_threshold(self) -> int:
        if self.threshold is not None:
            return self.threshold
        rate = self.threshold_rate
        if rate is None:
            rate = self.pair.t / self.pair.n + THRESHOLD_MARGIN
        return math.ceil(rate * self.check_count - 1e-12)

    @property
    def raw_count(self) -> int:
        """Number of qubits Alice prepares in BB84."""
        w = self.working_count
        if self.delta is None:
            return _auto_raw_count(w)
        return math.ceil((4 + self.delta) * w / 2 - 1e-9)

    @property
    def effective_delta(self) -> float:
        return 2 * self.raw_count / self.working_count - 4

    def uses_dense(self) -> bool:
        if self.representation == "dense":
            return True
        return self.representation == "auto" and self.attack.kind == "unitary"


@lru_cache(maxsize=None)
def _auto_raw_count(working: int) -> int:
    total = 2 * working
    while binom.cdf(working - 1, total, 0.5) > SIFT_SHORTFALL_TARGET:
        total += 1
    return total


def bits_str(v: BitVector | None) -> str | None:
    return None if v is None else str(v)


@dataclass
class ProtocolTranscript:
    """Everything observable about one run of a protocol."""

    protocol: int
    trial: int
    aborted: bool
    abort_reason: str | None
    alice_key: BitVector | None
    bob_key: BitVector | None
    check_errors: int | None
    n_check: int
    threshold: int
    announcements: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)
    eve: EveRecord | None = None
    # arrays kept for in-process analysis only; never serialized
    extras: dict[str, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.aborted != (self.alice_key is None) or self.aborted != (self.bob_key is None):
            raise ValueError("keys must be present exactly when the run did not abort")

    @property
    def key_agreement(self) -> bool | None:
        if self.aborted:
            return None
        return self.alice_key == self.bob_key

    def statistic(self) -> tuple:
        """Observable statistic compared across protocols."""
        return (self.aborted, self.check_errors, self.key_agreement)

    def to_record(self) -> dict[str, Any]:
        rec = {
            "protocol": self.protocol,
            "trial": self.trial,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "check_errors": self.check_errors,
            "n_check": self.n_check,
            "threshold": self.threshold,
            "alice_key": bits_str(self.alice_key),
            "bob_key": bits_str(self.bob_key),
            "key_agreement": self.key_agreement,
            "announcements": {k: _plain(v) for k, v in self.announcements.items()},
            "stats": {k: _plain(v) for k, v in self.stats.items()},
            "eve": self.eve.summary() if self.eve is not None else {},
        }
        return rec


def _plain(v):
    if isinstance(v, BitVector):
        return str(v)
    if isinstance(v, np.ndarray):
        return [int(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def choose_subset(rng: np.random.Generator, population: int, size: int) -> np.ndarray:
    """Uniform ``size``-subset of ``range(population)``, sorted."""
    return np.sort(rng.choice(population, size=size, replace=False))


def complement(population: int, subset) -> np.ndarray:
    mask = np.ones(population, dtype=bool)
    mask[np.asarray(subset, dtype=np.int64)] = False
    return np.flatnonzero(mask)
