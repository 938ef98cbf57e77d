"""
Closed-form security figures and a Monte Carlo check of the sampling bound.

The sampling experiment fixes an error pattern on 2n positions, splits
them uniformly into n check and n code positions, and counts the bad
event: more than delta*n errors on the code side while the check side
shows fewer than (delta - eps)*n.  The check-side count is
hypergeometric, so trials are drawn from that law directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import hypergeom

from .css_code import gv_rate, shannon_rate
from .errors import DomainError

RESIDUAL_TERM = "2^{O(-2s)}"


@dataclass(frozen=True)
class BoundInputs:
    n: int = 0
    m: int = 0
    s: float = 0.0
    delta: float = 0.0
    eps: float = 0.0
    t: int = 0

    def __post_init__(self):
        for name in ("n", "m", "s", "delta", "eps", "t"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        if self.delta and not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        if self.eps and self.eps >= self.delta:
            raise DomainError("eps must be smaller than delta")


@dataclass(frozen=True)
class InfoBound:
    """Bound 2^-c on Eve's information, plus a residual with no known constant."""

    value: float
    c: float
    vacuous: bool
    residual: str = RESIDUAL_TERM


def lo_chau_info_bound(s: float, m: int) -> InfoBound:
    if s <= 0 or m < 0:
        raise DomainError("need s > 0 and m >= 0")
    c = s - math.log2(2 * m + s + 1 / math.log(2))
    return InfoBound(2.0 ** -c, c, c <= 0)


def _check_sampling_domain(n: float, delta: float, eps: float) -> None:
    if n <= 0:
        raise DomainError(f"n = {n} must be positive")
    if not 0 < delta < 1:
        raise DomainError(f"delta = {delta} outside (0, 1)")
    if not 0 < eps < delta:
        raise DomainError(f"eps = {eps} outside (0, delta)")


def sampling_tail_bound(n: float, delta: float, eps: float) -> float:
    """exp(-eps^2 n / (4 (delta - delta^2)))."""
    _check_sampling_domain(n, delta, eps)
    return math.exp(-0.25 * eps * eps * n / (delta - delta * delta))


def _below(a: float) -> int:
    """Largest integer strictly less than ``a`` (robust to float noise)."""
    return math.ceil(a - 1e-9) - 1


def _bad_event_cap(n: int, delta: float, eps: float, planted: int) -> int:
    """Check-side counts K <= cap are exactly the bad outcomes."""
    # code errors planted - K > delta n, check errors K < (delta - eps) n
    return min(_below((delta - eps) * n), _below(planted - delta * n))


def exact_bad_probability(n: int, delta: float, eps: float, planted: int) -> float:
    cap = _bad_event_cap(n, delta, eps, planted)
    if cap < 0:
        return 0.0
    return float(hypergeom.cdf(cap, 2 * n, planted, n))


def worst_case_planted(n: int, delta: float, eps: float) -> int:
    """Planted error count on 2n positions that maximises the bad-event probability."""
    planted = np.arange(2 * n + 1)
    caps = np.array([_bad_event_cap(n, delta, eps, int(e)) for e in planted])
    probs = np.where(caps >= 0, hypergeom.cdf(np.maximum(caps, 0), 2 * n, planted, n), 0.0)
    return int(np.argmax(probs))


class SamplingOutcome(NamedTuple):
    empirical: float
    bound: float | None


def bad_event_counts(n: int, delta: float, eps: float, planted: int, check_errors: np.ndarray) -> np.ndarray:
    """Boolean mask of bad outcomes given check-side error counts."""
    k = np.asarray(check_errors)
    return (planted - k > delta * n + 1e-9) & (k < (delta - eps) * n - 1e-9)


def empirical_sampling_experiment(
    n: int,
    delta: float,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    planted: int | None = None,
    chunk: int = 1_000_000,
) -> SamplingOutcome:
    """Empirical bad-event frequency and the analytic bound.

    ``planted`` defaults to the worst case for the given parameters.  The
    bound is ``None`` where its formula is undefined (eps >= delta).
    """
    if n <= 0 or trials <= 0:
        raise DomainError("n and trials must be positive")
    if not 0 < delta < 1:
        raise DomainError(f"delta = {delta} outside (0, 1)")
    if planted is None:
        planted = worst_case_planted(n, delta, eps) if eps < delta else round(2 * delta * n)
    if not 0 <= planted <= 2 * n:
        raise DomainError(f"cannot plant {planted} errors on {2 * n} positions")
    bad = 0
    left = trials
    while left:
        size = min(chunk, left)
        k = rng.hypergeometric(planted, 2 * n - planted, n, size=size)
        bad += int(bad_event_counts(n, delta, eps, planted, k).sum())
        left -= size
    bound = sampling_tail_bound(n, delta, eps) if 0 < eps < delta else None
    return SamplingOutcome(bad / trials, bound)


def key_rate(delta: float, mode: str = "shannon", *, clamp: bool = True) -> float:
    if mode == "shannon":
        r = shannon_rate(delta)
    elif mode == "gv":
        r = gv_rate(delta)
    else:
        raise DomainError(f"unknown rate mode {mode!r}; use 'gv' or 'shannon'")
    return max(r, 0.0) if clamp else r
