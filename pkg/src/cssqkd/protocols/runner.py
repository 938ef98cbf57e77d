"""Run many trials of one protocol, optionally across worker processes."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from .bb84 import run_protocol3
from .config import ProtocolConfig, ProtocolTranscript
from .css_protocol import run_protocol2
from .lochau import run_protocol1

RUNNERS: dict[int, Callable[..., ProtocolTranscript]] = {1: run_protocol1, 2: run_protocol2, 3: run_protocol3}


def run_protocol(protocol: int, config: ProtocolConfig, trial: int = 0, overrides: dict | None = None):
    try:
        fn = RUNNERS[protocol]
    except KeyError:
        raise ValueError(f"protocol must be 1, 2 or 3, got {protocol!r}") from None
    return fn(config, trial, overrides)


def _chunk(args):
    protocol, config, start, stop = args
    return [run_protocol(protocol, config, t) for t in range(start, stop)]


def run_trials(
    protocol: int, config: ProtocolConfig, trials: int, *, workers: int = 1, start: int = 0
) -> list[ProtocolTranscript]:
    """Trials ``start .. start + trials - 1`` in index order.

    Each trial draws from its own streams, so the result does not depend
    on ``workers``.
    """
    if protocol not in RUNNERS:
        raise ValueError(f"protocol must be 1, 2 or 3, got {protocol!r}")
    if workers <= 1 or trials < 2 * workers:
        return [run_protocol(protocol, config, t) for t in range(start, start + trials)]
    step = -(-trials // (workers * 4))
    jobs = [(protocol, config, s, min(s + step, start + trials)) for s in range(start, start + trials, step)]
    out: list[ProtocolTranscript] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_chunk, jobs):
            out.extend(part)
    return out
