"""
Deterministic random streams.

Every stream is ``numpy.random.Generator(PCG64(SeedSequence(master_seed,
spawn_key=path)))``, where ``path`` is a tuple of non-negative integers such
as ``(trial_index,)`` or ``(trial_index, PURPOSE_CHANNEL)``.  Both the bit
generator and the seeding scheme are pinned by name, so a given
(master_seed, path) replays identically across runs and worker layouts.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.PCG64/SeedSequence-v1"

# sub-stream purposes within one trial
PURPOSE_PROTOCOL = 0
PURPOSE_CHANNEL = 1


def stream(master_seed: int, *path: int) -> np.random.Generator:
    if master_seed < 0 or any(p < 0 for p in path):
        raise ValueError("seeds and stream indices must be non-negative")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def trial_streams(master_seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(protocol stream, channel stream) for one trial.

    Keeping the channel on its own stream lets two protocols share
    identical attack randomness when their draw patterns line up.
    """
    return stream(master_seed, trial, PURPOSE_PROTOCOL), stream(master_seed, trial, PURPOSE_CHANNEL)
