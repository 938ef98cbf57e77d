"""The three key-distribution protocols and the harness that compares them."""

from .bb84 import run_protocol3
from .config import ProtocolConfig, ProtocolTranscript
from .css_protocol import run_protocol2
from .equivalence import (
    DistributionComparison,
    EquivalenceReport,
    ZAverageReport,
    compare_counts,
    compare_transcripts,
    equivalence_harness,
    z_average_check,
)
from .lochau import run_protocol1
from .runner import RUNNERS, run_protocol, run_trials

__all__ = [
    "DistributionComparison",
    "EquivalenceReport",
    "ProtocolConfig",
    "ProtocolTranscript",
    "RUNNERS",
    "ZAverageReport",
    "compare_counts",
    "compare_transcripts",
    "equivalence_harness",
    "run_protocol",
    "run_protocol1",
    "run_protocol2",
    "run_protocol3",
    "run_trials",
    "z_average_check",
]
