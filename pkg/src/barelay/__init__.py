"""Buffer-aided relaying with adaptive link selection.

Closed-form throughput, outage and delay for fixed-rate and mixed-rate
transmission over a half-duplex decode-and-forward relay, the block-split
and alternating baselines, and a seeded slot-level simulator to check them.
"""

from .channel import ChannelParams, OutageProfile, RateConfig
from .errors import (
    ConfigError,
    DomainError,
    RegimeError,
    RelayError,
    SolverError,
    UnachievableDelayError,
    UnstableQueueError,
)
from .sim_engine import RunConfig, SimResult, analyze, simulate, sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ConfigError",
    "DomainError",
    "OutageProfile",
    "RateConfig",
    "RegimeError",
    "RelayError",
    "RunConfig",
    "SimResult",
    "SolverError",
    "UnachievableDelayError",
    "UnstableQueueError",
    "analyze",
    "simulate",
    "sweep",
]
