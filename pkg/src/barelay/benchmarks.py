"""Relaying with a schedule fixed in advance, used as the baseline.

* Conventional 1: the source owns the first xi N slots and the relay the
  rest, with xi chosen to balance the two links.
* Conventional 2: strict two-slot alternation, no buffering beyond one
  packet; a packet the relay failed to decode is lost.
* k/n schedule: k source slots followed by n relay slots, repeated. This is
  the delay-limited counterpart of Conventional 1 for mixed rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import RAYLEIGH, OutageProfile
from .errors import UnstableQueueError
from .numerics import bisect_log_decreasing


@dataclass(frozen=True)
class Conv1Result:
    xi: float
    throughput: float
    outage: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")


@dataclass(frozen=True)
class ConvMixedSchedule:
    k: int
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError("k and n must be at least 1")

    def is_stable(self, p_s: float, s0: float, mean_cap: float) -> bool:
        return self.k * (1 - p_s) * s0 <= self.n * mean_cap

    @property
    def period(self) -> int:
        return self.k + self.n


def conv1_fixed(prof: OutageProfile, r0: float, s0: float | None = None) -> Conv1Result:
    """Block split with the share xi balancing the two links; needs s0 == r0."""
    if s0 is not None and not math.isclose(s0, r0, rel_tol=1e-12):
        raise ValueError("the block-split baseline assumes equal source and relay rates")
    a, b = 1 - prof.p_s, 1 - prof.p_r
    if a + b == 0:
        return Conv1Result(0.5, 0.0, 1.0)
    xi = b / (a + b)
    frac = a * b / (a + b)
    return Conv1Result(xi, r0 * frac, 1.0 - 2.0 * frac)


def conv2_fixed(prof: OutageProfile, r0: float) -> tuple[float, float]:
    """(throughput, outage) of strict alternation."""
    ok = (1 - prof.p_s) * (1 - prof.p_r)
    return 0.5 * r0 * ok, 1.0 - ok


def conv1_fixed_high_snr(r0: float, omega_bar_s: float, omega_bar_r: float, gamma: float) -> float:
    """Outage asymptote of the block split, decaying as 1/gamma."""
    return (2.0**r0 - 1.0) / 2.0 * (omega_bar_s + omega_bar_r) / (omega_bar_s * omega_bar_r) / gamma


def conv2_fixed_high_snr(r0: float, omega_bar_s: float, omega_bar_r: float, gamma: float) -> float:
    return (2.0**r0 - 1.0) * (omega_bar_s + omega_bar_r) / (omega_bar_s * omega_bar_r) / gamma


def conv1_mixed(prof: OutageProfile, s0: float, mean_cap: float) -> Conv1Result:
    """Block split when the relay transmits at capacity; ``mean_cap`` is E{log2(1+r)}."""
    if not mean_cap > 0:
        raise ValueError("mean relay capacity must be positive")
    src = s0 * (1 - prof.p_s)
    if src == 0:
        return Conv1Result(1.0, 0.0)
    xi = mean_cap / (src + mean_cap)
    return Conv1Result(xi, src * mean_cap / (src + mean_cap))


def conv_water_level(p_s: float, gamma_s: float, gamma_budget: float, omega_bar_r: float, fading=RAYLEIGH) -> float:
    """Relay water level of the block split with power allocation.

    Solves (1 - P_S) gamma_s + E{(1/lam - 1/h)^+} = 2 Gamma.
    """
    link = fading.link(omega_bar_r)
    spare = 2.0 * gamma_budget - (1 - p_s) * gamma_s
    if spare <= 0:
        raise ValueError("budget leaves no power for the relay")
    return bisect_log_decreasing(lambda lam: link.waterfill_tail(lam, lam) - spare, omega_bar_r)


def conv1_mixed_pa(prof: OutageProfile, s0: float, gamma_s: float, gamma_budget: float, omega_bar_r: float, fading=RAYLEIGH) -> Conv1Result:
    lam_c = conv_water_level(prof.p_s, gamma_s, gamma_budget, omega_bar_r, fading)
    cap = fading.link(omega_bar_r).log2_ratio_tail(lam_c, lam_c)
    return conv1_mixed(prof, s0, cap)


def conv_mixed_delay(sched: ConvMixedSchedule, prof: OutageProfile, s0: float, mean_cap: float | None = None) -> float:
    """Throughput k/(k+n) (1 - P_S) s0 of the k/n schedule.

    If ``mean_cap`` is given, the stability condition
    k (1 - P_S) s0 <= n mean_cap is enforced.

    Raises
    ------
    UnstableQueueError
        If the relay cannot keep up with the source on average.
    """
    if mean_cap is not None and not sched.is_stable(prof.p_s, s0, mean_cap):
        raise UnstableQueueError(
            f"k={sched.k}, n={sched.n}: source delivers {sched.k * (1 - prof.p_s) * s0:.4g} bits per cycle, "
            f"relay drains {sched.n * mean_cap:.4g}"
        )
    return sched.k / (sched.k + sched.n) * (1 - prof.p_s) * s0


def conv_mixed_high_snr(target_delay: float, s0: float) -> tuple[float, float]:
    """(throughput limit, multiplexing gain) of the k/n schedule at mean delay ``target_delay``."""
    if target_delay < 1:
        raise ValueError("mean delay must be at least one slot")
    r = 1.0 - 1.0 / (2.0 * target_delay)
    return s0 * r, r


def high_snr_schedule(target_delay: float) -> ConvMixedSchedule:
    """k = 2 E{T} - 1 source slots per relay slot, the high-SNR optimum."""
    k = 2.0 * target_delay - 1.0
    if abs(k - round(k)) > 1e-9 or k < 1:
        raise ValueError("high-SNR schedule needs 2 E{T} - 1 to be a positive integer")
    return ConvMixedSchedule(int(round(k)), 1)


def kn_cycle_delay_high_snr(sched: ConvMixedSchedule) -> float:
    """Mean delay (k + 1) / 2 of a k/1 cycle when the relay empties the buffer in one slot."""
    if sched.n != 1:
        raise ValueError("cycle delay formula is for a single relay slot")
    return (sched.k + 1) / 2.0
