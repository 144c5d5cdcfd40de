"""Link selection for fixed-rate transmission.

Two families of policies live here:

* the throughput-optimal policy without a delay constraint, which splits into
  three regimes depending on which link is the bottleneck, and
* three delay-constrained variants for equal source and relay rates, whose
  buffer occupancy is a birth-death Markov chain with closed-form solution.

Decision convention: ``d = 0`` selects the source, ``d = 1`` the relay. When
both links are in outage nobody can transmit and the decision is fixed to 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, OutageProfile, RateConfig, SlotDraw
from .errors import (
    DegenerateChainError,
    InconsistentCaseError,
    NoSignChangeError,
    RegimeError,
    UnachievableDelayError,
    UnstableQueueError,
)
from .numerics import SolverConfig, bisect

DEGENERATE_TOL = 1e-9
_PROB_TOL = 1e-12


class Case(enum.IntEnum):
    """Regime of the optimal fixed-rate policy.

    CASE1: neither link is a bottleneck; CASE2: the relay link is;
    CASE3: the source link is.
    """

    CASE1 = 1
    CASE2 = 2
    CASE3 = 3


class Variant(enum.IntEnum):
    V1 = 1
    V2 = 2
    V3 = 3


@dataclass(frozen=True)
class FixedRatePolicy:
    case: Case
    p_c: float

    def __post_init__(self):
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError(f"coin probability {self.p_c} outside [0, 1]")

    @classmethod
    def optimal(cls, prof: OutageProfile, rates: RateConfig) -> "FixedRatePolicy":
        case = classify_case(prof, rates)
        return cls(case, coin_probability(case, prof, rates))


@dataclass(frozen=True)
class DelayVariant:
    variant: Variant
    p_c: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("p_c", "p", "q"):
            v = getattr(self, name)
            if not -_PROB_TOL <= v <= 1.0 + _PROB_TOL:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p + self.q > 1.0 + 1e-12:
            raise ValueError("p + q must not exceed 1")

    @classmethod
    def build(cls, variant: Variant, prof: OutageProfile, p_c: float) -> "DelayVariant":
        p, q = markov_params(variant, prof, p_c)
        return cls(Variant(variant), float(p_c), p, q)


@dataclass(frozen=True)
class MarkovAnalysis:
    occupancy: np.ndarray
    mean_queue: float
    mean_delay: float
    throughput: float
    outage: float
    arrival_rate: float


@dataclass(frozen=True)
class HighSnrFixed:
    throughput_limit: float
    outage_asymptote: float
    diversity: float


# -- optimal policy without delay constraint ---------------------------------


def classify_case(prof: OutageProfile, rates: RateConfig) -> Case:
    ps, pr, s0, r0 = prof.p_s, prof.p_r, rates.s0, rates.r0
    if pr > r0 / (r0 + s0 * (1.0 - ps)):
        return Case.CASE2
    if ps > s0 / (s0 + r0 * (1.0 - pr)):
        return Case.CASE3
    return Case.CASE1


def coin_probability(case: Case, prof: OutageProfile, rates: RateConfig) -> float:
    """Probability that the coin selects the relay (outcome 1).

    Raises
    ------
    InconsistentCaseError
        If ``case`` does not match the outage profile, which shows up as a
        coin probability outside [0, 1].
    """
    ps, pr, s0, r0 = prof.p_s, prof.p_r, rates.s0, rates.r0
    case = Case(case)
    if case is Case.CASE1:
        den = (1 - ps) * (1 - pr) * (s0 + r0)
        if den == 0.0:
            # both links permanently down, the coin is never consulted
            return 0.5
        pc = (s0 * (1 - ps) - (1 - pr) * ps * r0) / den
    elif case is Case.CASE2:
        den = (1 - ps) * pr * s0
        if den == 0.0:
            raise InconsistentCaseError("relay-bottleneck regime needs 0 < P_R and P_S < 1")
        pc = (s0 * (1 - ps) * pr - (1 - pr) * r0) / den
    else:
        den = r0 * (1 - pr) * ps
        if den == 0.0:
            raise InconsistentCaseError("source-bottleneck regime needs P_S > 0 and P_R < 1")
        pc = s0 * (1 - ps) / den
    if pc < -1e-12 or pc > 1 + 1e-12:
        raise InconsistentCaseError(f"{case.name} gives coin probability {pc:.6g} for {prof}")
    return min(max(pc, 0.0), 1.0)


def _table_source_first(o_s: int, o_r: int, coin: int) -> int:
    # neither link is the bottleneck: the coin only breaks ties
    if o_s and o_r:
        return int(coin)
    return int(o_r and not o_s)


def _table_relay_first(o_s: int, o_r: int, coin: int) -> int:
    # relay link is the bottleneck: the coin may silence the source
    if o_r:
        return 1
    if o_s:
        return int(coin)
    return 0


def select_link_optimal(policy: FixedRatePolicy, slot: SlotDraw, coin: int) -> int:
    if policy.case is Case.CASE1:
        return _table_source_first(slot.o_s, slot.o_r, coin)
    if policy.case is Case.CASE2:
        return _table_relay_first(slot.o_s, slot.o_r, coin)
    return 1 - int(slot.o_s)


def no_outage_throughput(rates: RateConfig) -> float:
    return rates.tau0


def throughput_optimal(prof: OutageProfile, rates: RateConfig) -> float:
    case = classify_case(prof, rates)
    if case is Case.CASE2:
        return rates.r0 * (1 - prof.p_r)
    if case is Case.CASE3:
        return rates.s0 * (1 - prof.p_s)
    return rates.tau0 * (1 - prof.p_s * prof.p_r)


def outage_optimal(prof: OutageProfile, rates: RateConfig) -> float:
    ps, pr, s0, r0 = prof.p_s, prof.p_r, rates.s0, rates.r0
    case = classify_case(prof, rates)
    if case is Case.CASE2:
        return pr - (1 - pr) * r0 / s0
    if case is Case.CASE3:
        return ps - (1 - ps) * s0 / r0
    return ps * pr


def diversity_multiplexing(r: float) -> float:
    """Diversity-multiplexing tradeoff d(r) = 2(1 - 2r) of the adaptive policy."""
    if not 0.0 <= r <= 0.5:
        raise ValueError("multiplexing gain must lie in [0, 1/2]")
    return 2.0 * (1.0 - 2.0 * r)


def high_snr_fixed(params: ChannelParams, rates: RateConfig) -> HighSnrFixed:
    """Asymptotic throughput, outage and diversity when gamma_s = gamma_r -> inf."""
    if not math.isclose(params.gamma_s, params.gamma_r, rel_tol=1e-12):
        raise ValueError("high-SNR expansion assumes equal transmit SNRs")
    g = params.gamma_s
    asym = rates.s_threshold / params.omega_bar_s * rates.r_threshold / params.omega_bar_r / g**2
    return HighSnrFixed(rates.tau0, asym, 2.0)


def optimal_rates(tau0: float) -> RateConfig:
    """Rates minimising the high-SNR outage for a target no-outage throughput."""
    if not tau0 > 0:
        raise ValueError("tau0 must be positive")
    return RateConfig(2.0 * tau0, 2.0 * tau0)


# -- delay-constrained variants ----------------------------------------------


def _require_equal_rates(rates: RateConfig | None):
    if rates is not None and not math.isclose(rates.s0, rates.r0, rel_tol=1e-12):
        raise ValueError("delay-constrained analysis requires s0 == r0")


def markov_params(variant: Variant, prof: OutageProfile, p_c: float) -> tuple[float, float]:
    """Down-step probability ``p`` and hold probability ``q`` of the interior states."""
    ps, pr = prof.p_s, prof.p_r
    if Variant(variant) is Variant.V3:
        return 1.0 - pr, ps * pr + (1 - ps) * pr * p_c
    return (1 - ps) * (1 - pr) * p_c + ps * (1 - pr), ps * pr


def select_link_delay(variant: DelayVariant, q_prev: float, slot: SlotDraw, coin: int, rates: RateConfig) -> int:
    _require_equal_rates(rates)
    v = variant.variant
    if slot.o_s:
        if v is Variant.V1 and q_prev <= rates.r0 * (1 + 1e-12):
            return 0
        if v is not Variant.V1 and q_prev <= 0:
            return 0
    if v is Variant.V3:
        return _table_relay_first(slot.o_s, slot.o_r, coin)
    return _table_source_first(slot.o_s, slot.o_r, coin)


def transition_matrix(variant: Variant, prof: OutageProfile, p_c: float, L: int) -> np.ndarray:
    """Buffer-occupancy transition matrix built by enumerating the policy.

    States count packets 0..L. Every (O_S, O_R, coin) outcome is pushed
    through ``select_link_delay``; a source transmission into a full buffer
    is dropped and leaves the state unchanged. Built this way, the matrix is
    an independent check of the closed-form occupancy.
    """
    if L < 1:
        raise ValueError("buffer must hold at least one packet")
    ps, pr = prof.p_s, prof.p_r
    rates = RateConfig(1.0, 1.0)
    dv = DelayVariant(Variant(variant), p_c, *markov_params(variant, prof, p_c))
    M = np.zeros((L + 1, L + 1))
    outcomes = []
    for o_s in (0, 1):
        for o_r in (0, 1):
            for coin in (0, 1):
                prob = (1 - ps if o_s else ps) * (1 - pr if o_r else pr) * (p_c if coin else 1 - p_c)
                outcomes.append((o_s, o_r, coin, prob))
    for k in range(L + 1):
        for o_s, o_r, coin, prob in outcomes:
            if prob == 0.0:
                continue
            d = select_link_delay(dv, float(k), SlotDraw(0.0, 0.0, o_s, o_r), coin, rates)
            if d == 0 and o_s and k < L:
                M[k, k + 1] += prob
            elif d == 1 and o_r and k > 0:
                M[k, k - 1] += prob
            else:
                M[k, k] += prob
    return M


def _check_gap(p: float, q: float) -> float:
    gap = 2 * p + q - 1
    if abs(gap) < DEGENERATE_TOL:
        raise DegenerateChainError(f"2p + q - 1 = {gap:.3g}; closed forms are singular")
    return gap


class _Powers:
    """Evaluates p^n and b^n relative to max(p, b)^n to avoid under/overflow."""

    def __init__(self, p: float, b: float):
        self.m = max(p, b)
        self.p = p / self.m if self.m > 0 else 0.0
        self.b = b / self.m if self.m > 0 else 0.0

    def P(self, n):
        return self.p**n

    def B(self, n):
        return self.b**n


def markov_stationary_closed(variant: Variant, prof: OutageProfile, p_c: float, L: int) -> np.ndarray:
    """Closed-form stationary occupancy Pr{Q = k R0}, k = 0..L."""
    if L < 1:
        raise ValueError("buffer must hold at least one packet")
    ps = prof.p_s
    p, q = markov_params(variant, prof, p_c)
    gap = _check_gap(p, q)
    b = 1 - p - q
    w = _Powers(p, b)
    pi = np.empty(L + 1)
    if Variant(variant) is Variant.V1:
        # every power carries an extra m^(L-1) that cancels in the ratio
        den = w.P(L - 1) * (2 * p * (1 - q) + q * (2 - q) - ps * (2 - ps)) - w.B(L - 1) * (1 - ps) ** 2
        pi[0] = w.P(L - 1) * gap * (ps - q) / den
        pi[1] = w.P(L - 1) * gap * (1 - ps) / den
        for k in range(2, L + 1):
            pi[k] = w.P(L - k) * gap * (1 - ps) ** 2 * w.B(k - 2) / (w.m * den)
    else:
        den = w.P(L) * (2 * p + q - ps) - (1 - ps) * w.B(L)
        pi[0] = w.P(L) * gap / den
        for k in range(1, L + 1):
            pi[k] = (1 - ps) * gap * w.P(L - k) * w.B(k - 1) / (w.m * den)
    return pi


def _closed_form_metrics(variant: Variant, prof: OutageProfile, p_c: float, L: int, r0: float):
    """Mean queue, mean delay and throughput from the printed expressions."""
    ps = prof.p_s
    p, q = markov_params(variant, prof, p_c)
    gap = _check_gap(p, q)
    b = 1 - p - q
    w = _Powers(p, b)
    if Variant(variant) is Variant.V1:
        pl, bl = w.P(L - 1), w.B(L - 1)
        num = pl * ((2 * p + q) ** 2 - p - q - ps * (3 * p + q - 1)) - (1 - ps) * bl * (L * gap + p)
        den_q = pl * (2 * p * (1 - q) + (2 - q) * q - (2 - ps) * ps) - (1 - ps) ** 2 * bl
        mean_queue = r0 * (1 - ps) / gap * num / den_q
        den_t = pl * (ps * (p + q - 1) - q * (2 * p + q) + p + q) - (1 - ps) * p * bl
        # no arrivals at all (a permanently full or idle buffer): unbounded delay
        mean_delay = num / den_t / gap if den_t != 0 else math.inf
        tau = (1 - ps) * ((1 - ps) * p * bl + pl * (ps * b + q * (2 * p + q) - p - q))
        tau /= pl * ((2 - ps) * ps - 2 * p * (1 - q) - (2 - q) * q) + (1 - ps) ** 2 * bl
        tau *= r0
    else:
        pl, bl = w.P(L), w.B(L)
        num = w.m * w.P(L + 1) - bl * (L * gap + p)
        den = pl * (2 * p + q - ps) - (1 - ps) * bl
        mean_queue = r0 * (1 - ps) / gap * num / den
        mean_delay = num / (pl - bl) / (gap * p) if p * (pl - bl) != 0 else math.inf
        tau = r0 * (1 - ps) * p * (pl - bl) / den
    return mean_queue, mean_delay, tau


def _arrival_probabilities(variant: Variant, prof: OutageProfile, p_c: float, L: int) -> np.ndarray:
    """Probability that a packet enters the buffer, per occupancy state."""
    ps = prof.p_s
    p, q = markov_params(variant, prof, p_c)
    up = np.full(L + 1, 1 - p - q)
    up[0] = 1 - ps
    if Variant(variant) is Variant.V1:
        up[1] = 1 - ps
    up[L] = 0.0
    return up


def _hold_probabilities(variant: Variant, prof: OutageProfile, p_c: float, L: int) -> np.ndarray:
    """Probability that nothing is delivered (silent slot or drop), per state."""
    ps = prof.p_s
    p, q = markov_params(variant, prof, p_c)
    hold = np.full(L + 1, q)
    hold[0] = ps
    hold[L] = 1 - p
    if Variant(variant) is Variant.V1:
        # one buffered packet: only O_S = 0 with O_R = 1 empties it
        hold[L] = 1 - p if L > 1 else 1 - (ps - q)
    return hold


def outage_delay_constrained(variant: Variant, prof: OutageProfile, p_c: float, L: int) -> float:
    """Fraction of slots in which no bits reach the buffer or the destination.

    With equal rates every slot either moves the buffer up, moves it down,
    or is an outage slot, so the outage is the occupancy-weighted hold
    probability: P_S Pr{Q=0} + q (1 - Pr{Q=0} - Pr{Q=L R0}) + (1 - p) Pr{Q=L R0},
    with the one-packet full buffer of V1 treated separately.
    """
    pi = markov_stationary_closed(variant, prof, p_c, L)
    return float(pi @ _hold_probabilities(variant, prof, p_c, L))


def markov_metrics(variant: Variant, prof: OutageProfile, p_c: float, L: int, rates: RateConfig) -> MarkovAnalysis:
    _require_equal_rates(rates)
    r0 = rates.r0
    pi = markov_stationary_closed(variant, prof, p_c, L)
    arrival = r0 * float(pi @ _arrival_probabilities(variant, prof, p_c, L))
    mean_queue, mean_delay, tau = _closed_form_metrics(variant, prof, p_c, L, r0)
    return MarkovAnalysis(
        occupancy=pi,
        mean_queue=mean_queue,
        mean_delay=mean_delay,
        throughput=tau,
        outage=outage_delay_constrained(variant, prof, p_c, L),
        arrival_rate=arrival,
    )


def infinite_buffer_metrics(variant: Variant, prof: OutageProfile, p_c: float) -> tuple[float, float, float]:
    """(Pr{Q=0}, mean delay, throughput / R0) as the buffer size grows without bound.

    The throughput is returned per unit rate; multiply by R0.

    Raises
    ------
    UnstableQueueError
        If 2p + q - 1 <= 0, in which case the delay grows with the buffer.
    """
    ps, pr, pc = prof.p_s, prof.p_r, p_c
    p, q = markov_params(variant, prof, p_c)
    if 2 * p + q - 1 <= DEGENERATE_TOL:
        raise UnstableQueueError(f"2p + q - 1 = {2 * p + q - 1:.3g}: delay is unbounded in L")
    v = Variant(variant)
    if v is Variant.V1:
        pi0 = ps * (2 * pc * (1 - pr) * (1 - ps) + (2 - pr) * ps - 1) / (
            2 * pc * (1 - ps) * (1 - ps * pr) + ps**2 * (1 - pr)
        )
        inner = ps**2 * (pc * (2 * pr - 1) - pr + 1) - 2 * pc * pr * ps + pc
        delay = 1.0 / (2 * pc * (1 - pr) * (1 - ps) - pr * ps + 2 * ps - 1) + 2 * pc * (1 - ps) / inner
        tau = (1 - ps) * inner / (2 * pc * (1 - ps) * (1 - ps * pr) + (1 - pr) * ps**2)
    elif v is Variant.V2:
        pi0 = (2 * pc * (1 - pr) * (1 - ps) + ps * (2 - pr) - 1) / ((1 - pr) * (ps + 2 * pc * (1 - ps)))
        delay = 1.0 / (2 * pc * (1 - pr) * (1 - ps) - pr * ps + 2 * ps - 1)
        tau = (1 - ps) * (pc * (1 - ps) + ps) / (2 * pc * (1 - ps) + ps)
    else:
        c = 2 - ps - pc * (1 - ps)
        pi0 = (1 - pr * c) / (2 - ps - pr * c)
        delay = 1.0 / (1 - pr * c)
        tau = (1 + ps * pr - pr - ps) / (2 - ps - pr * c)
    return pi0, delay, tau


def infinite_buffer_outage(variant: Variant, prof: OutageProfile, p_c: float) -> float:
    """Outage as the buffer size grows without bound (no full-buffer term)."""
    pi0, _, _ = infinite_buffer_metrics(variant, prof, p_c)
    _, q = markov_params(variant, prof, p_c)
    return prof.p_s * pi0 + q * (1 - pi0)


def _v12_min_delay(ps: float, pr: float) -> float:
    return 1.0 / (1 - pr * (2 - ps))


def delay_limits(variant: Variant, prof: OutageProfile) -> tuple[float, float]:
    """Range of mean delays reachable by tuning the coin of one variant.

    Returns ``(t_min, t_max)``; ``t_max`` is ``math.inf`` when unbounded.

    Raises
    ------
    RegimeError
        If the variant cannot keep the delay bounded at these outage
        probabilities (V1 and V2 need P_R < 1/(2 - P_S)).
    """
    ps, pr = prof.p_s, prof.p_r
    v = Variant(variant)
    if v is Variant.V3:
        if pr >= 1:
            raise RegimeError("relay link permanently in outage")
        t_min = 1.0 / (1 - pr)
        if pr * (2 - ps) < 1:
            return t_min, _v12_min_delay(ps, pr)
        return t_min, math.inf
    if not pr * (2 - ps) < 1:
        raise RegimeError(f"{v.name} needs P_R < 1/(2 - P_S); got P_S={ps}, P_R={pr}")
    t_min2 = _v12_min_delay(ps, pr)
    t_max = 1.0 / (ps * (2 - pr) - 1) if ps * (2 - pr) > 1 else math.inf
    if v is Variant.V2:
        return t_min2, t_max
    t_min1 = t_min2 + 2 * (1 - ps) / (1 - ps * pr * (2 - ps))
    return t_min1, t_max


def tune_delay(target: float, prof: OutageProfile, cfg: SolverConfig | None = None) -> DelayVariant:
    """Pick the variant and coin probability that give a mean delay of ``target``.

    Variants are tried in the order V1, V2, V3, so the largest-throughput
    variant whose delay range contains the target wins. The coin probability
    is found by bisection on the infinite-buffer delay expression.

    Raises
    ------
    UnachievableDelayError
        If no variant reaches ``target``; ``nearest`` holds the closest
        achievable delay.
    """
    cfg = cfg or SolverConfig()
    ranges = []
    for v in (Variant.V1, Variant.V2, Variant.V3):
        try:
            lo, hi = delay_limits(v, prof)
        except RegimeError:
            continue
        ranges.append((v, lo, hi))
        if lo - 1e-12 <= target <= hi + 1e-12:
            return DelayVariant.build(v, prof, _solve_coin(v, prof, target, cfg))
    if not ranges:
        raise UnachievableDelayError("no delay-constrained variant applies", nearest=None)
    bounds = [b for _, lo, hi in ranges for b in (lo, hi) if math.isfinite(b)]
    nearest = min(bounds, key=lambda b: abs(b - target))
    raise UnachievableDelayError(
        f"mean delay {target} is not achievable; nearest achievable is {nearest:.6g}"
        + (" (shorter delays need the non-adaptive two-slot schedule)" if target < nearest else ""),
        nearest=nearest,
    )


def coin_for_delay(variant: Variant, prof: OutageProfile, target: float, cfg: SolverConfig | None = None) -> float:
    """Coin probability giving mean delay ``target`` with a given variant.

    Raises
    ------
    UnachievableDelayError
        If ``target`` lies outside the variant's delay range.
    """
    try:
        lo, hi = delay_limits(variant, prof)
    except RegimeError as exc:
        raise UnachievableDelayError(str(exc)) from None
    if not lo - 1e-12 <= target <= hi + 1e-12:
        nearest = lo if target < lo else hi
        raise UnachievableDelayError(
            f"V{int(variant)} reaches mean delays in [{lo:.6g}, {hi:.6g}], not {target}", nearest=nearest
        )
    return _solve_coin(Variant(variant), prof, target, cfg or SolverConfig())


def _solve_coin(variant: Variant, prof: OutageProfile, target: float, cfg: SolverConfig) -> float:
    def excess(pc):
        try:
            return infinite_buffer_metrics(variant, prof, pc)[1] - target
        except UnstableQueueError:
            return math.inf

    # delay decreases in the coin probability; P_C = 1 gives the minimum
    if excess(1.0) >= 0:
        return 1.0
    lo = 0.0
    if not math.isfinite(excess(lo)):
        # move the lower end just inside the stable region
        p_unit, _ = markov_params(variant, prof, 1.0)
        p_zero, q_zero = markov_params(variant, prof, 0.0)
        _, q_unit = markov_params(variant, prof, 1.0)
        g0 = 2 * p_zero + q_zero - 1
        g1 = 2 * p_unit + q_unit - 1
        pc_crit = -g0 / (g1 - g0)
        lo = min(1.0, pc_crit + 1e-15)
        while not math.isfinite(excess(lo)):
            lo = lo + (1.0 - lo) * 1e-6 if lo < 1 else 1.0
    if excess(lo) <= 0:
        return lo
    try:
        return bisect(excess, lo, 1.0, SolverConfig(rel_tol=1e-15, abs_tol=1e-13, max_iter=cfg.max_iter))
    except NoSignChangeError as exc:
        raise UnachievableDelayError(str(exc)) from None


def high_snr_delay_outage(target: float, p_s: float, p_r: float) -> float:
    """High-SNR outage for a mean delay ``target`` > 1."""
    if target <= 1:
        raise ValueError("mean delay must exceed one slot")
    if target <= 3:
        return p_s / (target + 1)
    return p_s**2 / (target - 1) + p_s * p_r
