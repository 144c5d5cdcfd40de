"""Link selection when the source uses a fixed rate and the relay adapts its rate.

The relay always transmits at the instantaneous capacity of its link, so
only the source can be in outage. Without power allocation the policy is a
threshold on the relay SNR; with power allocation the relay water-fills
over its gain and the threshold moves to a gain level G.

Integrals over the relay link go through a *link* object (see
``channel.RayleighLink``), which gives closed forms for Rayleigh fading and
quadrature otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import RAYLEIGH, OutageProfile, RateConfig, SlotDraw
from .errors import NoSignChangeError, SolverError
from .numerics import DEFAULT_SOLVER, SolverConfig, bisect, bisect_log_decreasing, expand_bracket, lambert_w0

# relay-SNR threshold above which the rate balance is declared saturated
_SATURATION = 1e9


@dataclass(frozen=True)
class MixedPolicy:
    """Solved mixed-rate policy.

    ``rho`` sets the relay-SNR threshold 2^(rho s0) - 1 for slots in which
    the source could also transmit. In power-allocation mode ``lam`` is the
    water level, ``g_limit`` the equivalent gain threshold and
    ``gamma_budget`` the average power budget. ``case2`` marks the regime in
    which the source link is the bottleneck and d = 1 - O_S.
    """

    rho: float
    case2: bool = False
    lam: float | None = None
    gamma_budget: float | None = None
    g_limit: float | None = None
    gamma_s: float | None = None
    throughput: float | None = None

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError("rho must be non-negative")
        if self.lam is not None:
            if not self.lam > 0:
                raise ValueError("water level must be positive")
            if self.g_limit is not None and self.g_limit < self.lam * (1 - 1e-12):
                raise ValueError("gain threshold must not lie below the water level")

    @property
    def power_allocation(self) -> bool:
        return self.lam is not None

    def snr_threshold(self, s0: float) -> float:
        if self.case2 or math.isinf(self.rho):
            return math.inf
        return 2.0 ** (self.rho * s0) - 1.0


@dataclass(frozen=True)
class MixedSlotDecision:
    d: int
    relay_rate: float
    relay_power: float | None = None


def _link(omega_r: float, fading):
    return fading.link(omega_r)


# -- fixed relay power --------------------------------------------------------


def mixed_condition(prof: OutageProfile, rates: RateConfig, omega_r: float, fading=RAYLEIGH) -> bool:
    """True when the relay link is not the bottleneck (threshold regime)."""
    cap = _link(omega_r, fading).log2_tail(0.0)
    return prof.p_s <= rates.s0 / (rates.s0 + cap)


def rate_balance(rho: float, prof: OutageProfile, rates: RateConfig, omega_r: float, fading=RAYLEIGH) -> tuple[float, float]:
    """(arrival side, service side) of the rate balance at threshold ``rho``."""
    link = _link(omega_r, fading)
    ps, s0 = prof.p_s, rates.s0
    t = 2.0 ** (rho * s0) - 1.0
    lhs = s0 * (1 - ps) * link.cdf(t)
    rhs = ps * link.log2_tail(0.0) + (1 - ps) * link.log2_tail(t)
    return lhs, rhs


def solve_rho(
    prof: OutageProfile,
    rates: RateConfig,
    omega_r: float,
    fading=RAYLEIGH,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """Threshold multiplier that balances arrivals at and departures from the relay.

    Raises
    ------
    NoSignChangeError
        When the source link is the bottleneck and no threshold balances
        the two sides.
    """

    def residual(rho):
        lhs, rhs = rate_balance(rho, prof, rates, omega_r, fading)
        return lhs - rhs

    hi = 1.0
    while residual(hi) < 0:
        if 2.0 ** (hi * rates.s0) - 1.0 > _SATURATION * omega_r:
            raise NoSignChangeError(
                "rate balance has no root; relay link never limits the throughput",
                rho_hi=hi,
                residual=residual(hi),
            )
        hi *= 2.0
    return bisect(residual, 0.0, hi, SolverConfig(rel_tol=1e-14, abs_tol=min(cfg.abs_tol, 1e-12), max_iter=400))


def mixed_policy(prof: OutageProfile, rates: RateConfig, omega_r: float, fading=RAYLEIGH) -> MixedPolicy:
    if not mixed_condition(prof, rates, omega_r, fading):
        return MixedPolicy(rho=0.0, case2=True, throughput=rates.s0 * (1 - prof.p_s))
    try:
        rho = solve_rho(prof, rates, omega_r, fading)
    except NoSignChangeError:
        # condition holds with equality up to rounding
        return MixedPolicy(rho=0.0, case2=True, throughput=rates.s0 * (1 - prof.p_s))
    lhs, _ = rate_balance(rho, prof, rates, omega_r, fading)
    return MixedPolicy(rho=rho, throughput=lhs)


def throughput_mixed(prof: OutageProfile, rates: RateConfig, omega_r: float, fading=RAYLEIGH) -> float:
    return mixed_policy(prof, rates, omega_r, fading).throughput


def select_link_mixed(policy: MixedPolicy, slot: SlotDraw, rates: RateConfig) -> MixedSlotDecision:
    if not slot.o_s:
        d = 1
    elif policy.case2:
        d = 0
    else:
        d = int(slot.r >= policy.snr_threshold(rates.s0))
    return MixedSlotDecision(d, math.log2(1.0 + slot.r) if d else 0.0)


# -- relay power allocation -----------------------------------------------------


def relay_power(h_r: float, lam: float) -> float:
    """Water-filling power max(0, 1/lam - 1/h_r)."""
    if not lam > 0:
        raise ValueError("water level must be positive")
    if h_r <= lam:
        return 0.0
    return 1.0 / lam - 1.0 / h_r


def _rate_residual(G, lam, ps, s0, link):
    return s0 * (1 - ps) * link.cdf(G) - ps * link.log2_ratio_tail(lam, lam) - (1 - ps) * link.log2_ratio_tail(G, lam)


def _power_used(G, lam, ps, gamma_s, link):
    src = 0.0 if math.isinf(G) else gamma_s * (1 - ps) * link.cdf(G)
    return ps * link.waterfill_tail(lam, lam) + (1 - ps) * link.waterfill_tail(G, lam) + src


def _gain_limit(lam, ps, s0, link):
    """Gain threshold that balances the rates at water level ``lam``."""
    if _rate_residual(lam, lam, ps, s0, link) >= 0:
        return lam
    if s0 * (1 - ps) - ps * link.log2_ratio_tail(lam, lam) <= 0:
        return math.inf
    f = lambda g: _rate_residual(g, lam, ps, s0, link)
    lo, hi = expand_bracket(f, lam, 2.0 * lam, limit=1e300)
    return bisect(f, lo, hi, SolverConfig(rel_tol=1e-15, abs_tol=1e-15, max_iter=400))


def pa_residuals(policy: MixedPolicy, prof: OutageProfile, rates: RateConfig, omega_bar_r: float, fading=RAYLEIGH) -> tuple[float, float]:
    """Residuals of the rate-balance and power-budget equations for a solved policy."""
    link = fading.link(omega_bar_r)
    ps, lam = prof.p_s, policy.lam
    if policy.case2:
        return 0.0, ps * link.waterfill_tail(lam, lam) + policy.gamma_s * (1 - ps) - policy.gamma_budget
    G = policy.g_limit
    return (
        _rate_residual(G, lam, ps, rates.s0, link),
        _power_used(G, lam, ps, policy.gamma_s, link) - policy.gamma_budget,
    )


def solve_water_level(p_s: float, gamma_s: float, gamma_budget: float, omega_bar_r: float, fading=RAYLEIGH) -> float:
    """Water level when the relay only transmits while the source link is down."""
    link = fading.link(omega_bar_r)
    spare = gamma_budget - gamma_s * (1 - p_s)
    if p_s <= 0 or spare <= 0:
        raise SolverError("budget leaves no power for the relay", p_s=p_s, spare=spare)
    return bisect_log_decreasing(lambda lam: p_s * link.waterfill_tail(lam, lam) - spare, omega_bar_r)


def pa_condition(prof: OutageProfile, rates: RateConfig, lam_t: float, omega_bar_r: float, fading=RAYLEIGH) -> bool:
    link = fading.link(omega_bar_r)
    return prof.p_s <= rates.s0 / (rates.s0 + link.log2_ratio_tail(lam_t, lam_t))


def solve_power_allocation(
    prof: OutageProfile,
    rates: RateConfig,
    gamma_s: float,
    gamma_budget: float,
    omega_bar_r: float,
    fading=RAYLEIGH,
) -> MixedPolicy:
    """Jointly solve the water level and selection threshold under a power budget.

    The outer loop bisects the water level (in log space) against the
    power budget; for each trial level the inner loop bisects the gain
    threshold G against the rate balance. The selection multiplier rho is
    then read off the threshold equation at G.

    Raises
    ------
    SolverError
        If the budget cannot be met (for instance when the source alone
        uses more than the budget) or a bracket cannot be found.
    """
    if not gamma_budget > 0:
        raise ValueError("power budget must be positive")
    ps, s0 = prof.p_s, rates.s0
    link = fading.link(omega_bar_r)
    if ps > 0:
        lam_t = solve_water_level(ps, gamma_s, gamma_budget, omega_bar_r, fading)
        if not pa_condition(prof, rates, lam_t, omega_bar_r, fading):
            return MixedPolicy(
                rho=0.0,
                case2=True,
                lam=lam_t,
                gamma_budget=gamma_budget,
                gamma_s=gamma_s,
                throughput=s0 * (1 - ps),
            )
    if gamma_s * (1 - ps) >= gamma_budget:
        raise SolverError("source power alone exhausts the budget", gamma_s=gamma_s, p_s=ps, budget=gamma_budget)

    def excess(lam):
        return _power_used(_gain_limit(lam, ps, s0, link), lam, ps, gamma_s, link) - gamma_budget

    try:
        lam = bisect_log_decreasing(excess, omega_bar_r)
    except NoSignChangeError as exc:
        raise SolverError("power-allocation solve failed", **exc.diagnostics) from None
    G = _gain_limit(lam, ps, s0, link)
    if math.isinf(G):
        raise SolverError("rate balance has no finite gain threshold", lam=lam)
    surplus = _rate_residual(G, lam, ps, s0, link)
    if surplus > 1e-9 * s0:
        # G pinned at lam: the source outpaces the relay at every feasible level
        raise SolverError("budget too small to balance the rates with G >= lambda", lam=lam, surplus=surplus)
    rho = (math.log(G / lam) + lam / G - 1.0 + lam * gamma_s) / s0
    return MixedPolicy(
        rho=max(rho, 0.0),
        lam=lam,
        gamma_budget=gamma_budget,
        g_limit=G,
        gamma_s=gamma_s,
        throughput=s0 * (1 - ps) * link.cdf(G),
    )


def gain_threshold(lam: float, rho: float, gamma_s: float, s0: float) -> float:
    """G = -lam / W0(-exp(lam gamma_s - rho s0 - 1))."""
    return -lam / lambert_w0(-math.exp(lam * gamma_s - rho * s0 - 1.0))


def log_threshold_rule(h_r: float, policy: MixedPolicy, rates: RateConfig) -> bool:
    """Relay wins a slot with the source link up iff ln(h/lam) + lam/h >= rho s0 - lam gamma_s + 1."""
    lam = policy.lam
    if h_r < lam:
        return False
    return math.log(h_r / lam) + lam / h_r >= policy.rho * rates.s0 - lam * policy.gamma_s + 1.0


def select_link_mixed_pa(policy: MixedPolicy, o_s: int, h_r: float, gamma_s: float, rates: RateConfig) -> MixedSlotDecision:
    lam = policy.lam
    if policy.case2:
        d = 1 - int(o_s)
    elif not o_s:
        d = int(h_r >= lam)
    else:
        d = int(h_r >= policy.g_limit)
    power = relay_power(h_r, lam) if d else 0.0
    rate = math.log2(h_r / lam) if d and h_r > lam else 0.0
    return MixedSlotDecision(d, rate, power)


# -- delay-constrained heuristic ------------------------------------------------------


def select_link_mixed_delay(q_prev: float, q_max: float, slot: SlotDraw, policy: MixedPolicy, rates: RateConfig) -> int:
    """Queue-aware variant of the threshold policy that keeps Q below ``q_max``."""
    if not slot.o_s:
        return 1
    cap = math.log2(1.0 + slot.r)
    if cap <= q_prev <= q_max - rates.s0:
        return select_link_mixed(policy, slot, rates).d
    if q_prev > q_max - rates.s0:
        return 1
    return 0


def mean_relay_capacity_pa(lam: float, omega_bar_r: float, fading=RAYLEIGH) -> float:
    """E{log2(h/lam); h >= lam}, the mean rate of a water-filling relay."""
    return fading.link(omega_bar_r).log2_ratio_tail(lam, lam)

