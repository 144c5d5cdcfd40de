"""Seeded slot-level simulation of the source-relay-destination queue.

A run draws the channel in chunks (three uniforms per slot: S-R gain, R-D
gain, coin), lets numpy work out every decision that does not depend on the
buffer, and hands the rest to the compiled loop in ``_kernel``.

Two ways of handling the buffer's start and end are supported:

steady
    The buffer starts with ceil(sqrt(N)) packets (clipped to its size), a
    warm-up of N // 100 slots is discarded, and N slots are measured. This
    removes the filling transient and is how the delay-unconstrained
    policies are evaluated.
full
    The buffer starts empty; after N slots the source falls silent and the
    relay keeps transmitting until the buffer is empty. All slots, drain
    included, enter the throughput and delay.

Outage is the fraction of measured (non-drain) slots in which no bits move,
which for equal rates equals 1 - tau / tau0. The block-split and
alternating baselines use 1 - tau / tau0 directly.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel as K
from .benchmarks import ConvMixedSchedule, conv1_fixed, conv1_mixed, conv2_fixed, conv_mixed_delay
from .channel import (
    ChannelParams,
    OutageProfile,
    RateConfig,
    db_to_linear,
    draw_slots,
    outage_probs,
)
from .errors import ConfigError, UnachievableDelayError, UnstableQueueError
from .fixed_rate import (
    Case,
    FixedRatePolicy,
    Variant,
    coin_for_delay,
    infinite_buffer_metrics,
    infinite_buffer_outage,
    markov_metrics,
    outage_optimal,
    throughput_optimal,
)
from .mixed_rate import mixed_policy, solve_power_allocation

SCHEMES = (
    "fixed-optimal",
    "fixed-delay-v1",
    "fixed-delay-v2",
    "fixed-delay-v3",
    "mixed",
    "mixed-pa",
    "mixed-delay",
    "conv1-fixed",
    "conv2-fixed",
    "conv1-mixed",
    "conv-mixed-kn",
)
_DELAY_VARIANTS = {"fixed-delay-v1": Variant.V1, "fixed-delay-v2": Variant.V2, "fixed-delay-v3": Variant.V3}
_STEADY_DEFAULT = {"fixed-optimal", "mixed", "mixed-pa"}
_SCHEDULED = {"conv1-fixed", "conv2-fixed", "conv1-mixed"}
TRANSIENT_MODES = ("steady", "full")
DEFAULT_SLOTS = 10**7
CHUNK = 1 << 20


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulated or analytic evaluation needs.

    The channel is given either by ``params`` or, for the fixed-rate
    schemes, by ``outage`` (which is turned into Rayleigh means at
    ``rates``). Scheme-specific settings default to ``None``; the engine
    reports the ones a scheme needs but lacks.
    """

    scheme: str
    rates: RateConfig
    params: ChannelParams = field(default_factory=ChannelParams)
    outage: OutageProfile | None = None
    slots: int = DEFAULT_SLOTS
    seed: int = 0
    transient: str | None = None
    target_delay: float | None = None
    p_c: float | None = None
    buffer_packets: int | None = None
    qmax_bits: float | None = None
    k: int | None = None
    n_relay: int | None = None
    gamma_budget: float | None = None
    fifo: bool = False

    def __post_init__(self):
        problems = []
        if self.scheme not in SCHEMES:
            problems.append(f"unknown scheme {self.scheme!r}")
        if self.slots < 1:
            problems.append("slots must be at least 1")
        if self.transient is not None and self.transient not in TRANSIENT_MODES:
            problems.append(f"transient must be one of {TRANSIENT_MODES}")
        if self.buffer_packets is not None and self.buffer_packets < 1:
            problems.append("buffer_packets must be at least 1")
        if problems:
            raise ConfigError(problems)

    @property
    def transient_mode(self) -> str:
        if self.transient is not None:
            return self.transient
        return "steady" if self.scheme in _STEADY_DEFAULT else "full"

    def channel(self) -> ChannelParams:
        if self.outage is not None:
            return ChannelParams.from_outage(self.outage, self.rates)
        return self.params

    def profile(self) -> OutageProfile:
        if self.outage is not None:
            return self.outage
        return outage_probs(self.params, self.rates)


@dataclass(frozen=True)
class SimResult:
    throughput: float
    arrival_rate: float
    mean_queue: float
    mean_delay: float
    outage: float | None
    slots: int
    seed: int
    dropped_packets: int
    total_slots: int
    silent_fraction: float
    mean_power: float
    fifo_delay: float | None
    max_queue: float
    initial_queue: float
    final_queue: float
    arrived_bits: float
    departed_bits: float
    discarded_bits: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- policy resolution --------------------------------------------------------


@dataclass
class _Plan:
    mode: int
    decide: object  # (block, coin) -> int8 array of queue-free decisions
    capacity_of: object  # block -> departure capacity per slot
    power_of: object = None
    s0: float = 0.0
    r0: float = 0.0
    buffer_bits: float = math.inf
    gamma_s: float = 0.0
    q_max: float = math.inf
    k: int = 0
    n: int = 0
    block: int = 0
    tau0: float | None = None
    outage_from_throughput: bool = False
    allow_drain: bool = True
    warmup: bool = True
    extra: dict = field(default_factory=dict)


def _require(cfg: RunConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError([f"scheme {cfg.scheme} needs {n}" for n in missing])


def _source_first(o_s, o_r, coin):
    return np.where(o_s & o_r, coin, o_r & ~o_s).astype(np.int8)


def _relay_first(o_s, o_r, coin):
    return np.where(o_r, True, o_s & coin).astype(np.int8)


def _fixed_cap(r0):
    return lambda b: np.where(b.o_r, r0, 0.0)


def _log_cap(b):
    return np.log2(1.0 + b.r)


def _delay_coin(cfg: RunConfig, variant: Variant, prof: OutageProfile) -> float:
    if cfg.p_c is not None:
        return cfg.p_c
    _require(cfg, "target_delay")
    return coin_for_delay(variant, prof, cfg.target_delay)


def _plan(cfg: RunConfig) -> _Plan:
    rates, s0, r0 = cfg.rates, cfg.rates.s0, cfg.rates.r0
    params = cfg.channel()
    prof = cfg.profile()
    scheme = cfg.scheme
    if scheme == "fixed-optimal":
        pol = FixedRatePolicy.optimal(prof, rates)
        if pol.case is Case.CASE1:
            decide = lambda b, c: _source_first(b.o_s, b.o_r, c)
        elif pol.case is Case.CASE2:
            decide = lambda b, c: _relay_first(b.o_s, b.o_r, c)
        else:
            decide = lambda b, c: (~b.o_s).astype(np.int8)
        return _Plan(
            K.PLAIN, decide, _fixed_cap(r0), s0=s0, r0=r0, tau0=rates.tau0,
            outage_from_throughput=not math.isclose(s0, r0), extra={"p_c": pol.p_c, "case": int(pol.case)},
        )
    if scheme in _DELAY_VARIANTS:
        if not math.isclose(s0, r0, rel_tol=1e-12):
            raise ConfigError("delay-constrained fixed-rate schemes need s0 == r0")
        v = _DELAY_VARIANTS[scheme]
        pc = _delay_coin(cfg, v, prof)
        table = _relay_first if v is Variant.V3 else _source_first
        cap_bits = math.inf if cfg.buffer_packets is None else cfg.buffer_packets * r0
        return _Plan(
            K.OVERRIDE_ONE if v is Variant.V1 else K.OVERRIDE_EMPTY,
            lambda b, c: table(b.o_s, b.o_r, c),
            _fixed_cap(r0), s0=s0, r0=r0, buffer_bits=cap_bits, tau0=rates.tau0, extra={"p_c": pc},
        )
    if scheme in ("mixed", "mixed-delay"):
        pol = mixed_policy(prof, rates, params.omega_r, params.fading)
        thr = pol.snr_threshold(s0)
        decide = lambda b, c: (~b.o_s | (b.r >= thr)).astype(np.int8)
        plan = _Plan(K.PLAIN, decide, _log_cap, s0=s0, r0=s0, extra={"policy": pol})
        if scheme == "mixed-delay":
            _require(cfg, "qmax_bits")
            if cfg.qmax_bits < s0:
                raise ConfigError("qmax_bits must be at least s0")
            plan.mode, plan.q_max, plan.buffer_bits = K.MIXED_DELAY, cfg.qmax_bits, cfg.qmax_bits
        return plan
    if scheme == "mixed-pa":
        _require(cfg, "gamma_budget")
        pol = solve_power_allocation(prof, rates, params.gamma_s, cfg.gamma_budget, params.omega_bar_r, params.fading)
        lam = pol.lam
        if pol.case2:
            decide = lambda b, c: (~b.o_s).astype(np.int8)
        else:
            G = pol.g_limit
            decide = lambda b, c: np.where(b.o_s, b.h_r >= G, b.h_r >= lam).astype(np.int8)
        cap = lambda b: np.log2(np.maximum(b.h_r / lam, 1.0))
        power = lambda b: np.maximum(0.0, 1.0 / lam - 1.0 / b.h_r)
        return _Plan(K.PLAIN, decide, cap, power_of=power, s0=s0, r0=s0, gamma_s=params.gamma_s, extra={"policy": pol})
    if scheme == "conv1-fixed":
        res = conv1_fixed(prof, r0, s0)
        return _Plan(
            K.BLOCK, lambda b, c: np.zeros(len(b), np.int8), _fixed_cap(r0), s0=s0, r0=r0,
            block=int(round(res.xi * cfg.slots)), tau0=r0 / 2, outage_from_throughput=True,
            allow_drain=False, warmup=False, extra={"xi": res.xi},
        )
    if scheme == "conv2-fixed":
        if not math.isclose(s0, r0, rel_tol=1e-12):
            raise ConfigError("the alternating baseline needs s0 == r0")
        return _Plan(
            K.ALTERNATE, lambda b, c: np.zeros(len(b), np.int8), _fixed_cap(r0), s0=s0, r0=r0,
            tau0=r0 / 2, outage_from_throughput=True, allow_drain=False, warmup=False,
        )
    if scheme == "conv1-mixed":
        res = conv1_mixed(prof, s0, params.fading.link(params.omega_r).log2_tail(0.0))
        return _Plan(
            K.BLOCK, lambda b, c: np.zeros(len(b), np.int8), _log_cap, s0=s0, r0=s0,
            block=int(round(res.xi * cfg.slots)), allow_drain=False, warmup=False, extra={"xi": res.xi},
        )
    # conv-mixed-kn
    _require(cfg, "k", "n_relay")
    sched = ConvMixedSchedule(cfg.k, cfg.n_relay)
    return _Plan(
        K.CYCLE, lambda b, c: np.zeros(len(b), np.int8), _log_cap, s0=s0, r0=s0,
        k=sched.k, n=sched.n, warmup=False,
    )


# -- running ------------------------------------------------------------------


class _Runner:
    def __init__(self, cfg: RunConfig, plan: _Plan):
        self.cfg = cfg
        self.plan = plan
        self.params = cfg.channel()
        self.rng = np.random.default_rng(cfg.seed)
        self.pc = plan.extra.get("p_c", 0.5)
        self.fparams = np.array([plan.s0, plan.r0, plan.buffer_bits, plan.gamma_s, plan.q_max])
        self.iparams = np.array([plan.k, plan.n, plan.block], dtype=np.int64)
        self.fstate = np.zeros(1)
        self.istate = np.zeros(3, dtype=np.int64)
        self.counters = np.zeros(K.N_COUNTERS)
        self.ring_t = np.empty(1024, dtype=np.int64)
        self.ring_b = np.empty(1024, dtype=np.float64)
        self.track = bool(cfg.fifo)

    def advance(self, n: int, source_silent: bool = False):
        while n > 0:
            m = min(n, CHUNK)
            self._chunk(m, source_silent)
            n -= m

    def _chunk(self, m: int, source_silent: bool):
        b = draw_slots(self.params, self.cfg.rates, self.rng, m)
        coin = b.coin_u < self.pc
        d = self.plan.decide(b, coin)
        cap = np.ascontiguousarray(self.plan.capacity_of(b), dtype=np.float64)
        pw = self.plan.power_of(b) if self.plan.power_of is not None else np.zeros(m)
        self.ring_t, self.ring_b = K.run_chunk(
            np.ascontiguousarray(d, dtype=np.int8),
            np.ascontiguousarray(b.o_s, dtype=np.bool_),
            cap,
            np.ascontiguousarray(pw, dtype=np.float64),
            self.plan.mode,
            self.fparams,
            self.iparams,
            self.fstate,
            self.istate,
            self.counters,
            self.ring_t,
            self.ring_b,
            source_silent,
            self.track,
        )

    def drain(self, limit: int) -> int:
        """Relay-only slots until the buffer is empty; returns the number used."""
        used = 0
        while self.fstate[0] > 0 and used < limit:
            before = self.counters[K.SLOTS]
            step = int(min(max(1024, 2 * self.fstate[0] / max(self.plan.r0, 1e-9)), CHUNK))
            self._chunk(step, True)
            used += int(self.counters[K.SLOTS] - before)
        return used


def _initial_queue(cfg: RunConfig, plan: _Plan) -> float:
    """Prefill that keeps a zero-drift queue off the empty state for the whole run.

    Per-slot queue increments are estimated from a separate pilot draw. A
    clearly stable queue starts empty; otherwise the buffer starts 6 standard
    deviations of the run's random walk above zero.
    """
    m = min(cfg.slots, 1 << 16)
    rng = np.random.default_rng([cfg.seed, 1])
    b = draw_slots(cfg.channel(), cfg.rates, rng, m)
    d = plan.decide(b, b.coin_u < plan.extra.get("p_c", 0.5))
    inc = np.where(d == 0, plan.s0 * b.o_s, -plan.capacity_of(b))
    n = cfg.slots + cfg.slots // 100
    sigma = max(float(inc.std()), 1e-12)
    if inc.mean() < -3 * sigma / math.sqrt(m):
        return 0.0
    q0 = max(6.0 * sigma * math.sqrt(n), max(plan.s0, plan.r0))
    return float(min(q0, plan.buffer_bits, plan.q_max))


def _simulate(cfg: RunConfig, plan: _Plan) -> SimResult:
    run = _Runner(cfg, plan)
    mode = cfg.transient_mode if plan.warmup else "full"
    if mode == "steady":
        run.fstate[0] = _initial_queue(cfg, plan)
        run.advance(cfg.slots // 100)
        run.counters[:] = 0.0
        run.counters[K.MAX_QUEUE] = run.fstate[0]
    q_start = float(run.fstate[0])
    run.advance(cfg.slots)
    c = run.counters.copy()
    silent = c[K.SILENT] / cfg.slots
    drained = 0
    if mode == "full" and plan.allow_drain:
        drained = run.drain(limit=100 * cfg.slots + 10**6)
    c_all = run.counters
    total = cfg.slots + drained
    tau = c_all[K.DEPARTED] / total
    arrival = c_all[K.ARRIVED] / total
    mean_q = c_all[K.QUEUE_SUM] / total
    delay = mean_q / arrival if arrival > 0 else math.inf
    if plan.outage_from_throughput:
        outage = 1.0 - tau / plan.tau0
    elif plan.tau0 is not None:
        outage = silent
    else:
        outage = None
    fifo = c_all[K.FIFO_DELAY] / c_all[K.FIFO_BITS] if cfg.fifo and c_all[K.FIFO_BITS] > 0 else None
    return SimResult(
        throughput=float(tau),
        arrival_rate=float(arrival),
        mean_queue=float(mean_q),
        mean_delay=float(delay),
        outage=None if outage is None else float(outage),
        slots=cfg.slots,
        seed=cfg.seed,
        dropped_packets=int(c_all[K.DROPPED]),
        total_slots=int(total),
        silent_fraction=float(silent),
        mean_power=float(c[K.POWER] / cfg.slots),
        fifo_delay=None if fifo is None else float(fifo),
        max_queue=float(c_all[K.MAX_QUEUE]),
        initial_queue=q_start,
        final_queue=float(run.fstate[0]),
        arrived_bits=float(c_all[K.ARRIVED]),
        departed_bits=float(c_all[K.DEPARTED]),
        discarded_bits=float(c_all[K.DISCARDED]),
    )


def run_fixed(cfg: RunConfig) -> SimResult:
    if not (cfg.scheme == "fixed-optimal" or cfg.scheme in _DELAY_VARIANTS):
        raise ConfigError(f"{cfg.scheme} is not a fixed-rate adaptive scheme")
    return _simulate(cfg, _plan(cfg))


def run_mixed(cfg: RunConfig) -> SimResult:
    if cfg.scheme not in ("mixed", "mixed-pa", "mixed-delay"):
        raise ConfigError(f"{cfg.scheme} is not a mixed-rate adaptive scheme")
    return _simulate(cfg, _plan(cfg))


def run_conventional(cfg: RunConfig, scheme: str | None = None) -> SimResult:
    if scheme is not None and scheme != cfg.scheme:
        cfg = replace(cfg, scheme=scheme)
    if cfg.scheme not in _SCHEDULED | {"conv-mixed-kn"}:
        raise ConfigError(f"{cfg.scheme} is not a fixed-schedule scheme")
    return _simulate(cfg, _plan(cfg))


def simulate(cfg: RunConfig) -> SimResult:
    return _simulate(cfg, _plan(cfg))


# -- analytic companion ---------------------------------------------------------


def analyze(cfg: RunConfig) -> dict:
    """Closed-form values matching ``simulate(cfg)``, where they exist.

    Keys: ps, pr, pc, case, throughput, outage, delay (missing values are
    None).
    """
    prof = cfg.profile()
    rates = cfg.rates
    params = cfg.channel()
    out = {"ps": prof.p_s, "pr": prof.p_r, "pc": None, "case": None, "throughput": None, "outage": None, "delay": None}
    scheme = cfg.scheme
    if scheme == "fixed-optimal":
        pol = FixedRatePolicy.optimal(prof, rates)
        out.update(pc=pol.p_c, case=int(pol.case), throughput=throughput_optimal(prof, rates), outage=outage_optimal(prof, rates))
    elif scheme in _DELAY_VARIANTS:
        v = _DELAY_VARIANTS[scheme]
        pc = _delay_coin(cfg, v, prof)
        out.update(pc=pc, case=f"V{int(v)}")
        if cfg.buffer_packets is None:
            pi0, delay, tau = infinite_buffer_metrics(v, prof, pc)
            out.update(throughput=tau * rates.r0, delay=delay, outage=infinite_buffer_outage(v, prof, pc))
        else:
            m = markov_metrics(v, prof, pc, cfg.buffer_packets, rates)
            out.update(throughput=m.throughput, delay=m.mean_delay, outage=m.outage)
    elif scheme == "mixed":
        pol = mixed_policy(prof, rates, params.omega_r, params.fading)
        out.update(case=2 if pol.case2 else 1, throughput=pol.throughput)
    elif scheme == "mixed-pa":
        _require(cfg, "gamma_budget")
        pol = solve_power_allocation(prof, rates, params.gamma_s, cfg.gamma_budget, params.omega_bar_r, params.fading)
        out.update(case=2 if pol.case2 else 1, throughput=pol.throughput)
    elif scheme == "conv1-fixed":
        res = conv1_fixed(prof, rates.r0, rates.s0)
        out.update(throughput=res.throughput, outage=res.outage)
    elif scheme == "conv2-fixed":
        tau, f = conv2_fixed(prof, rates.r0)
        out.update(throughput=tau, outage=f, delay=1.0)
    elif scheme == "conv1-mixed":
        res = conv1_mixed(prof, rates.s0, params.fading.link(params.omega_r).log2_tail(0.0))
        out.update(throughput=res.throughput)
    elif scheme == "conv-mixed-kn":
        _require(cfg, "k", "n_relay")
        sched = ConvMixedSchedule(cfg.k, cfg.n_relay)
        cap = params.fading.link(params.omega_r).log2_tail(0.0)
        try:
            out.update(throughput=conv_mixed_delay(sched, prof, rates.s0, cap))
        except UnstableQueueError:
            out.update(throughput=None)
    return out


# -- tuning by simulation -----------------------------------------------------


def tune_qmax(cfg: RunConfig, target_delay: float, tune_slots: int | None = None, iters: int = 24) -> float:
    """Largest queue cap for the mixed delay heuristic whose mean delay stays at ``target_delay``.

    Every trial run reuses ``cfg.seed`` so the delay is a smooth function of
    the cap. If even a huge cap keeps the delay below the target, that cap is
    returned.

    Raises
    ------
    UnachievableDelayError
        If the delay exceeds the target already with a one-packet cap.
    """
    s0 = cfg.rates.s0
    base = replace(cfg, scheme="mixed-delay", slots=tune_slots or min(cfg.slots, 10**6))

    def delay(qmax):
        return simulate(replace(base, qmax_bits=qmax)).mean_delay

    lo, hi = s0, 4.0 * s0 * target_delay
    d_lo = delay(lo)
    if d_lo > target_delay:
        raise UnachievableDelayError(f"mean delay is {d_lo:.4g} even with a one-packet cap", nearest=d_lo)
    while delay(hi) <= target_delay:
        if hi > 1e3 * s0 * target_delay:
            return hi
        lo, hi = hi, 2.0 * hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if delay(mid) <= target_delay:
            lo = mid
        else:
            hi = mid
    return lo


def best_kn_schedule(cfg: RunConfig, target_delay: float, max_slots: int = 20, tune_slots: int | None = None) -> ConvMixedSchedule:
    """Highest-throughput k/n schedule whose simulated mean delay is at most ``target_delay``.

    Candidates with k, n <= ``max_slots`` are tried in order of decreasing
    analytic throughput. Schedules that are unstable on average, or whose
    share k/(k+n) beats the high-SNR bound 1 - 1/(2 E{T}), are skipped.
    """
    params = cfg.channel()
    cap = params.fading.link(params.omega_r).log2_tail(0.0)
    prof = cfg.profile()
    bound = 1.0 - 1.0 / (2.0 * target_delay)
    cands = [
        ConvMixedSchedule(k, n)
        for k in range(1, max_slots + 1)
        for n in range(1, max_slots + 1)
        if math.gcd(k, n) == 1 and k / (k + n) <= bound + 1e-12 and ConvMixedSchedule(k, n).is_stable(prof.p_s, cfg.rates.s0, cap)
    ]
    cands.sort(key=lambda c: (-c.k / c.period, c.period))
    base = replace(cfg, scheme="conv-mixed-kn", slots=tune_slots or min(cfg.slots, 10**6))
    for c in cands:
        if simulate(replace(base, k=c.k, n_relay=c.n)).mean_delay <= target_delay:
            return c
    raise UnachievableDelayError(f"no k/n schedule with k, n <= {max_slots} meets mean delay {target_delay}", nearest=None)


# -- sweeps -------------------------------------------------------------------

SWEEP_AXES = ("gamma_db", "gamma_budget_db", "target_delay", "qmax_bits", "buffer_packets", "s0", "r0", "rates")


def with_axis(cfg: RunConfig, axis: str, value) -> RunConfig:
    if axis == "gamma_db":
        g = db_to_linear(value)
        return replace(cfg, params=replace(cfg.params, gamma_s=g, gamma_r=g), outage=None)
    if axis == "gamma_budget_db":
        g = db_to_linear(value)
        return replace(cfg, gamma_budget=g, params=replace(cfg.params, gamma_s=g, gamma_r=g), outage=None)
    if axis == "target_delay":
        return replace(cfg, target_delay=float(value), p_c=None)
    if axis == "qmax_bits":
        return replace(cfg, qmax_bits=float(value))
    if axis == "buffer_packets":
        return replace(cfg, buffer_packets=int(value))
    if axis == "s0":
        return replace(cfg, rates=RateConfig(float(value), cfg.rates.r0))
    if axis == "r0":
        return replace(cfg, rates=RateConfig(cfg.rates.s0, float(value)))
    if axis == "rates":
        return replace(cfg, rates=RateConfig(float(value), float(value)))
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")


def _sweep_point(args):
    cfg, axis, value, simulate_it = args
    row = {"axis": axis, "value": value, "seed": cfg.seed, "n_slots": cfg.slots, "analytic": analyze(cfg), "sim": None}
    if simulate_it:
        row["sim"] = simulate(cfg).to_dict()
    return row


def sweep(base: RunConfig, axis: str, values, simulate_points: bool = True, workers: int = 1) -> list[dict]:
    """Evaluate ``base`` at every value of ``axis``.

    Point ``i`` runs with seed ``base.seed ^ i``, so results do not depend on
    the order or parallelism of execution.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    jobs = [(replace(with_axis(base, axis, v), seed=base.seed ^ i), axis, v, simulate_points) for i, v in enumerate(values)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
