"""Block-fading source-relay and relay-destination links.

Channel gains are i.i.d. from slot to slot. Every slot consumes three
uniforms from the run's generator, in the order (S-R gain, R-D gain, coin),
whether or not the policy uses the coin, so a seed fixes the channel
realisation independently of the policy under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .numerics import exp_integral_e1, exp_scaled_e1

LN2 = math.log(2.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


class RayleighFading:
    """Unit-mean exponential power gain (Rayleigh amplitude)."""

    name = "rayleigh"

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float))

    def cdf(self, x):
        return -np.expm1(-np.asarray(x, dtype=float))

    def pdf(self, x):
        return np.exp(-np.asarray(x, dtype=float))

    def link(self, mean: float) -> "RayleighLink":
        return RayleighLink(mean)

    def __eq__(self, other):
        return type(other) is type(self)

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "RayleighFading()"


class NakagamiFading:
    """Unit-mean gamma-distributed power gain with shape ``m``.

    ``m = 1`` coincides with Rayleigh. Closed forms are not available here,
    so link integrals go through quadrature.
    """

    def __init__(self, m: float):
        from scipy import stats

        if not m >= 0.5:
            raise ValueError("Nakagami shape must be >= 0.5")
        self.m = float(m)
        self._dist = stats.gamma(a=self.m, scale=1.0 / self.m)
        self.name = f"nakagami-{self.m:g}"

    def ppf(self, u):
        return self._dist.ppf(u)

    def cdf(self, x):
        return self._dist.cdf(x)

    def pdf(self, x):
        return self._dist.pdf(x)

    def link(self, mean: float) -> "QuadratureLink":
        return QuadratureLink(self, mean)

    def __eq__(self, other):
        return isinstance(other, NakagamiFading) and other.m == self.m

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"NakagamiFading(m={self.m:g})"


RAYLEIGH = RayleighFading()


@dataclass(frozen=True)
class RateConfig:
    """Fixed source rate ``s0`` and relay rate ``r0`` in bits per slot."""

    s0: float
    r0: float

    def __post_init__(self):
        if not (self.s0 > 0 and self.r0 > 0):
            raise ValueError("rates must be positive")

    @property
    def s_threshold(self) -> float:
        return 2.0**self.s0 - 1.0

    @property
    def r_threshold(self) -> float:
        return 2.0**self.r0 - 1.0

    @property
    def tau0(self) -> float:
        """Throughput with both links permanently out of outage."""
        return self.s0 * self.r0 / (self.s0 + self.r0)


@dataclass(frozen=True)
class OutageProfile:
    p_s: float
    p_r: float

    def __post_init__(self):
        for v in (self.p_s, self.p_r):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"outage probability {v} outside [0, 1]")


@dataclass(frozen=True)
class ChannelParams:
    """Average gains and transmit SNRs of the two links.

    Mean received SNRs are ``omega_s = gamma_s * omega_bar_s`` and
    ``omega_r = gamma_r * omega_bar_r``. Infinite means are allowed and model
    a link that is never in outage.
    """

    omega_bar_s: float = 1.0
    omega_bar_r: float = 1.0
    gamma_s: float = 1.0
    gamma_r: float = 1.0
    fading: object = field(default=RAYLEIGH, compare=True)

    def __post_init__(self):
        for name in ("omega_bar_s", "omega_bar_r", "gamma_s", "gamma_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def omega_s(self) -> float:
        return self.gamma_s * self.omega_bar_s

    @property
    def omega_r(self) -> float:
        return self.gamma_r * self.omega_bar_r

    @classmethod
    def from_gamma_db(cls, gamma_db: float, omega_bar_s: float = 1.0, omega_bar_r: float = 1.0, fading=RAYLEIGH):
        g = db_to_linear(gamma_db)
        return cls(omega_bar_s, omega_bar_r, g, g, fading)

    @classmethod
    def from_outage(cls, prof: OutageProfile, rates: RateConfig) -> "ChannelParams":
        """Rayleigh links whose outage probabilities at ``rates`` equal ``prof``."""

        def mean_for(p, thr):
            if p == 0.0:
                return math.inf
            if p == 1.0:
                return 1e-300
            return thr / -math.log1p(-p)

        return cls(mean_for(prof.p_s, rates.s_threshold), mean_for(prof.p_r, rates.r_threshold), 1.0, 1.0)


@dataclass(frozen=True)
class SlotDraw:
    s: float
    r: float
    o_s: int
    o_r: int


@dataclass
class SlotBlock:
    """Vectorised draws for ``n`` consecutive slots."""

    h_s: np.ndarray
    h_r: np.ndarray
    s: np.ndarray
    r: np.ndarray
    o_s: np.ndarray
    o_r: np.ndarray
    coin_u: np.ndarray

    def __len__(self):
        return len(self.s)


def _scaled(gain_unit, mean):
    if math.isinf(mean):
        return np.full(gain_unit.shape, math.inf)
    return gain_unit * mean


def draw_slots(params: ChannelParams, rates: RateConfig, rng: np.random.Generator, n: int) -> SlotBlock:
    u = rng.random((n, 3))
    fading = params.fading
    h_s = _scaled(fading.ppf(u[:, 0]), params.omega_bar_s)
    h_r = _scaled(fading.ppf(u[:, 1]), params.omega_bar_r)
    s = h_s * params.gamma_s
    r = h_r * params.gamma_r
    return SlotBlock(
        h_s=h_s,
        h_r=h_r,
        s=s,
        r=r,
        o_s=s >= rates.s_threshold,
        o_r=r >= rates.r_threshold,
        coin_u=u[:, 2],
    )


def draw_slot(params: ChannelParams, rates: RateConfig, rng: np.random.Generator) -> SlotDraw:
    b = draw_slots(params, rates, rng, 1)
    return SlotDraw(float(b.s[0]), float(b.r[0]), int(b.o_s[0]), int(b.o_r[0]))


def outage_indicator(snr: float, rate: float) -> int:
    return int(snr >= 2.0**rate - 1.0)


def rayleigh_outage_probs(params: ChannelParams, rates: RateConfig) -> OutageProfile:
    def p(thr, mean):
        if math.isinf(mean):
            return 0.0
        return float(-math.expm1(-thr / mean))

    return OutageProfile(p(rates.s_threshold, params.omega_s), p(rates.r_threshold, params.omega_r))


def outage_probs(params: ChannelParams, rates: RateConfig) -> OutageProfile:
    """Outage probabilities for any fading law carried by ``params``."""
    if isinstance(params.fading, RayleighFading):
        return rayleigh_outage_probs(params, rates)

    def p(thr, mean):
        if math.isinf(mean):
            return 0.0
        return float(params.fading.cdf(thr / mean))

    return OutageProfile(p(rates.s_threshold, params.omega_s), p(rates.r_threshold, params.omega_r))


def mean_log_capacity(omega_r: float) -> float:
    """E{log2(1 + r)} for exponentially distributed r with mean ``omega_r``."""
    if not omega_r > 0:
        raise ValueError("mean SNR must be positive")
    return exp_scaled_e1(1.0 / omega_r) / LN2


def _scaled_e1(a: float, c: float) -> float:
    """exp(c) * E1(a) for c <= a without intermediate overflow."""
    return math.exp(c - a) * exp_scaled_e1(a)


class RayleighLink:
    """Tail integrals of an exponential variable with mean ``mean``.

    The same object serves the SNR of a fixed-power link (where the variable
    is r) and the channel gain of a power-controlled link (where it is h).
    """

    def __init__(self, mean: float):
        if not mean > 0:
            raise ValueError("mean must be positive")
        self.mean = float(mean)

    def cdf(self, x: float) -> float:
        return float(-math.expm1(-x / self.mean))

    def sf(self, x: float) -> float:
        return math.exp(-x / self.mean)

    def log2_tail(self, t: float) -> float:
        """Integral of log2(1+x) f(x) over x >= t."""
        w = self.mean
        if t <= 0:
            return mean_log_capacity(w)
        e1 = _scaled_e1((1.0 + t) / w, 1.0 / w)
        return (e1 + math.exp(-t / w) * math.log1p(t)) / LN2

    def waterfill_tail(self, a: float, lam: float) -> float:
        """Integral of (1/lam - 1/h) f(h) over h >= a."""
        w = self.mean
        if math.isinf(a):
            return 0.0
        return math.exp(-a / w) / lam - exp_integral_e1(a / w) / w

    def log2_ratio_tail(self, a: float, lam: float) -> float:
        """Integral of log2(h/lam) f(h) over h >= a."""
        w = self.mean
        if math.isinf(a):
            return 0.0
        return (math.exp(-a / w) * math.log(a / lam) + exp_integral_e1(a / w)) / LN2


class QuadratureLink:
    """Same interface as RayleighLink for any fading law, via quadrature."""

    def __init__(self, fading, mean: float):
        self.fading = fading
        self.mean = float(mean)

    def _pdf(self, x):
        return float(self.fading.pdf(x / self.mean)) / self.mean

    def cdf(self, x: float) -> float:
        return float(self.fading.cdf(x / self.mean))

    def sf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def _tail(self, g, a):
        # split at the mean so quad sees the bulk of the mass
        pts = sorted({a, max(a, self.mean), max(a, 10 * self.mean)})
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            if hi > lo:
                total += integrate.quad(lambda x: g(x) * self._pdf(x), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        total += integrate.quad(lambda x: g(x) * self._pdf(x), pts[-1], math.inf, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        return total

    def log2_tail(self, t: float) -> float:
        return self._tail(lambda x: math.log2(1.0 + x), max(t, 0.0))

    def waterfill_tail(self, a: float, lam: float) -> float:
        if math.isinf(a):
            return 0.0
        return self._tail(lambda h: 1.0 / lam - 1.0 / h, a)

    def log2_ratio_tail(self, a: float, lam: float) -> float:
        if math.isinf(a):
            return 0.0
        return self._tail(lambda h: math.log2(h / lam), a)
