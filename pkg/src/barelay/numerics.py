"""Special functions and small solvers used by the closed-form analysis.

Nothing here knows about relays. The exponential integral and the principal
Lambert W branch are written out directly so that the analysis does not
depend on which special-function library happens to be installed; the tests
check both against scipy and against quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DomainError,
    MaxIterationsError,
    NoSignChangeError,
    SingularChainError,
)

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_SOLVER = SolverConfig()


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series below 1, modified Lentz continued fraction above.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"E1 is defined for x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    if x < 1.0:
        return _e1_series(x)
    return _e1_scaled_cf(x) * math.exp(-x)


def exp_scaled_e1(x: float) -> float:
    """exp(x) * E1(x), finite for arbitrarily large x."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"E1 is defined for x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_cf(x)


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_scaled_cf(x: float) -> float:
    # E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def lambert_w0(x: float, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """Principal branch of the Lambert W function on [-1/e, inf).

    Halley iteration from a branch-point series near -1/e, a log-based
    guess for large x, and w ~ x otherwise.
    """
    x = float(x)
    branch = -math.exp(-1.0)
    if x < branch:
        # tolerate rounding of -exp(-1) computed elsewhere
        if x >= branch - 4 * np.finfo(float).eps:
            return -1.0
        raise DomainError(f"W0 is defined for x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x == branch:
        return -1.0
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(cfg.max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new < -1.0:
            w_new = -1.0
        if abs(w_new - w) <= 4e-16 * max(1.0, abs(w_new)):
            w = w_new
            break
        w = w_new
    return w


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """Root of a scalar function with a sign change on [lo, hi].

    Stops when |f(x)| < abs_tol, when the bracket is narrower than
    rel_tol * |x| (or abs_tol near zero), or when the bracket can no longer
    shrink in floating point.

    Raises
    ------
    NoSignChangeError
        If f(lo) and f(hi) have the same strict sign.
    MaxIterationsError
        If max_iter halvings do not reach a stopping condition.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChangeError("no sign change on bracket", lo=lo, hi=hi, f_lo=flo, f_hi=fhi)
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= min(lo, hi) or mid >= max(lo, hi):
            # bracket is down to adjacent floats
            return mid
        fmid = f(mid)
        if fmid == 0 or abs(fmid) < cfg.abs_tol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        width = hi - lo
        if abs(width) <= cfg.rel_tol * abs(mid) or abs(width) <= cfg.abs_tol * 1e-3:
            return 0.5 * (lo + hi)
    raise MaxIterationsError("bisection did not converge", lo=lo, hi=hi, f_lo=flo, f_hi=fhi)


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grow: float = 2.0,
    limit: float = math.inf,
    max_steps: int = 200,
) -> tuple[float, float]:
    """Move ``hi`` outwards by a factor ``grow`` until f changes sign.

    Returns the bracket. Raises NoSignChangeError if ``limit`` or
    ``max_steps`` is reached first.
    """
    flo = f(lo)
    x = hi
    for _ in range(max_steps):
        fx = f(x)
        if np.sign(fx) != np.sign(flo) or fx == 0:
            return lo, x
        if x >= limit:
            break
        lo, flo = x, fx
        x = min(x * grow, limit)
    raise NoSignChangeError("bracket expansion failed", lo=lo, hi=x)


def bisect_log_decreasing(f: Callable[[float], float], x0: float, step: float = 5.0) -> float:
    """Root of a decreasing function of a positive variable.

    Works on ln(x): the bracket grows from ``x0`` by factors of e^step in
    each direction until f changes sign, then bisects down to adjacent
    floats. Suited to water levels, which span many decades.
    """
    g = lambda u: f(math.exp(u))
    a = b = math.log(x0)
    for _ in range(200):
        if g(a) > 0:
            break
        a -= step
    for _ in range(200):
        if g(b) < 0:
            break
        b += step
    return math.exp(bisect(g, a, b, SolverConfig(rel_tol=1e-15, abs_tol=1e-300, max_iter=400)))


def stationary_distribution(M, tol: float = 1e-10) -> np.ndarray:
    """Stationary vector pi with pi M = pi and sum(pi) = 1.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Row-stochastic transition matrix.
    tol : float
        Tolerance for row sums and for the fixed-point residual.

    Raises
    ------
    SingularChainError
        If the chain has more than one stationary distribution (reducible
        with several closed classes) or the linear solve fails.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("transition matrix must be square")
    if np.any(M < -tol) or np.any(M > 1 + tol):
        raise ValueError("transition probabilities must lie in [0, 1]")
    if np.max(np.abs(M.sum(axis=1) - 1.0)) > tol:
        raise ValueError("rows of the transition matrix must sum to 1")
    n = M.shape[0]
    A = M.T - np.eye(n)
    if n > 1 and np.linalg.matrix_rank(A, tol=1e-12) < n - 1:
        raise SingularChainError("chain has several stationary distributions", dim=n)
    # replace one balance equation by the normalisation
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularChainError(f"linear solve failed: {exc}", dim=n) from None
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    residual = np.max(np.abs(pi @ M - pi))
    if np.any(pi < -tol) or residual > tol:
        raise SingularChainError("stationary solve is inaccurate", residual=residual)
    return np.clip(pi, 0.0, None) / np.sum(np.clip(pi, 0.0, None))
