"""Optimal robust prices and regime thresholds.

The outer maximization over the price has a low-regime candidate (inside
the two-point region) and high-regime candidates (inside the three-point
region); the optimum is the best candidate and the winning regime flips at
a dispersion threshold: sigma_star for the ratio objective, delta_star for
the revenue objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .ambiguity import (MarketInfo, companion_point, left_threshold,
                        power_market, require_feasible, right_threshold,
                        variance_market)
from .errors import (InfeasibleMarketError, RobustPriceError, RootFindingError)
from .ratio import (worst_case_cr, worst_case_cr_power,
                    worst_case_cr_variance, worst_case_revenue)

REGIME_LOW_PRICE = "low"
REGIME_HIGH_PRICE = "high"

_BRENTQ_XTOL = 1e-14
_BRENTQ_RTOL = 8.881784197001252e-16

# Scan resolutions: coarse for threshold bracketing, fine for root isolation.
_THRESHOLD_SCAN = 200
_ROOT_SCAN = 2001


@dataclass(frozen=True)
class PriceSolution:
    price: float
    value: float
    regime: str  # "low" or "high"
    label: str
    candidates: Tuple[Tuple[str, float, float], ...]
    threshold: Optional[float] = None


def _cbrt(x: float) -> float:
    """Real (sign-preserving) cube root."""
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _select(candidates: List[Tuple[str, float, float]], threshold=None) -> PriceSolution:
    """Pick the highest-value candidate; earlier entries win ties.

    Candidate lists are ordered low regime first, so the documented
    tie-break (prefer the low price at exact threshold equality) falls out
    of strict-inequality comparison.
    """
    if not candidates:
        raise RobustPriceError("no admissible price candidates")
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[2] > best[2]:
            best = cand
    label, price, value = best
    regime = REGIME_LOW_PRICE if label in ("p_l", "pi_l") else REGIME_HIGH_PRICE
    return PriceSolution(price=price, value=value, regime=regime, label=label,
                         candidates=tuple(candidates), threshold=threshold)


def low_price_variance(mu: float, sigma: float, compat_printed_pl: bool = False) -> float:
    """Unconstrained maximizer of the low-branch ratio (variance measure).

    The adopted radical is sqrt(8/27 + (mu/(2 sigma))**2); the printed
    variant without the square is available behind the compatibility flag
    and is known not to reproduce the reference values.
    """
    if sigma == 0.0:
        return mu
    x = mu / (2.0 * sigma)
    r = math.sqrt(8.0 / 27.0 + (x if compat_printed_pl else x * x))
    return mu - sigma * (_cbrt(x + r) + _cbrt(x - r))


def high_prices_variance(mu: float, sigma: float, beta: float) -> Tuple[float, float]:
    """The two high-regime candidates (three-point region), unclipped."""
    t2 = mu + sigma * sigma / mu
    disc = (3.0 * beta - t2) ** 2 - 4.0 * beta * beta
    p_h1 = 0.5 * (beta + t2 - math.sqrt(max(disc, 0.0)))
    return p_h1, 0.5 * t2


def _variance_cr_candidates(mu, sigma, beta, compat_printed_pl=False):
    """(label, price, value) candidates for the variance ratio objective."""
    t2 = mu + sigma * sigma / mu
    t1 = mu - sigma * sigma / (beta - mu) if math.isfinite(beta) else mu
    out = []
    if t1 > 0:
        p_l = min(low_price_variance(mu, sigma, compat_printed_pl), t1)
        out.append(("p_l", p_l, worst_case_cr_variance(mu, sigma, beta, p_l).cr))
    if math.isfinite(beta):
        p_h1, p_h2 = high_prices_variance(mu, sigma, beta)
        for label, p in (("p_h1", p_h1), ("p_h2", p_h2)):
            p = min(max(p, t1), t2)
            if p > 0:
                out.append((label, p, worst_case_cr_variance(mu, sigma, beta, p).cr))
    return out


def optimal_price_variance(mu: float, sigma: float, beta: float,
                           compat_printed_pl: bool = False,
                           with_threshold: bool = True) -> PriceSolution:
    """Price maximizing the worst-case ratio under variance knowledge."""
    market = variance_market(mu, sigma, beta)
    require_feasible(market)
    if sigma == 0.0:
        return PriceSolution(mu, 1.0, REGIME_LOW_PRICE, "p_l",
                             (("p_l", mu, 1.0),), None)
    cands = _variance_cr_candidates(mu, sigma, beta, compat_printed_pl)
    thr = None
    if with_threshold:
        thr = math.inf if not math.isfinite(beta) else sigma_star(mu, beta)
    return _select(cands, threshold=thr)


def _crossing_sigma(mu: float, beta: float, gap) -> float:
    """Root of gap(sigma) = low value - high value on (0, sigma_max)."""
    if not math.isfinite(beta):
        return math.inf
    sigma_max = math.sqrt(mu * (beta - mu))
    grid = np.linspace(1e-3 * sigma_max, sigma_max * (1.0 - 1e-9), _THRESHOLD_SCAN)
    vals = [gap(s) for s in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] > 0 >= vals[i + 1]:
            return float(brentq(gap, grid[i], grid[i + 1],
                                xtol=_BRENTQ_XTOL, rtol=_BRENTQ_RTOL))
    raise RootFindingError(
        f"no low/high value crossing on (0, {sigma_max}); "
        f"scan range [{min(vals)}, {max(vals)}]")


def sigma_star(mu: float, beta: float) -> float:
    """Dispersion threshold where the ratio objective switches regimes.

    Below it the low price wins, above it a high price wins.  Goes to
    infinity as beta does (the high regime never takes over).
    """
    def gap(sigma):
        cands = _variance_cr_candidates(mu, sigma, beta)
        low = max((v for l, _, v in cands if l == "p_l"), default=-math.inf)
        high = max((v for l, _, v in cands if l != "p_l"), default=-math.inf)
        return low - high

    return _crossing_sigma(mu, beta, gap)


def low_price_revenue_variance(mu: float, sigma: float) -> float:
    """Unconstrained maximizer of the low-branch worst-case revenue."""
    if sigma == 0.0:
        return mu
    y = mu / sigma
    r = math.sqrt(1.0 + y * y)
    return mu - sigma * (_cbrt(y + r) + _cbrt(y - r))


def high_price_revenue_variance(mu: float, sigma: float, beta: float) -> float:
    """Unconstrained maximizer of the mid-branch worst-case revenue."""
    return beta - math.sqrt(beta * (beta - mu - sigma * sigma / mu))


def _variance_rev_candidates(mu, sigma, beta):
    market = variance_market(mu, sigma, beta)
    t2 = mu + sigma * sigma / mu
    t1 = mu - sigma * sigma / (beta - mu) if math.isfinite(beta) else mu
    out = []
    if t1 > 0:
        p = min(low_price_revenue_variance(mu, sigma), t1)
        out.append(("pi_l", p, worst_case_revenue(market, p)))
    if math.isfinite(beta):
        p = min(max(high_price_revenue_variance(mu, sigma, beta), t1), t2)
        if p > 0:
            out.append(("pi_h", p, worst_case_revenue(market, p)))
    return out


def optimal_price_revenue_variance(mu: float, sigma: float, beta: float,
                                   with_threshold: bool = True) -> PriceSolution:
    """Price maximizing the worst-case revenue under variance knowledge."""
    market = variance_market(mu, sigma, beta)
    require_feasible(market)
    if sigma == 0.0:
        return PriceSolution(mu, mu, REGIME_LOW_PRICE, "pi_l",
                             (("pi_l", mu, mu),), None)
    cands = _variance_rev_candidates(mu, sigma, beta)
    thr = None
    if with_threshold:
        thr = math.inf if not math.isfinite(beta) else delta_star(mu, beta)
    return _select(cands, threshold=thr)


def delta_star(mu: float, beta: float) -> float:
    """Dispersion threshold where the revenue objective switches regimes.

    Defined operationally as the sigma where the low and high revenue
    candidates' worst-case revenues cross.
    """
    def gap(sigma):
        cands = _variance_rev_candidates(mu, sigma, beta)
        low = max((v for l, _, v in cands if l == "pi_l"), default=-math.inf)
        high = max((v for l, _, v in cands if l != "pi_l"), default=-math.inf)
        return low - high

    return _crossing_sigma(mu, beta, gap)


def _scan_roots(f, lo: float, hi: float, n: int = _ROOT_SCAN) -> List[float]:
    """All sign-change roots of f on [lo, hi] found on an n-point scan."""
    grid = np.linspace(lo, hi, n)
    vals = np.array([f(x) for x in grid])
    roots = []
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(float(brentq(f, grid[i], grid[i + 1],
                                      xtol=_BRENTQ_XTOL, rtol=_BRENTQ_RTOL)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def optimal_price_power(mu: float, s: float, q: float, beta: float) -> PriceSolution:
    """Price maximizing the worst-case ratio under fractional-moment knowledge.

    Four candidates: two low-regime roots (clipped by the left threshold)
    and two high-regime points (clipped into the three-point region); the
    optimum is the better of the clipped low and high candidates.
    """
    market = power_market(mu, s, q, beta)
    require_feasible(market)
    if market.is_degenerate:
        return PriceSolution(mu, 1.0, REGIME_LOW_PRICE, "p_l",
                             (("p_l", mu, 1.0),), None)
    t1 = left_threshold(market)
    t2 = right_threshold(market)
    eps = 1e-9 * mu

    def alpha(p):
        return companion_point(market, p)

    def bar_pl_resid(p):
        a = alpha(p)
        return p - (a - math.sqrt(a * (a - mu)))

    def hat_pl_resid(p):
        a = alpha(p)
        return (a ** q - p ** q) / (a - p) - q * s / mu

    bar_pl_roots = _scan_roots(bar_pl_resid, eps, mu * (1.0 - 1e-7))
    hat_pl_roots = _scan_roots(hat_pl_resid, eps, mu * (1.0 - 1e-7))
    raw = []
    low_parts = [t1]
    if bar_pl_roots:
        raw.append(("bar_p_l", bar_pl_roots[0]))  # left-most
        low_parts.append(bar_pl_roots[0])
    if hat_pl_roots:
        raw.append(("hat_p_l", hat_pl_roots[0]))
        low_parts.append(hat_pl_roots[0])

    cands = []
    if t1 > 0:
        p_low = min(low_parts)
        cands.append(("p_l", p_low, worst_case_cr_power(mu, s, q, beta, p_low).cr))

    hat_ph = (s / (q * mu)) ** (1.0 / (q - 1.0))
    raw.append(("hat_p_h", hat_ph))
    if math.isfinite(beta):
        def bar_ph_resid(p):
            return (beta ** q - p ** q + beta * p ** (q - 1.0)) / (2.0 * beta - p) - s / mu

        bar_ph_roots = _scan_roots(bar_ph_resid, eps, t2)
        high_parts = [t1, hat_ph]
        if bar_ph_roots:
            raw.append(("bar_p_h", bar_ph_roots[-1]))  # right-most
            high_parts.append(bar_ph_roots[-1])
        p_high = min(max(high_parts), t2)
        if p_high > 0:
            cands.append(("p_h", p_high, worst_case_cr_power(mu, s, q, beta, p_high).cr))

    # Raw candidate values are reported at their in-range clip for audit.
    for label, p in raw:
        pc = min(max(p, eps), t2)
        cands.append((label, pc, worst_case_cr_power(mu, s, q, beta, pc).cr))
    return _select(cands[:2] + sorted(cands[2:], key=lambda c: c[0]))


def optimal_price_general(market: MarketInfo, tol: float = 1e-8,
                          objective: str = "cr") -> PriceSolution:
    """Scan-plus-refine maximizer of the worst-case ratio (or revenue).

    Fallback path for custom dispersion measures: a fine scan on each
    regime branch seeds a bounded scalar search; accuracy is claimed only
    up to the scan resolution for multi-modal objectives.
    """
    require_feasible(market)
    if objective not in ("cr", "rev"):
        raise RobustPriceError(f"objective must be 'cr' or 'rev', got {objective!r}")
    mu = market.mu
    if market.is_degenerate:
        val = 1.0 if objective == "cr" else mu
        return PriceSolution(mu, val, REGIME_LOW_PRICE, "p_l",
                             (("p_l", mu, val),), None)

    def f(p):
        if objective == "cr":
            return worst_case_cr(market, p).cr
        return worst_case_revenue(market, p)

    t1 = left_threshold(market)
    t2 = right_threshold(market)
    if not math.isfinite(market.beta):
        t2 = mu  # beyond the low regime the objective is 0 when beta is infinite
    segments = []
    if t1 > 0:
        segments.append(("p_l", 1e-9 * mu, t1))
    if t2 > t1:
        segments.append(("p_h", t1 if t1 > 0 else 1e-9 * mu, t2))
    cands = []
    for label, lo, hi in segments:
        grid = np.linspace(lo, hi, _ROOT_SCAN)
        vals = np.array([f(p) for p in grid])
        i = int(np.argmax(vals))
        blo, bhi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(lambda p: -f(p), bounds=(blo, bhi), method="bounded",
                              options={"xatol": tol})
        p_best, v_best = float(res.x), float(-res.fun)
        if vals[i] > v_best:
            p_best, v_best = float(grid[i]), float(vals[i])
        cands.append((label, p_best, v_best))
    return _select(cands)


@dataclass(frozen=True)
class OrderingReport:
    """Low/high price orderings between the revenue and ratio optima."""

    pi_l: float
    p_l: float
    pi_h: float
    p_h: float
    sigma: float
    sigma_star: float
    delta_star: float
    low_ordering_applies: bool
    low_ordering_holds: bool
    high_ordering_applies: bool
    high_ordering_holds: bool


def compare_prices(mu: float, sigma: float, beta: float) -> OrderingReport:
    """Report the four candidate prices and the predicted orderings.

    Predicted: the revenue-optimal low price sits below the ratio-optimal
    low price when sigma is below both thresholds, and the revenue-optimal
    high price sits above the ratio-optimal high price when sigma is above
    both.
    """
    if not math.isfinite(beta):
        raise RobustPriceError("price comparison needs a finite maximum valuation")
    market = variance_market(mu, sigma, beta)
    require_feasible(market)
    t2 = mu + sigma * sigma / mu
    t1 = mu - sigma * sigma / (beta - mu)
    if sigma == 0.0:
        return OrderingReport(mu, mu, mu, mu, sigma, sigma_star(mu, beta),
                              delta_star(mu, beta), False, True, False, True)
    pi_l = min(low_price_revenue_variance(mu, sigma), t1)
    p_l = min(low_price_variance(mu, sigma), t1)
    pi_h = min(max(high_price_revenue_variance(mu, sigma, beta), t1), t2)
    p_h1, p_h2 = high_prices_variance(mu, sigma, beta)
    cr_at = lambda p: worst_case_cr_variance(mu, sigma, beta, p).cr
    p_h1c = min(max(p_h1, t1), t2)
    p_h2c = min(max(p_h2, t1), t2)
    p_h = p_h1c if cr_at(p_h1c) >= cr_at(p_h2c) else p_h2c
    ss = sigma_star(mu, beta)
    ds = delta_star(mu, beta)
    low_applies = sigma <= min(ss, ds) and t1 > 0
    high_applies = sigma >= max(ss, ds)
    return OrderingReport(
        pi_l=pi_l, p_l=p_l, pi_h=pi_h, p_h=p_h, sigma=sigma,
        sigma_star=ss, delta_star=ds,
        low_ordering_applies=low_applies,
        low_ordering_holds=pi_l < p_l,
        high_ordering_applies=high_applies,
        high_ordering_holds=pi_h > p_h,
    )
