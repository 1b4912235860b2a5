"""Worst-case competitive ratio and worst-case revenue at a fixed price.

The worst-case ratio decomposes as the minimum of two branches: the ratio
of the worst-case to the best-case conversion rate, and the price over the
best-case conditional expectation.  Closed-form specializations are
provided for the variance and fractional-moment measures and for the
mean/maximum-only information set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ambiguity import (MODE_EXACT, MODE_UPPER, MarketInfo, companion_point,
                        left_threshold, power_market, require_feasible,
                        right_threshold, variance_market)
from .bounds import (REGIME_HIGH, REGIME_LOW, REGIME_MID, cond_exp_max,
                     tail_prob_max, tail_prob_min)
from .errors import (InfeasibleMarketError, InternalConsistencyError,
                     ModeError, RobustPriceError)

BRANCH_TAIL = "tail_ratio"
BRANCH_PRICE = "price_over_cond_exp"
BRANCH_DEGENERATE = "degenerate"

_BOUNDARY_AGREE = 1e-9


@dataclass(frozen=True)
class RatioBreakdown:
    p: float
    cr: float
    branch: str
    tail_ratio: float
    price_over_y: float
    regime: str


def _breakdown(p: float, tail_ratio: float, poy: float, regime: str) -> RatioBreakdown:
    if regime == REGIME_HIGH:
        return RatioBreakdown(p, 0.0, BRANCH_DEGENERATE, tail_ratio, poy, regime)
    # Branch ties are labeled as the tail branch for deterministic output.
    if tail_ratio <= poy:
        return RatioBreakdown(p, tail_ratio, BRANCH_TAIL, tail_ratio, poy, regime)
    return RatioBreakdown(p, poy, BRANCH_PRICE, tail_ratio, poy, regime)


def worst_case_cr(market: MarketInfo, p: float) -> RatioBreakdown:
    """Tight lower bound on the competitive ratio at price p (general measure)."""
    if market.mode != MODE_EXACT:
        raise ModeError("worst_case_cr requires mode='exact'")
    require_feasible(market)
    if not 0 < p <= market.beta:
        raise RobustPriceError(f"price {p} outside (0, {market.beta}]")
    if market.is_degenerate:
        mu = market.mu
        if p <= mu:
            return _breakdown(p, 1.0, p / mu, REGIME_LOW if p < mu else REGIME_MID)
        return _breakdown(p, 1.0, p / mu, REGIME_HIGH)
    t2 = right_threshold(market)
    if p > t2 * (1.0 + 1e-12):
        return _breakdown(p, 0.0, 0.0, REGIME_HIGH)
    p = min(p, t2)
    if not math.isfinite(market.beta) and p >= market.mu:
        # Unbounded valuations: the best-case conditional expectation is
        # unbounded beyond the low regime, so the ratio collapses to 0.
        return _breakdown(p, 0.0, 0.0, REGIME_MID)
    lo = tail_prob_min(market, p)
    hi = tail_prob_max(market, p)
    y = cond_exp_max(market, p)
    tail_ratio = lo / hi if hi > 0 else 0.0
    poy = p / y if math.isfinite(y) else 0.0
    t1 = left_threshold(market)
    regime = REGIME_LOW if p <= t1 else REGIME_MID
    return _breakdown(p, tail_ratio, poy, regime)


def _piecewise_pair(p, t1, t2, low, mid, scale):
    """Evaluate (tail_ratio, price_branch, regime) for the closed forms.

    ``low`` and ``mid`` return (tail_ratio, price_branch) pairs; at the
    left-threshold boundary both are evaluated, averaged, and must agree.
    """
    band = 1e-12 * max(1.0, scale)
    if t1 > 0 and abs(p - t1) <= band:
        a = low(p)
        b = mid(p)
        # Individual branch components can lose precision to cancellation
        # right at the threshold; only the resulting minimum must agree.
        if abs(min(a) - min(b)) > _BOUNDARY_AGREE:
            raise InternalConsistencyError(
                f"closed-form branches disagree at the left threshold: {a} vs {b}")
        if all(abs(x - y) <= _BOUNDARY_AGREE for x, y in zip(a, b) if min(x, y) < math.inf):
            tr = 0.5 * (a[0] + b[0]) if max(a[0], b[0]) < math.inf else min(a[0], b[0])
            return tr, 0.5 * (a[1] + b[1]), REGIME_LOW
        return a[0], a[1], REGIME_LOW
    if p <= t1:
        tr, pb = low(p)
        return tr, pb, REGIME_LOW
    if p <= t2 * (1.0 + band):
        tr, pb = mid(min(p, t2))
        return tr, pb, REGIME_MID
    return 0.0, 0.0, REGIME_HIGH


def worst_case_cr_variance(mu: float, sigma: float, beta: float, p: float) -> RatioBreakdown:
    """Closed-form worst-case ratio for mean/variance/maximum knowledge."""
    if sigma < 0:
        raise RobustPriceError(f"sigma must be nonnegative, got {sigma}")
    s2 = sigma * sigma
    if math.isfinite(beta) and s2 > mu * (beta - mu) * (1.0 + 1e-12):
        raise InfeasibleMarketError(
            f"sigma^2={s2} exceeds the maximum mu(beta-mu)={mu * (beta - mu)}")
    if not 0 < p <= beta:
        raise RobustPriceError(f"price {p} outside (0, {beta}]")
    if sigma == 0.0:
        if p <= mu:
            return _breakdown(p, 1.0, p / mu, REGIME_LOW if p < mu else REGIME_MID)
        return _breakdown(p, 0.0, 0.0, REGIME_HIGH)
    t2 = mu + s2 / mu
    t1 = mu - s2 / (beta - mu) if math.isfinite(beta) else mu

    def low(p):
        d = mu - p
        return d * d / (d * d + s2), p * d / (mu * d + s2)

    def mid(p):
        if not math.isfinite(beta):
            return 0.0, 0.0
        num = p * (mu * mu + s2 - p * mu)
        den = (beta - p) * (mu * (beta + p - mu) - s2)
        if abs(den) <= 1e-14 * max(1.0, beta ** 3):
            # 0/0 only at p = beta in the maximal-dispersion market, where
            # the tail branch is identically 1 and the price branch governs.
            return (math.inf if abs(num) <= 1e-12 * max(1.0, beta ** 2) else 0.0), p / beta
        return num / den, p / beta

    tr, pb, regime = _piecewise_pair(p, t1, t2, low, mid, beta if math.isfinite(beta) else mu)
    tr = min(tr, 1.0)
    return _breakdown(p, tr, pb, regime)


def worst_case_cr_power(mu: float, s: float, q: float, beta: float, p: float) -> RatioBreakdown:
    """Closed-form worst-case ratio for the fractional-moment measure x**q."""
    if not q > 1:
        raise RobustPriceError(f"moment exponent must exceed 1, got {q}")
    market = power_market(mu, s, q, beta)
    require_feasible(market)
    if not 0 < p <= beta:
        raise RobustPriceError(f"price {p} outside (0, {beta}]")
    if market.is_degenerate:
        if p <= mu:
            return _breakdown(p, 1.0, p / mu, REGIME_LOW if p < mu else REGIME_MID)
        return _breakdown(p, 0.0, 0.0, REGIME_HIGH)
    t2 = (s / mu) ** (1.0 / (q - 1.0))
    t1 = left_threshold(market)

    def low(p):
        a = companion_point(market, p)
        return (mu - p) / (a - p), p / a

    def mid(p):
        if not math.isfinite(beta):
            return 0.0, 0.0
        num = p * s - mu * p ** q
        den = mu * (beta ** q - p ** q) - s * (beta - p)
        if abs(den) <= 1e-14 * max(1.0, beta ** (q + 1)):
            return (math.inf if abs(num) <= 1e-12 * max(1.0, beta ** q) else 0.0), p / beta
        return num / den, p / beta

    tr, pb, regime = _piecewise_pair(p, t1, t2, low, mid, beta if math.isfinite(beta) else mu)
    tr = min(tr, 1.0)
    return _breakdown(p, tr, pb, regime)


def worst_case_cr_mean_range(mu: float, beta: float, p: float) -> float:
    """Worst-case ratio with mean and maximum knowledge only."""
    if not 0 < p <= beta:
        raise RobustPriceError(f"price {p} outside (0, {beta}]")
    if p >= mu:
        return 0.0
    return min((mu - p) / (beta - p), p / beta)


def worst_case_cr_dispersion_ub(market: MarketInfo, p: float) -> float:
    """Worst-case ratio when the dispersion statistic is an upper bound."""
    if market.mode != MODE_UPPER:
        raise ModeError("upper-bound ratio requires mode='upper'")
    require_feasible(market)
    if not 0 < p <= market.beta:
        raise RobustPriceError(f"price {p} outside (0, {market.beta}]")
    if market.is_degenerate:
        return p / market.mu if p <= market.mu else 0.0
    mu = market.mu
    if p >= mu:
        return 0.0
    t1 = left_threshold(market)
    if p <= t1:
        a = companion_point(market, p)
        return min((mu - p) / (a - p), p / a)
    return worst_case_cr_mean_range(mu, market.beta, p)


def worst_case_revenue(market: MarketInfo, p: float) -> float:
    """Worst-case revenue p * inf P(X >= p); zero above the right threshold."""
    if not 0 < p <= market.beta:
        raise RobustPriceError(f"price {p} outside (0, {market.beta}]")
    if market.is_degenerate:
        return p if p <= market.mu else 0.0
    if not math.isfinite(market.beta):
        if p < market.mu:
            return p * tail_prob_min(market, p)
        return 0.0
    return p * tail_prob_min(market, p)
