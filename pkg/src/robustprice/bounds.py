"""Tight tail-probability and conditional-expectation bounds.

Three key quantities drive everything downstream: the best-case conversion
rate (sup of the tail probability over the market), the worst-case
conversion rate (inf of the tail probability), and the best-case
conditional expectation of the valuation above the price.  Each is
piecewise in the price with the support thresholds as regime boundaries,
and each piece is attained by a two- or three-point member of the market.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ambiguity import (MODE_EXACT, MODE_UPPER, MarketInfo, companion_point,
                        left_threshold, right_threshold)
from .errors import (InternalConsistencyError, ModeError, RobustPriceError,
                     UnboundedSupportError)
from .extremal import three_point_masses

REGIME_LOW = "low_two_point"
REGIME_MID = "mid_three_point"
REGIME_HIGH = "above_right_threshold"

# Half-width of the boundary band (relative): inside it both adjacent
# branch formulas are evaluated and must agree, since continuity at the
# thresholds is a theorem.
_BAND = 1e-12
_BOUNDARY_AGREE = 1e-9


@dataclass(frozen=True)
class TailBounds:
    p: float
    inf_tail: float
    sup_tail: float
    sup_cond_exp: float
    best_case_rev: float
    regime: str


def _check_price(market: MarketInfo, p: float) -> None:
    if not p > 0:
        raise RobustPriceError(f"price must be positive, got {p}")
    if p > market.beta:
        raise RobustPriceError(f"price {p} exceeds maximum valuation {market.beta}")


def _scale(market: MarketInfo) -> float:
    return market.beta if math.isfinite(market.beta) else max(1.0, market.mu)


def _dispatch(market: MarketInfo, p: float, low, mid, high) -> float:
    """Evaluate the piecewise value with a consistency check at boundaries."""
    t1 = left_threshold(market)
    t2 = right_threshold(market)
    band = _BAND * max(1.0, _scale(market))

    def agree(a, b, where):
        if abs(a - b) > _BOUNDARY_AGREE:
            raise InternalConsistencyError(
                f"branch formulas disagree at {where}: {a} vs {b}")
        return 0.5 * (a + b)

    if abs(p - t1) <= band and t1 > 0:
        return agree(low(p), mid(p), f"left threshold {t1}")
    if abs(p - t2) <= band:
        return agree(mid(p), high(p), f"right threshold {t2}")
    if p < t1:
        return low(p)
    if p < t2:
        return mid(p)
    return high(p)


def _singleton_extreme(market: MarketInfo) -> bool:
    """True when dispersion is maximal on [0, beta]: the market is the
    single two-point distribution {0, beta}."""
    if not math.isfinite(market.beta):
        return False
    t2 = right_threshold(market)
    return t2 >= market.beta * (1.0 - 1e-12)


def _mid_masses(market: MarketInfo, p: float):
    # At p = beta the three-point system degenerates; only reachable in the
    # maximal-dispersion case, where the market is the {0, beta} two-point.
    if p >= market.beta * (1.0 - 1e-15) and _singleton_extreme(market):
        return 1.0 - market.mu / market.beta, 0.0, market.mu / market.beta
    return three_point_masses(market, p)


def tail_prob_max(market: MarketInfo, p: float) -> float:
    """Best-case conversion rate sup P(X >= p) over the market."""
    _check_price(market, p)
    if market.is_degenerate:
        return 1.0 if p <= market.mu else 0.0
    if not math.isfinite(market.beta):
        if p < market.mu:
            return 1.0
        if p >= right_threshold(market):
            a = companion_point(market, p)
            return (a - market.mu) / (a - p)
        raise UnboundedSupportError(
            "three-point regime needs a finite maximum valuation")

    def low(p):
        return 1.0

    def mid(p):
        _, wp, wb = _mid_masses(market, p)
        return wp + wb

    def high(p):
        a = companion_point(market, p)
        return (a - market.mu) / (a - p)

    return _dispatch(market, p, low, mid, high)


def tail_prob_min(market: MarketInfo, p: float) -> float:
    """Worst-case conversion rate inf P(X >= p) over the market."""
    _check_price(market, p)
    if market.is_degenerate:
        return 1.0 if p <= market.mu else 0.0
    if not math.isfinite(market.beta):
        if p < market.mu:
            a = companion_point(market, p)
            return (market.mu - p) / (a - p)
        if p >= right_threshold(market):
            return 0.0
        raise UnboundedSupportError(
            "three-point regime needs a finite maximum valuation")

    def low(p):
        a = companion_point(market, p)
        return (market.mu - p) / (a - p)

    def mid(p):
        return _mid_masses(market, p)[2]

    def high(p):
        # The {0, t2} member has no mass at or above p > t2.  In the
        # maximal-dispersion singleton market the unique member keeps mass
        # mu/beta at beta.
        if _singleton_extreme(market):
            return market.mu / market.beta
        return 0.0

    return _dispatch(market, p, low, mid, high)


def cond_exp_max(market: MarketInfo, p: float) -> float:
    """Best-case conditional expectation sup E[X | X >= p]."""
    _check_price(market, p)
    if market.is_degenerate:
        return market.mu
    t1 = left_threshold(market)
    if p <= t1:
        return companion_point(market, p)
    return market.beta


def best_case_revenue(market: MarketInfo, p: float) -> float:
    """p * sup P(X >= p); non-decreasing up to the right threshold."""
    t2 = right_threshold(market)
    if p > t2 * (1.0 + 1e-12):
        raise RobustPriceError(
            f"best-case revenue defined on (0, {t2}], got p={p}")
    return p * tail_prob_max(market, min(p, t2))


def tail_bounds(market: MarketInfo, p: float) -> TailBounds:
    """All three key quantities plus the best-case revenue at one price."""
    _check_price(market, p)
    t1 = left_threshold(market)
    t2 = right_threshold(market)
    if p <= t1:
        regime = REGIME_LOW
    elif p <= t2:
        regime = REGIME_MID
    else:
        regime = REGIME_HIGH
    hi = tail_prob_max(market, p)
    return TailBounds(
        p=p,
        inf_tail=tail_prob_min(market, p),
        sup_tail=hi,
        sup_cond_exp=cond_exp_max(market, p),
        best_case_rev=p * hi,
        regime=regime,
    )


def mean_range_tail_bounds(mu: float, beta: float, p: float):
    """(inf, sup) of P(X >= p) with mean and maximum knowledge only."""
    if not p > 0:
        raise RobustPriceError(f"price must be positive, got {p}")
    if p > beta:
        raise RobustPriceError(f"price {p} exceeds maximum valuation {beta}")
    lo = max((mu - p) / (beta - p), 0.0) if p < beta else (1.0 if p <= mu else 0.0)
    hi = min(mu / p, 1.0)
    return lo, hi


def tail_prob_min_dispersion_ub(market: MarketInfo, p: float) -> float:
    """Worst-case conversion rate when s is only an upper bound.

    With an upper-bound dispersion constraint the adversary may also use
    less-dispersed members, so between the left threshold and the mean the
    bound relaxes to the mean/maximum value, and above the mean the point
    mass at the mean drives it to zero.  Stated without full proof in the
    source analysis; validated against the enumeration oracle only.
    """
    if market.mode != MODE_UPPER:
        raise ModeError("upper-bound tail requires mode='upper'")
    _check_price(market, p)
    if market.is_degenerate:
        return 1.0 if p <= market.mu else 0.0
    t1 = left_threshold(market)
    mu, beta = market.mu, market.beta
    band = _BAND * max(1.0, _scale(market))

    def low(p):
        a = companion_point(market, p)
        return (mu - p) / (a - p)

    def mid(p):
        return (mu - p) / (beta - p)

    if abs(p - t1) <= band and t1 > 0:
        a, b = low(p), mid(p)
        if abs(a - b) > _BOUNDARY_AGREE:
            raise InternalConsistencyError(
                f"upper-bound branches disagree at left threshold: {a} vs {b}")
        return 0.5 * (a + b)
    if p < t1:
        return low(p)
    if p < mu:
        return mid(p)
    return 0.0
