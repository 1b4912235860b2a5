"""Extremal finite-support valuation distributions.

The tight bounds in this package are attained by two-point and three-point
distributions; this module builds them explicitly so downstream checks can
evaluate revenue and ratio objectives on concrete scenarios.  Left limits
("price just below p") are realized with an explicit epsilon offset rather
than symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .ambiguity import MarketInfo, companion_point, left_threshold, right_threshold
from .dispersion import DispersionMeasure
from .errors import RobustPriceError, UnboundedSupportError

# Masses in [-MASS_CLAMP, 0) are rounded up to zero: floating-point guard at
# the regime boundaries where one mass vanishes analytically.
MASS_CLAMP = 1e-14


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support distribution with strictly increasing support points."""

    supports: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.supports, dtype=float)
        mas = np.asarray(self.masses, dtype=float)
        if sup.shape != mas.shape or sup.ndim != 1 or sup.size == 0:
            raise RobustPriceError("supports and masses must be equal-length 1-d arrays")
        if np.any(np.diff(sup) <= 0):
            raise RobustPriceError("supports must be strictly increasing")
        if np.any(mas < 0):
            raise RobustPriceError(f"negative mass: {mas}")
        if abs(mas.sum() - 1.0) > 1e-12:
            raise RobustPriceError(f"masses sum to {mas.sum()}, not 1")
        object.__setattr__(self, "supports", sup)
        object.__setattr__(self, "masses", mas)

    def mean(self) -> float:
        return float(self.supports @ self.masses)

    def dispersion(self, measure: DispersionMeasure) -> float:
        return float(measure.value(self.supports) @ self.masses)

    def tail(self, p: float) -> float:
        """P(X >= p)."""
        return float(self.masses[self.supports >= p].sum())

    def revenue(self, p: float) -> float:
        return p * self.tail(p)

    def optimal_revenue(self, extra_prices: Tuple[float, ...] = ()) -> float:
        """max over support points (and optional extra prices) of t * P(X >= t).

        For finite support the supremum over all prices is attained at a
        support point, so scanning the support is exact.
        """
        best = 0.0
        for t in list(self.supports) + list(extra_prices):
            if t > 0:
                best = max(best, t * self.tail(t))
        return best

    def ratio(self, p: float) -> float:
        """Revenue at p relative to the optimal revenue for this distribution."""
        opt = self.optimal_revenue(extra_prices=(p,))
        if opt == 0.0:
            return 1.0 if self.revenue(p) == 0.0 else math.inf
        return self.revenue(p) / opt


def _finalize(supports, masses) -> DiscreteDistribution:
    """Clamp tiny negative masses, drop zero-mass points, renormalize."""
    supports = np.asarray(supports, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if np.any(masses < -MASS_CLAMP):
        raise RobustPriceError(f"negative probability mass: {masses}")
    masses = np.clip(masses, 0.0, None)
    keep = masses > MASS_CLAMP
    supports, masses = supports[keep], masses[keep]
    order = np.argsort(supports)
    supports, masses = supports[order], masses[order]
    masses = masses / masses.sum()
    return DiscreteDistribution(supports, masses)


def point_mass(x: float) -> DiscreteDistribution:
    return DiscreteDistribution(np.array([x]), np.array([1.0]))


def two_point(market: MarketInfo, p: float) -> DiscreteDistribution:
    """Two-point member {p, companion(p)} of the market.

    Admissible for p in [0, left_threshold] or p in [right_threshold, beta],
    where both support points stay inside [0, beta].
    """
    if market.is_degenerate:
        return point_mass(market.mu)
    mu = market.mu
    if p < 0 or p > market.beta:
        raise RobustPriceError(f"price {p} outside support [0, {market.beta}]")
    if p == 0.0:
        a = right_threshold(market)
    else:
        a = companion_point(market, p)
    tol = 1e-9 * max(1.0, market.beta if math.isfinite(market.beta) else 1.0)
    if a < -tol or a > market.beta + tol:
        raise RobustPriceError(
            f"companion point {a} of p={p} violates the support [0, {market.beta}]")
    a = min(max(a, 0.0), market.beta) if math.isfinite(market.beta) else max(a, 0.0)
    v_p = (a - mu) / (a - p)
    v_a = (mu - p) / (a - p)
    if p < a:
        return _finalize([p, a], [v_p, v_a])
    return _finalize([a, p], [v_a, v_p])


def three_point(market: MarketInfo, p: float) -> DiscreteDistribution:
    """Three-point member {0, p, beta} of the market.

    Exists (all masses nonnegative) exactly for p between the two support
    thresholds; requires a finite maximum valuation.
    """
    if not math.isfinite(market.beta):
        raise UnboundedSupportError("three-point construction needs finite beta")
    if market.is_degenerate:
        return point_mass(market.mu)
    t1, t2 = left_threshold(market), right_threshold(market)
    tol = 1e-9 * market.beta
    if p < t1 - tol or p > t2 + tol:
        raise RobustPriceError(
            f"three-point construction needs p in [{t1}, {t2}], got {p}")
    w0, wp, wb = three_point_masses(market, p)
    return _finalize([0.0, p, market.beta], [w0, wp, wb])


def three_point_masses(market: MarketInfo, p: float) -> Tuple[float, float, float]:
    """Masses on {0, p, beta} solving the mean and dispersion constraints."""
    mu, beta, s, m = market.mu, market.beta, market.s, market.measure
    phi0, phip, phib = m.value(0.0), m.value(p), m.value(beta)
    denom = beta * (phi0 - phip) + p * (phib - phi0)
    if denom <= 0:
        raise RobustPriceError(
            f"degenerate three-point system at p={p} (denominator {denom})")
    w0 = (s * (beta - p) + (mu - beta) * phip + (p - mu) * phib) / denom
    wp = (beta * (phi0 - s) + mu * (phib - phi0)) / denom
    wb = (mu * (phi0 - phip) - p * (phi0 - s)) / denom
    return w0, wp, wb


def worst_case_distribution(market: MarketInfo, p: float, eps: float = None) -> DiscreteDistribution:
    """Distribution attaining (in the eps -> 0 limit) the worst ratio at p.

    For p up to the right threshold this is the two-/three-point member at
    the shifted price p - eps, written with masses expressed through the
    tail bounds: {0, p - eps, y(p - eps)} where y is the best-case
    conditional expectation.  Above the right threshold the {0, t2}
    two-point member already gives ratio 0.
    """
    from .bounds import cond_exp_max, tail_prob_max, tail_prob_min  # cycle guard

    if market.is_degenerate:
        return point_mass(market.mu)
    if eps is None:
        eps = 1e-9 * (market.beta if math.isfinite(market.beta) else max(1.0, market.mu))
    if not 0 < eps < p:
        raise RobustPriceError(f"need 0 < eps < p, got eps={eps}, p={p}")
    if p <= 0 or p > market.beta:
        raise RobustPriceError(f"price {p} outside (0, {market.beta}]")
    t2 = right_threshold(market)
    if p > t2:
        return two_point(market, 0.0)
    pm = p - eps
    hi = tail_prob_max(market, pm)
    lo = tail_prob_min(market, pm)
    y = cond_exp_max(market, pm)
    return _finalize([0.0, pm, y], [1.0 - hi, hi - lo, lo])


def mean_range_two_point(mu: float, beta: float, p: float, eps: float = 1e-9) -> DiscreteDistribution:
    """Two-point {p - eps, beta} worst case under mean/maximum knowledge only."""
    if not 0 < p <= mu <= beta:
        raise RobustPriceError(f"need 0 < p <= mu <= beta, got p={p}, mu={mu}, beta={beta}")
    if not 0 < eps < p:
        raise RobustPriceError(f"need 0 < eps < p, got {eps}")
    pm = p - eps
    return _finalize([pm, beta], [(beta - mu) / (beta - pm), (mu - pm) / (beta - pm)])
