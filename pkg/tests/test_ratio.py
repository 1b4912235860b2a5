import math

import numpy as np
import pytest

from robustprice.ambiguity import (MODE_UPPER, left_threshold, power_market,
                                   right_threshold, variance_market)
from robustprice.bounds import REGIME_HIGH, REGIME_LOW, REGIME_MID
from robustprice.errors import (InfeasibleMarketError, ModeError,
                                RobustPriceError)
from robustprice.extremal import worst_case_distribution
from robustprice.ratio import (BRANCH_DEGENERATE, BRANCH_PRICE, BRANCH_TAIL,
                               worst_case_cr, worst_case_cr_dispersion_ub,
                               worst_case_cr_mean_range, worst_case_cr_power,
                               worst_case_cr_variance, worst_case_revenue)

from test_extremal import random_market

M = variance_market(0.5, 0.5, 1.2)


class TestWorstCaseCR:
    def test_mid_regime_tie_example(self):
        b = worst_case_cr(M, 0.6)
        assert b.cr == pytest.approx(0.5, abs=1e-9)
        assert b.tail_ratio == pytest.approx(0.5, abs=1e-9)
        assert b.price_over_y == pytest.approx(0.5, abs=1e-12)
        assert b.regime == REGIME_MID

    def test_price_branch_example(self):
        b = worst_case_cr(M, 0.25)
        assert b.cr == pytest.approx(0.25 / 1.2, abs=1e-9)
        assert b.cr == pytest.approx(0.2083, abs=5e-5)
        assert b.branch == BRANCH_PRICE
        assert b.tail_ratio == pytest.approx(0.4386, abs=5e-5)

    def test_zero_above_right_threshold(self):
        b = worst_case_cr(M, 1.1)
        assert b.cr == 0.0
        assert b.regime == REGIME_HIGH
        assert b.branch == BRANCH_DEGENERATE

    def test_degenerate_market(self):
        m = variance_market(0.5, 0.0, 1.0)
        assert worst_case_cr(m, 0.3).cr == pytest.approx(0.3 / 0.5)
        assert worst_case_cr(m, 0.5).cr == pytest.approx(1.0)
        assert worst_case_cr(m, 0.6).cr == 0.0

    def test_infeasible_market_rejected(self):
        with pytest.raises(InfeasibleMarketError):
            worst_case_cr(variance_market(0.5, 0.8, 1.0), 0.3)

    def test_upper_mode_rejected(self):
        with pytest.raises(ModeError):
            worst_case_cr(variance_market(0.5, 0.5, 1.2, mode=MODE_UPPER), 0.3)

    def test_unbounded_support(self):
        m = variance_market(0.5, 0.5, math.inf)
        assert worst_case_cr(m, 0.6).cr == 0.0
        b = worst_case_cr(m, 0.25)
        assert b.cr == pytest.approx(min(0.25 * 0.25 / (0.25 * 0.25 + 0.25),
                                         0.25 / 1.5), abs=1e-12)

    def test_range_property(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            m = random_market(rng)
            p = rng.uniform(0.02, 1.0) * m.beta
            b = worst_case_cr(m, p)
            assert -1e-12 <= b.cr <= 1.0 + 1e-12


class TestVarianceClosedForm:
    def test_matches_general_decomposition(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            m = random_market(rng, power_prob=0.0)
            p = rng.uniform(0.02, 1.0) * m.beta
            a = worst_case_cr(m, p)
            b = worst_case_cr_variance(m.mu, m.sigma, m.beta, p)
            assert b.cr == pytest.approx(a.cr, abs=1e-10)
            assert b.regime == a.regime

    def test_low_regime_formula(self):
        # min{(mu-p)^2/((mu-p)^2+sigma^2), p(mu-p)/(mu(mu-p)+sigma^2)}
        b = worst_case_cr_variance(0.5, 0.5, 1.2, 0.1)
        d = 0.4
        assert b.tail_ratio == pytest.approx(d * d / (d * d + 0.25), abs=1e-12)
        assert b.price_over_y == pytest.approx(0.1 * d / (0.5 * d + 0.25), abs=1e-12)

    def test_mid_regime_formula(self):
        b = worst_case_cr_variance(0.5, 0.5, 1.2, 0.6)
        num = 0.6 * (0.25 + 0.25 - 0.3)
        den = 0.6 * (0.5 * (1.2 + 0.6 - 0.5) - 0.25)
        assert b.tail_ratio == pytest.approx(num / den, abs=1e-12)
        assert b.cr == pytest.approx(0.5, abs=1e-12)

    def test_sigma_zero(self):
        assert worst_case_cr_variance(0.5, 0.0, 1.0, 0.25).cr == pytest.approx(0.5)
        assert worst_case_cr_variance(0.5, 0.0, 1.0, 0.75).cr == 0.0

    def test_infeasible(self):
        with pytest.raises(InfeasibleMarketError):
            worst_case_cr_variance(0.5, 0.8, 1.0, 0.3)

    def test_maximal_dispersion_market(self):
        # sigma^2 = mu(beta - mu): singleton market {0, beta}.
        b = worst_case_cr_variance(0.5, 0.5, 1.0, 1.0)
        assert b.cr == pytest.approx(1.0, abs=1e-9)

    def test_continuity_across_thresholds(self):
        rng = np.random.default_rng(33)
        for _ in range(100):
            m = random_market(rng, power_prob=0.0)
            for t in (left_threshold(m), right_threshold(m)):
                if not 0 < t <= m.beta:
                    continue
                lo = worst_case_cr_variance(m.mu, m.sigma, m.beta, t * (1 - 1e-9)).cr
                hi = worst_case_cr_variance(m.mu, m.sigma, m.beta,
                                            min(t * (1 + 1e-9), m.beta)).cr
                at = worst_case_cr_variance(m.mu, m.sigma, m.beta, t).cr
                if t == right_threshold(m):
                    continue  # cr jumps to 0 above tau2 by definition
                assert lo == pytest.approx(at, abs=1e-6)
                assert hi == pytest.approx(at, abs=1e-6)


class TestPowerClosedForm:
    def test_q2_matches_variance(self):
        for sigma in (0.1, 0.3, 0.5):
            for p in (0.1, 0.3, 0.6, 0.9):
                a = worst_case_cr_variance(0.5, sigma, 1.2, p)
                b = worst_case_cr_power(0.5, 0.25 + sigma * sigma, 2.0, 1.2, p)
                assert b.cr == pytest.approx(a.cr, abs=1e-12)

    def test_matches_general_decomposition(self):
        rng = np.random.default_rng(34)
        for _ in range(60):
            m = random_market(rng, power_prob=1.0)
            p = rng.uniform(0.02, 1.0) * m.beta
            a = worst_case_cr(m, p)
            b = worst_case_cr_power(m.mu, m.s, m.measure.q, m.beta, p)
            assert b.cr == pytest.approx(a.cr, abs=1e-10)

    def test_mid_regime_formula(self):
        mu, s, q, beta, p = 0.5, 0.45, 1.5, 1.0, 0.6
        b = worst_case_cr_power(mu, s, q, beta, p)
        num = p * s - mu * p ** q
        den = mu * (beta ** q - p ** q) - s * (beta - p)
        assert b.tail_ratio == pytest.approx(num / den, abs=1e-12)

    def test_bad_exponent(self):
        with pytest.raises(RobustPriceError):
            worst_case_cr_power(0.5, 0.5, 1.0, 1.2, 0.3)


class TestMeanRange:
    def test_low_price(self):
        assert worst_case_cr_mean_range(0.5, 1.0, 0.25) == pytest.approx(0.25)

    def test_at_mean(self):
        assert worst_case_cr_mean_range(0.5, 1.0, 0.5) == 0.0

    def test_branch_crossing(self):
        p_star = 1.0 - math.sqrt(0.5)
        lhs = (0.5 - p_star) / (1.0 - p_star)
        assert lhs == pytest.approx(p_star, abs=1e-12)
        assert worst_case_cr_mean_range(0.5, 1.0, p_star) == pytest.approx(p_star, abs=1e-12)
        # p_star maximizes the mean-range worst case.
        grid = np.linspace(1e-4, 0.5, 4001)
        vals = [worst_case_cr_mean_range(0.5, 1.0, p) for p in grid]
        assert max(vals) <= p_star + 1e-7


class TestDispersionUpperBound:
    MU = variance_market(0.5, 0.5, 1.2, mode=MODE_UPPER)

    def test_low_branch(self):
        assert worst_case_cr_dispersion_ub(self.MU, 0.1) == pytest.approx(
            0.1 / 1.125, abs=1e-12)
        assert worst_case_cr_dispersion_ub(self.MU, 0.1) == pytest.approx(0.0889, abs=5e-5)

    def test_mid_branch(self):
        assert worst_case_cr_dispersion_ub(self.MU, 0.3) == pytest.approx(
            0.2 / 0.9, abs=1e-12)
        assert worst_case_cr_dispersion_ub(self.MU, 0.3) == pytest.approx(0.2222, abs=5e-5)

    def test_at_mean(self):
        assert worst_case_cr_dispersion_ub(self.MU, 0.5) == 0.0

    def test_mode_guard(self):
        with pytest.raises(ModeError):
            worst_case_cr_dispersion_ub(M, 0.3)

    def test_never_exceeds_exact(self):
        rng = np.random.default_rng(35)
        for _ in range(30):
            m = random_market(rng, power_prob=0.0)
            mu_mode = variance_market(m.mu, m.sigma, m.beta, mode=MODE_UPPER)
            for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
                p = frac * m.beta
                assert (worst_case_cr_dispersion_ub(mu_mode, p)
                        <= worst_case_cr(m, p).cr + 1e-9)


class TestWorstCaseRevenue:
    def test_mid_regime_example(self):
        assert worst_case_revenue(M, 0.25) == pytest.approx(0.25 * 0.09375 / 0.285,
                                                            abs=1e-12)
        assert worst_case_revenue(M, 0.25) == pytest.approx(0.0822, abs=5e-5)

    def test_low_regime_example(self):
        assert worst_case_revenue(M, 0.1) == pytest.approx(0.1 * 0.4 / 1.025, abs=1e-12)

    def test_zero_above_right_threshold(self):
        assert worst_case_revenue(M, 1.1) == 0.0

    def test_degenerate(self):
        m = variance_market(0.5, 0.0, 1.0)
        assert worst_case_revenue(m, 0.5) == pytest.approx(0.5)
        assert worst_case_revenue(m, 0.6) == 0.0

    def test_unbounded_support(self):
        m = variance_market(0.5, 0.5, math.inf)
        assert worst_case_revenue(m, 0.25) == pytest.approx(
            0.25 * 0.25 * 0.25 / (0.25 * 0.25 + 0.25), abs=1e-12)
        assert worst_case_revenue(m, 0.6) == 0.0


class TestWitnessConsistency:
    def test_worst_case_distribution_attains_cr(self):
        rng = np.random.default_rng(36)
        for _ in range(100):
            m = random_market(rng)
            t2 = right_threshold(m)
            p = rng.uniform(0.05, 0.98) * min(t2, m.beta)
            b = worst_case_cr(m, p)
            d = worst_case_distribution(m, p, eps=1e-9 * m.beta)
            assert d.ratio(p) == pytest.approx(b.cr, abs=1e-6)

    def test_worst_case_distribution_attains_revenue(self):
        rng = np.random.default_rng(37)
        for _ in range(100):
            m = random_market(rng)
            t2 = right_threshold(m)
            p = rng.uniform(0.05, 0.98) * min(t2, m.beta)
            rev = worst_case_revenue(m, p)
            d = worst_case_distribution(m, p, eps=1e-9 * m.beta)
            assert p * d.tail(p) == pytest.approx(rev, abs=1e-6 * m.mu)

    def test_beta_collapse_to_unbounded(self):
        # Far maximum valuation: low-regime values approach the beta-free ones.
        for p in (0.1, 0.2, 0.3):
            far = worst_case_cr_variance(0.5, 0.3, 50.0, p).cr
            unb = worst_case_cr_variance(0.5, 0.3, math.inf, p).cr
            assert far == pytest.approx(unb, abs=1e-9)
