"""Edgeworth evaluators and the auxiliary bounds against brute-force oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr
from scipy.stats import binom as sbinom

from mestrisk import (
    EdgeworthOrder,
    EdgeworthParams,
    binomial_moments,
    binomial_tail_bound,
    convolve_power,
    edgeworth_cdf,
    gaussian_coeffs,
    hoeffding_bound,
    make_hampel_ic,
    psi_pushforward,
    truncated_normal_moment,
)


class TestEdgeworthCdf:
    def test_reduces_to_normal_for_zero_cumulants(self):
        rng = np.random.default_rng(3)
        s = rng.uniform(-6, 6, size=1000)
        p = EdgeworthParams(n=17, rho_t=0.0, kappa_t=0.0, order=EdgeworthOrder.TWO)
        assert np.max(np.abs(edgeworth_cdf(s, p) - ndtr(s))) < 1e-15

    def test_tail_limits(self):
        p = EdgeworthParams(n=9, rho_t=0.8, kappa_t=1.5, order=EdgeworthOrder.TWO)
        assert edgeworth_cdf(40.0, p) == pytest.approx(1.0, abs=1e-14)
        assert edgeworth_cdf(-40.0, p) == pytest.approx(0.0, abs=1e-14)

    def test_raw_value_can_leave_unit_interval_but_clamp_holds(self):
        p = EdgeworthParams(n=1, rho_t=2.0, kappa_t=6.0, order=EdgeworthOrder.TWO)
        s = np.linspace(-6, 6, 601)
        raw = edgeworth_cdf(s, p, clamp=False)
        clamped = edgeworth_cdf(s, p)
        assert raw.min() < 0.0 or raw.max() > 1.0
        assert clamped.min() >= 0.0 and clamped.max() <= 1.0

    def test_order_one_drops_kurtosis_term(self):
        p1 = EdgeworthParams(n=25, rho_t=0.5, kappa_t=3.0, order=EdgeworthOrder.ONE)
        p1b = EdgeworthParams(n=25, rho_t=0.5, kappa_t=-1.0, order=EdgeworthOrder.ONE)
        s = np.linspace(-3, 3, 61)
        assert np.allclose(edgeworth_cdf(s, p1), edgeworth_cdf(s, p1b), atol=0)

    def test_invalid_kurtosis_rejected(self):
        with pytest.raises(ValueError):
            EdgeworthParams(n=5, rho_t=0.0, kappa_t=-2.5)

    @staticmethod
    def _sup_error_vs_convolution(c: float, n: int, grid: int = 2048) -> float:
        ic = make_hampel_ic(c)
        mc = gaussian_coeffs(c)
        total = convolve_power(psi_pushforward(ic, 0.0, grid), n)
        scale = math.sqrt(n) * mc.v0
        p = EdgeworthParams(n=n, rho_t=mc.rho0, kappa_t=mc.kappa0, order=EdgeworthOrder.TWO)
        ss = np.linspace(-4.0, 4.0, 321)
        return max(abs(total.cdf_mid(float(s) * scale) - edgeworth_cdf(float(s), p)) for s in ss)

    @pytest.mark.parametrize("c", [0.5, 0.7, 1.0])
    def test_error_shrinks_against_exact_convolution(self, c):
        err25 = self._sup_error_vs_convolution(c, 25)
        err100 = self._sup_error_vs_convolution(c, 100)
        assert err100 < err25

    def test_error_small_at_n50(self):
        mc = gaussian_coeffs(0.7)
        assert mc.rho0 == 0.0  # symmetric score: the sqrt(n) term vanishes
        assert self._sup_error_vs_convolution(0.7, 50) < 5e-4


class TestHoeffdingBound:
    def test_plain_arithmetic(self):
        assert hoeffding_bound(100, 0.1, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_goes_to_one_for_small_eps(self):
        assert hoeffding_bound(50, 1e-9, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_dominates_rademacher_tail(self):
        # P(mean of 50 Rademacher >= 0.3); range of a +-1 variable is M = 2
        exact = sum(math.comb(50, k) for k in range(33, 51)) / 2 ** 50
        assert exact <= hoeffding_bound(50, 0.3, 2.0)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            hoeffding_bound(10, 0.0, 1.0)


class TestBinomialMoments:
    def test_first_moment(self):
        assert binomial_moments(12, 0.3, 1) == pytest.approx(3.6, rel=1e-15)

    def test_example_value(self):
        assert binomial_moments(10, 0.5, 2) == 27.5

    @pytest.mark.parametrize("n", [2, 5, 11, 20])
    @pytest.mark.parametrize("pnum", [1, 2, 5, 8, 9])
    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_exact_rational_against_brute_force(self, n, pnum, j):
        p = Fraction(pnum, 10)
        brute = sum(
            Fraction(math.comb(n, k)) * p ** k * (1 - p) ** (n - k) * k ** j for k in range(n + 1)
        )
        assert binomial_moments(n, p, j) == brute

    def test_shrinking_rate_power_form(self):
        # third moment at p = r/sqrt(n) in powers of sqrt(n)
        n, r = 100, 0.5
        p = r / math.sqrt(n)
        expected = (
            r ** 3 * n ** 1.5
            + 3 * r ** 2 * n
            + (r - 3 * r ** 3) * math.sqrt(n)
            - 3 * r ** 2
            + 2 * r ** 3 / math.sqrt(n)
        )
        assert binomial_moments(n, p, 3) == pytest.approx(expected, rel=1e-12)

    def test_bad_order_rejected(self):
        with pytest.raises(ValueError):
            binomial_moments(10, 0.5, 5)


class TestBinomialTailBound:
    def test_kappa_arithmetic(self):
        val = binomial_tail_bound(100, 0.5, 2.0)
        assert val == pytest.approx(math.exp(-(2.0 * math.log(2.0) - 1.0) * 5.0), rel=1e-14)

    def test_bound_to_one_as_k1_to_one(self):
        assert binomial_tail_bound(100, 0.5, 1.0 + 1e-12) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n", [25, 100, 400])
    def test_dominates_exact_tail(self, n):
        r, k1 = 0.5, 2.0
        exact = float(sbinom.sf(math.floor(k1 * r * math.sqrt(n)), n, r / math.sqrt(n)))
        assert exact <= binomial_tail_bound(n, r, k1)

    def test_k1_must_exceed_one(self):
        with pytest.raises(ValueError):
            binomial_tail_bound(10, 0.5, 1.0)


class TestTruncatedNormalMoment:
    def test_base_cases(self):
        assert truncated_normal_moment(0, 0.0) == 0.5
        assert truncated_normal_moment(1, 0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("k", list(range(9)))
    @pytest.mark.parametrize("c", [-2.0, -0.5, 0.0, 1.0, 2.5])
    def test_against_quadrature(self, k, c):
        val, _ = integrate.quad(
            lambda x: x ** k * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
            c,
            40.0,
            epsabs=1e-14,
            limit=300,
        )
        assert truncated_normal_moment(k, c) == pytest.approx(val, abs=1e-10)

    def test_superpolynomial_decay(self):
        # value at c = 1.1*sqrt(2 log n), scaled by n, vanishes along n
        seq = []
        for n in (100, 1000, 10000):
            c = 1.1 * math.sqrt(2.0 * math.log(n))
            seq.append(n * truncated_normal_moment(4, c))
        assert seq[0] > seq[1] > seq[2]
        assert seq[2] < 1e-2

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            truncated_normal_moment(9, 0.0)
