"""Risk/bias/variance expansion identities, side selection, cross-checks."""

import math

import numpy as np
import pytest

from mestrisk import (
    ContaminationSpec,
    MomentCoefficients,
    Side,
    bias_var_expansion,
    choose_side,
    fixed_radius_mse,
    fraiman_check,
    gaussian_coeffs,
    ideal_gaussian_limit,
    make_hampel_ic,
    median_mse_so,
    risk_expansion,
    symmetric_mse,
)

GAUSS_F0 = 1.0 / math.sqrt(2.0 * math.pi)


def _random_mc(rng) -> tuple[MomentCoefficients, float]:
    mc = MomentCoefficients(
        l1=-1.0,
        l2=float(rng.uniform(-1.5, 1.5)),
        l3=float(rng.uniform(-1.5, 1.5)),
        v0=float(rng.uniform(0.3, 1.6)),
        v1t=float(rng.uniform(-1.5, 1.5)),
        v2t=float(rng.uniform(-1.5, 1.5)),
        rho0=float(rng.uniform(-1.0, 1.0)),
        rho1=float(rng.uniform(-1.5, 1.5)),
        kappa0=float(rng.uniform(-1.9, 3.0)),
    )
    return mc, float(rng.uniform(0.4, 2.2))


class TestRiskExpansion:
    def test_table2_examples(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        cont = risk_expansion(mc, b, ContaminationSpec(radius_r=0.1, n=30))
        assert (round(cont.order0, 3), round(cont.order1, 3)) == (1.205, 1.261)
        ideal = risk_expansion(mc, b, ContaminationSpec(radius_r=0.0, n=5))
        assert (round(ideal.order0, 3), round(ideal.order1, 3), round(ideal.order2, 3)) == (
            1.187,
            1.187,
            1.169,
        )

    def test_table6_r1_example(self):
        mc, b = gaussian_coeffs(0.5), make_hampel_ic(0.5).b
        e = risk_expansion(mc, b, ContaminationSpec(radius_r=1.0, n=30))
        assert (round(e.order0, 3), round(e.order1, 3), round(e.order2, 3)) == (2.967, 4.132, 4.652)

    def test_cumulative_order_identities_bitwise(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            mc, b = _random_mc(rng)
            r, n = float(rng.uniform(0, 1)), int(rng.integers(2, 400))
            e = risk_expansion(mc, b, ContaminationSpec(radius_r=r, n=n))
            assert e.order1 - e.order0 == (r / math.sqrt(n)) * e.A1
            assert e.order2 - e.order1 == e.A2 / n
            assert e.order0 == r * r * b * b + mc.v0 ** 2

    def test_left_right_equal_for_symmetric_hampel(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        left = risk_expansion(mc, b, ContaminationSpec(radius_r=0.3, n=20, side=Side.LEFT))
        right = risk_expansion(mc, b, ContaminationSpec(radius_r=0.3, n=20, side=Side.RIGHT))
        assert left.order2 == right.order2
        assert left.A1 == right.A1 and left.A2 == right.A2

    def test_order0_increasing_in_r(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        rs = np.linspace(0.0, 1.0, 21)
        vals = [risk_expansion(mc, b, ContaminationSpec(radius_r=float(r), n=30)).order0 for r in rs]
        assert all(x < y for x, y in zip(vals, vals[1:]))

    def test_A1_nonnegative_on_grid(self):
        for c in np.linspace(0.3, 3.0, 12):
            mc, b = gaussian_coeffs(float(c)), make_hampel_ic(float(c)).b
            for r in np.linspace(0.0, 1.0, 11):
                e = risk_expansion(mc, b, ContaminationSpec(radius_r=float(r), n=30))
                assert e.A1 >= 0.0

    def test_unbounded_score_rejected(self):
        with pytest.raises(ValueError):
            risk_expansion(gaussian_coeffs(math.inf), math.inf, ContaminationSpec(radius_r=0.1, n=10))


class TestChooseSide:
    def test_symmetric_gaussian_tie(self):
        mc = gaussian_coeffs(0.7)
        assert choose_side(mc, 1.36, mc.v0, 0.25, 30) is Side.TIE

    def test_positive_v1_left(self):
        # l2 = 0 makes the threshold 0
        mc = MomentCoefficients(l1=-1, l2=0.0, l3=0.5, v0=1.0, v1t=1.0, v2t=0.0, rho0=0.0, rho1=0.0, kappa0=0.0)
        assert choose_side(mc, 1.2, 1.0, 0.3, 25) is Side.LEFT

    def test_negative_v1_right(self):
        mc = MomentCoefficients(l1=-1, l2=0.0, l3=0.5, v0=1.0, v1t=-1.0, v2t=0.0, rho0=0.0, rho1=0.0, kappa0=0.0)
        assert choose_side(mc, 1.2, 1.0, 0.3, 25) is Side.RIGHT


class TestBiasVarDecomposition:
    def test_symmetric_B10_is_zero(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        bv = bias_var_expansion(mc, b, ContaminationSpec(radius_r=0.1, n=30))
        assert bv.B10 == 0.0

    def test_symmetric_first_order_terms(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        bv = bias_var_expansion(mc, b, ContaminationSpec(radius_r=0.1, n=30))
        assert bv.D1 == pytest.approx(mc.v0 ** 2 + b * b, rel=1e-15)
        assert bv.C1 == pytest.approx(2.0 * b * b * 0.1 ** 2, rel=1e-12)

    def test_decomposition_identity_random_tuples(self):
        rng = np.random.default_rng(20260809)
        for _ in range(100):
            mc, b = _random_mc(rng)
            r, n = float(rng.uniform(0, 1)), int(rng.integers(2, 200))
            for side in (Side.LEFT, Side.RIGHT):
                spec = ContaminationSpec(radius_r=r, n=n, side=side)
                e = risk_expansion(mc, b, spec)
                bv = bias_var_expansion(mc, b, spec)
                assert abs(bv.C1 + bv.D1 - e.A1) < 1e-12
                assert abs(bv.C2 + bv.D2 - e.A2) < 1e-12

    def test_gaussian_hampel_consistency(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        spec = ContaminationSpec(radius_r=0.1, n=30)
        e = risk_expansion(mc, b, spec)
        bv = bias_var_expansion(mc, b, spec)
        assert bv.C1 + bv.D1 == pytest.approx(e.A1, rel=1e-15)
        assert bv.C2 + bv.D2 == pytest.approx(e.A2, rel=1e-14)


class TestSymmetricFormula:
    def test_r0_reduces_to_v0sq(self):
        mc = gaussian_coeffs(0.7)
        assert symmetric_mse(1.36, mc.v0, 0.0, 30) == mc.v0 ** 2

    def test_matches_order1_table_values(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        assert round(symmetric_mse(b, mc.v0, 0.1, 30), 3) == 1.261
        assert round(symmetric_mse(b, mc.v0, 0.5, 30), 3) == 2.007

    def test_equals_order1_under_symmetry(self):
        for c in (0.5, 0.7, 1.5):
            mc, b = gaussian_coeffs(c), make_hampel_ic(c).b
            for r, n in ((0.1, 30), (0.5, 5), (1.0, 100)):
                e = risk_expansion(mc, b, ContaminationSpec(radius_r=r, n=n))
                assert symmetric_mse(b, mc.v0, r, n) == pytest.approx(e.order1, rel=1e-14)


class TestIdealGaussianLimit:
    def test_limit_value(self):
        assert ideal_gaussian_limit(10 ** 12) == pytest.approx(math.pi / 2, rel=1e-11)

    def test_n10(self):
        assert ideal_gaussian_limit(10) == (math.pi / 2) * (1 + (math.pi / 2 - 5 / 3) / 10)

    @pytest.mark.parametrize("n", [5, 30, 1000])
    def test_consistent_with_risk_expansion(self, n):
        mc = gaussian_coeffs(0.0)
        e = risk_expansion(mc, mc.v0, ContaminationSpec(radius_r=0.0, n=n))
        assert abs(e.order2 - ideal_gaussian_limit(n)) < 1e-12


class TestMedianSecondOrder:
    def test_gaussian_asymptotic_variance(self):
        assert median_mse_so(GAUSS_F0, 0.0, 0.0, 30) == pytest.approx(math.pi / 2, rel=1e-15)

    def test_table10_med_cont(self):
        assert round(median_mse_so(GAUSS_F0, 0.0, 0.25, 30), 3) == 1.821

    def test_table10_med_ideal_order0(self):
        assert round(median_mse_so(GAUSS_F0, 0.0, 0.0, 30), 3) == 1.571

    @pytest.mark.parametrize("f1", [0.3, -0.3])
    def test_agrees_with_general_expansion(self, f1):
        # median coefficients: v0 = b = 1/(2 f0), l2 = -f1/f0, v1t = rho0 = 0
        f0 = 0.4
        b = 1.0 / (2.0 * f0)
        mc = MomentCoefficients(
            l1=-1.0, l2=-f1 / f0, l3=0.0, v0=b, v1t=0.0, v2t=0.0, rho0=0.0, rho1=0.0, kappa0=0.0
        )
        for r, n in ((0.25, 30), (0.5, 12)):
            e = risk_expansion(mc, b, ContaminationSpec(radius_r=r, n=n))
            assert e.order1 == pytest.approx(median_mse_so(f0, f1, r, n), rel=1e-13)

    def test_nonpositive_density_rejected(self):
        with pytest.raises(ValueError):
            median_mse_so(0.0, 0.0, 0.1, 10)


class TestFixedRadius:
    def test_eps_zero(self):
        mc = gaussian_coeffs(0.7)
        assert fixed_radius_mse(mc, 1.36, 0.0, 25) == mc.v0 ** 2 / 25

    def test_substitution_identity_up_to_ideal_remainder(self):
        # differs from order2/n exactly by the ideal 1/n^2 group that the
        # fixed-radius polynomial leaves in its remainder
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        eps, n = 0.05, 100
        r = eps * math.sqrt(n)
        e = risk_expansion(mc, b, ContaminationSpec(radius_r=r, n=n))
        ideal_a2 = risk_expansion(mc, b, ContaminationSpec(radius_r=0.0, n=n)).A2
        got = fixed_radius_mse(mc, b, eps, n)
        assert got == pytest.approx(e.order2 / n - ideal_a2 / n ** 2, abs=1e-15)
        assert got == pytest.approx(e.order2 / n, abs=2.0 * abs(ideal_a2) / n ** 2)

    def test_breakdown_guard(self):
        mc = gaussian_coeffs(0.7)
        with pytest.raises(ValueError):
            fixed_radius_mse(mc, 1.36, 0.5, 30)


class TestFraimanCheck:
    def test_ideal_case(self):
        mc = gaussian_coeffs(0.7)
        t = fraiman_check(mc, 1.36, mc.v0, 0.0, 30)
        assert t.as_bias == 0.0
        assert t.as_var == mc.v0 ** 2

    def test_mse_matches_symmetric_formula(self):
        mc, b = gaussian_coeffs(0.7), make_hampel_ic(0.7).b
        t = fraiman_check(mc, b, mc.v0, 0.1, 30)
        assert t.as_mse == pytest.approx(symmetric_mse(b, mc.v0, 0.1, 30), rel=1e-15)
        assert round(t.as_mse, 3) == 1.261

    def test_median_limit_variance_shape(self):
        v0 = 1.3
        t = fraiman_check(gaussian_coeffs(0.7), v0, v0, 0.2, 50)
        rn = 0.2 / math.sqrt(50)
        assert t.as_var == pytest.approx(v0 * v0 * (1 + rn * (1 + 1 / v0)), rel=1e-14)
