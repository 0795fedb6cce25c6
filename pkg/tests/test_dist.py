import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from raresplit.dist import (
    Exponential,
    Gamma,
    GeneralizedGamma,
    LogNormal,
    Poisson,
    Weibull,
    marginal_from_json,
    poisson_cdf_at,
    reg_lower_inc_gamma,
)

import oracles

CONTINUOUS = [
    LogNormal(0.0, 2.0),
    LogNormal(-1.0, 0.5),
    Weibull(0.5, 1.0),
    Weibull(0.8, 1.0),
    Weibull(2.0, 3.0),
    GeneralizedGamma(2.5, 1.5, 1.3),
    Gamma(3.0, 2.0),
    Exponential(1.0),
    Exponential(0.25),
]


class TestCdf:
    def test_lognormal_median(self):
        assert LogNormal(0.0, 2.0).cdf(1.0) == pytest.approx(0.5, abs=1e-14)

    def test_weibull_at_scale(self):
        # x = eta forces a unit exponent
        assert Weibull(0.5, 1.0).cdf(1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)

    def test_poisson_cdf(self):
        expected = oracles.poisson_cdf_direct(2.0, 2)
        assert Poisson(2.0).cdf(2.0) == pytest.approx(expected, rel=1e-13)

    def test_poisson_cdf_floor_and_negative(self):
        p = Poisson(2.0)
        assert p.cdf(-0.5) == 0.0
        assert p.cdf(2.9) == p.cdf(2.0)

    def test_support_edges(self):
        for d in CONTINUOUS:
            assert d.cdf(0.0) == 0.0
            assert d.cdf(-1.0) == 0.0
            assert d.cdf(1e12) == pytest.approx(1.0, abs=1e-9)

    def test_nondecreasing(self):
        xs = np.linspace(0.0, 50.0, 400)
        for d in CONTINUOUS:
            vals = d.cdf(xs)
            assert np.all(np.diff(vals) >= 0)


class TestQuantile:
    def test_lognormal_median(self):
        assert LogNormal(0.0, 2.0).quantile(0.5) == pytest.approx(1.0, rel=1e-14)

    def test_weibull_inverse_of_example(self):
        assert Weibull(0.5, 1.0).quantile(1.0 - math.exp(-1.0)) == pytest.approx(1.0, rel=1e-12)

    def test_exponential_half(self):
        # p = 1 - e^{-1/2}, so the quantile is exactly 0.5
        p = 1.0 - math.exp(-0.5)
        assert Exponential(1.0).quantile(p) == pytest.approx(0.5, rel=1e-12)

    def test_bounds_rejected(self):
        with pytest.raises(ValueError):
            Exponential(1.0).quantile(-0.01)
        with pytest.raises(ValueError):
            Exponential(1.0).quantile(1.01)

    def test_support_infimum_and_infinity(self):
        for d in CONTINUOUS:
            assert d.quantile(0.0) == 0.0
            assert d.quantile(1.0) == math.inf

    def test_poisson_quantile_unsupported(self):
        with pytest.raises(ValueError):
            Poisson(1.0).quantile(0.5)

    def test_round_trip_grid(self):
        ps = np.array([1e-8, 1e-6, 1e-3, 0.1, 0.5, 0.9, 1.0 - 1e-3, 1.0 - 1e-6, 1.0 - 1e-8])
        for d in CONTINUOUS:
            back = d.cdf(d.quantile(ps))
            assert np.max(np.abs(back - ps)) < 1e-9

    def test_quantile_cdf_round_trip_bulk(self):
        for d in CONTINUOUS:
            xs = d.quantile(np.linspace(0.05, 0.95, 19))
            back = d.quantile(d.cdf(xs))
            assert np.max(np.abs(back / xs - 1.0)) < 1e-10

    @given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
           st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
    def test_monotone_in_p(self, p1, p2):
        lo, hi = sorted((p1, p2))
        for d in (LogNormal(0.0, 1.0), Weibull(0.5, 1.0), Gamma(3.0, 2.0)):
            assert d.quantile(lo) <= d.quantile(hi)


class TestNegLogTailQuantile:
    def test_unit_exponential_identity(self):
        assert Exponential(1.0).quantile_from_neg_log_tail(3.7, "upper") == 3.7

    def test_ln2_gives_median(self):
        g = math.log(2.0)
        for d in CONTINUOUS:
            assert d.quantile_from_neg_log_tail(g, "upper") == pytest.approx(
                d.quantile(0.5), rel=1e-12)
            assert d.quantile_from_neg_log_tail(g, "lower") == pytest.approx(
                d.quantile(0.5), rel=1e-12)

    def test_lognormal_deep_tail_against_mpmath(self):
        z = oracles.normal_upper_quantile(math.exp(-50.0))
        got = LogNormal(0.0, 1.0).quantile_from_neg_log_tail(50.0, "upper")
        assert got == pytest.approx(math.exp(z), rel=1e-12)

    def test_agrees_with_quantile_at_moderate_g(self):
        # beyond g ~ 6 the reference route 1 - e^{-g} itself loses digits,
        # so the comparison grid stays where the naive route is still exact
        gs_up = np.array([1e-6, 0.01, 0.3, 1.0, 3.0, 6.0])
        gs_lo = np.array([1e-6, 0.01, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0])
        for d in CONTINUOUS:
            up = d.quantile_from_neg_log_tail(gs_up, "upper")
            lo = d.quantile_from_neg_log_tail(gs_lo, "lower")
            assert np.allclose(up, d.quantile(-np.expm1(-gs_up)), rtol=1e-10)
            assert np.allclose(lo, d.quantile(np.exp(-gs_lo)), rtol=1e-10)

    def test_deep_upper_tail_beats_naive_route(self):
        # at g = 30 the exact tail is known in closed form for these laws;
        # the tail-stable route must hit it even though 1 - e^{-30} rounds badly
        g = 30.0
        assert Exponential(2.0).quantile_from_neg_log_tail(g, "upper") == pytest.approx(
            15.0, rel=1e-14)
        assert Weibull(0.5, 1.0).quantile_from_neg_log_tail(g, "upper") == pytest.approx(
            900.0, rel=1e-14)
        z = oracles.normal_upper_quantile(math.exp(-g))
        assert LogNormal(0.0, 1.0).quantile_from_neg_log_tail(g, "upper") == pytest.approx(
            math.exp(z), rel=1e-12)

    def test_no_saturation_up_to_700(self):
        gs = np.linspace(0.0, 700.0, 1401)
        for d in CONTINUOUS:
            vals = d.quantile_from_neg_log_tail(gs, "upper")
            assert np.all(np.isfinite(vals))
            assert np.all(np.diff(vals) > 0), f"{d} saturated"

    def test_lower_tail_monotone_decreasing(self):
        gs = np.linspace(1e-3, 700.0, 500)
        for d in CONTINUOUS:
            vals = d.quantile_from_neg_log_tail(gs, "lower")
            assert np.all(np.diff(vals) <= 0)

    def test_g_zero(self):
        for d in CONTINUOUS:
            assert d.quantile_from_neg_log_tail(0.0, "upper") == 0.0
            assert d.quantile_from_neg_log_tail(0.0, "lower") == math.inf

    def test_negative_g_rejected(self):
        with pytest.raises(ValueError):
            Exponential(1.0).quantile_from_neg_log_tail(-0.1, "upper")

    def test_bad_tail_rejected(self):
        with pytest.raises(ValueError):
            Exponential(1.0).quantile_from_neg_log_tail(1.0, "sideways")

    @given(st.floats(min_value=0.0, max_value=700.0),
           st.floats(min_value=0.0, max_value=700.0))
    def test_nondecreasing_in_g(self, g1, g2):
        lo, hi = sorted((g1, g2))
        for d in (LogNormal(0.0, 1.0), Weibull(0.8, 1.0), GeneralizedGamma(2.5, 1.5, 1.3)):
            assert (d.quantile_from_neg_log_tail(lo, "upper")
                    <= d.quantile_from_neg_log_tail(hi, "upper"))


class TestRegLowerIncGamma:
    def test_reduces_to_exponential(self):
        assert reg_lower_inc_gamma(1.0, 0.5) == pytest.approx(1.0 - math.exp(-0.5), rel=1e-13)

    def test_against_series_oracle(self):
        for a, x in [(4.0, 0.5), (4.0, 0.1), (4.0, 1.5), (0.3, 2.0), (2.5, 7.0), (10.0, 3.0)]:
            assert reg_lower_inc_gamma(a, x) == pytest.approx(
                oracles.reg_lower_inc_gamma_series(a, x), rel=1e-12)

    def test_at_zero(self):
        assert reg_lower_inc_gamma(4.0, 0.0) == 0.0

    def test_monotone_in_x_and_a(self):
        xs = np.linspace(0.0, 10.0, 200)
        vals = reg_lower_inc_gamma(2.0, xs)
        assert np.all(np.diff(vals) >= 0)
        a_grid = np.linspace(0.5, 5.0, 100)
        vals_a = np.array([reg_lower_inc_gamma(a, 0.4) for a in a_grid])
        assert np.all(np.diff(vals_a) <= 0)

    def test_complement_identity(self):
        from scipy import special
        for a in (0.2, 1.0, 3.7, 25.0):
            for x in (0.01, 0.5, 2.0, 40.0):
                assert reg_lower_inc_gamma(a, x) + special.gammaincc(a, x) == pytest.approx(
                    1.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            reg_lower_inc_gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            reg_lower_inc_gamma(1.0, -1.0)


class TestPoissonCdfAt:
    def test_single_term(self):
        assert poisson_cdf_at(1.0, 0) == pytest.approx(math.exp(-1.0), rel=1e-13)

    def test_direct_sum(self):
        assert poisson_cdf_at(2.0, 2) == pytest.approx(
            oracles.poisson_cdf_direct(2.0, 2), rel=1e-13)

    def test_negative_k(self):
        assert poisson_cdf_at(5.0, -1) == 0.0

    def test_large_rate_stable(self):
        expected = oracles.poisson_cdf_direct(1e4, 10_000)
        assert poisson_cdf_at(1e4, 10_000) == pytest.approx(expected, rel=1e-8)

    def test_non_integer_floors(self):
        assert poisson_cdf_at(3.0, 2.9) == poisson_cdf_at(3.0, 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            poisson_cdf_at(0.0, 1)


class TestGeneralizedGammaReductions:
    def test_reduces_to_weibull_when_d_equals_p(self):
        gg = GeneralizedGamma(0.8, 0.8, 1.3)
        wb = Weibull(0.8, 1.3)
        xs = np.linspace(0.01, 12.0, 50)
        assert np.allclose(gg.cdf(xs), wb.cdf(xs), atol=1e-10)

    def test_reduces_to_gamma_when_p_is_one(self):
        gg = GeneralizedGamma(2.5, 1.0, 0.5)
        gm = Gamma(2.5, 2.0)  # rate = 1/a
        xs = np.linspace(0.01, 12.0, 50)
        assert np.allclose(gg.cdf(xs), gm.cdf(xs), atol=1e-10)


class TestValidationAndJson:
    @pytest.mark.parametrize("bad", [
        lambda: LogNormal(0.0, 0.0),
        lambda: LogNormal(math.nan, 1.0),
        lambda: Weibull(-0.5, 1.0),
        lambda: Weibull(1.0, 0.0),
        lambda: GeneralizedGamma(0.0, 1.0, 1.0),
        lambda: Gamma(1.0, -1.0),
        lambda: Exponential(0.0),
        lambda: Poisson(-2.0),
    ])
    def test_bad_params_rejected(self, bad):
        with pytest.raises(ValueError):
            bad()

    def test_json_round_trip(self):
        for d in CONTINUOUS + [Poisson(2.5)]:
            assert marginal_from_json(d.to_json()) == d

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            marginal_from_json({"kind": "cauchy", "params": {}})

    def test_missing_and_extra_params(self):
        with pytest.raises(ValueError):
            marginal_from_json({"kind": "weibull", "params": {"alpha": 1.0}})
        with pytest.raises(ValueError):
            marginal_from_json({"kind": "weibull",
                                "params": {"alpha": 1.0, "eta": 1.0, "shift": 2.0}})
