import math

import pytest

from raresplit.dist import Exponential, LogNormal, Poisson, Weibull
from raresplit.model import OrderedPartialSum, ProblemSpec, Ratio, Sum, WeightedSum
from raresplit.process import RngStream
from raresplit.stats import EstimateReport, oracle_exact, relative_error, wnrv

import oracles


class TestRelativeError:
    def test_zero_variance(self):
        assert relative_error(0.5, 0.0, 100) == 0.0

    def test_hand_arithmetic(self):
        # sqrt(1.6e-7) / (1e-4 * sqrt(200)) = 4e-4 / 1.41421e-3
        got = relative_error(1e-4, 1.6e-7, 200)
        assert got == pytest.approx(math.sqrt(1.6e-7) / (1e-4 * math.sqrt(200)), rel=1e-12)
        assert got == pytest.approx(0.2828, abs=5e-5)

    def test_zero_mean_is_absent(self):
        assert relative_error(0.0, 1e-3, 10) is None

    def test_validation(self):
        with pytest.raises(ValueError):
            relative_error(0.5, -1.0, 10)
        with pytest.raises(ValueError):
            relative_error(0.5, 1.0, 0)


class TestWnrv:
    def test_zero_re(self):
        assert wnrv(0.0, 100.0) == 0.0

    def test_arithmetic(self):
        assert wnrv(0.02, 100.0) == pytest.approx(0.04, rel=1e-12)

    def test_published_consistency(self):
        # a published row with RE 58.1% and WNRV 84.63 implies ~250.7 s
        implied_seconds = 84.63 / 0.581 ** 2
        assert wnrv(0.581, implied_seconds) == pytest.approx(84.63, rel=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            wnrv(-0.1, 1.0)


class TestOracleExact:
    def test_exponential_sum(self):
        problem = ProblemSpec((Exponential(1.0),) * 4, ("I",) * 4, Sum(),
                              0.1, "continuous")
        got = oracle_exact(problem)
        assert got == pytest.approx(oracles.reg_lower_inc_gamma_series(4, 0.1), rel=1e-11)

    def test_exponential_sum_rate_scaling(self):
        problem = ProblemSpec((Exponential(2.0),) * 3, ("I",) * 3, Sum(),
                              0.5, "continuous")
        assert oracle_exact(problem) == pytest.approx(
            oracles.reg_lower_inc_gamma_series(3, 1.0), rel=1e-11)

    def test_weighted_poisson_enumeration(self):
        marginals = (Poisson(1.0), Poisson(1.0))
        problem = ProblemSpec(marginals, ("I", "I"), WeightedSum((1.0, 2.0)),
                              2.0, "poisson")
        assert oracle_exact(problem) == pytest.approx(3.5 * math.exp(-2.0), rel=1e-11)

    def test_poisson_gamma_zero(self):
        marginals = (Poisson(0.7), Poisson(1.3))
        problem = ProblemSpec(marginals, ("I", "I"), WeightedSum((1.0, 1.0)),
                              0.0, "poisson")
        assert oracle_exact(problem) == pytest.approx(math.exp(-2.0), rel=1e-11)

    def test_enumeration_cap_reports_unsupported(self):
        marginals = tuple(Poisson(1.0 + 0.2 * i) for i in range(12))
        problem = ProblemSpec(marginals, ("I",) * 12,
                              WeightedSum(tuple(float(i) for i in range(1, 13))),
                              40.0, "poisson")
        assert oracle_exact(problem, max_lattice=1000) is None

    def test_ratio_quadrature_closed_form(self):
        # exp/exp ratio has the closed form 1 - e^{-gamma eta} / (1 + gamma)
        problem = ProblemSpec((Exponential(1.0), Exponential(1.0)), ("I", "D"),
                              Ratio(0.3), 0.5, "continuous")
        expected = 1.0 - math.exp(-0.5 * 0.3) / 1.5
        assert oracle_exact(problem) == pytest.approx(expected, rel=1e-8)

    def test_ratio_quadrature_lognormal_vs_mc(self):
        import numpy as np
        problem = ProblemSpec((LogNormal(1.0, 0.8), LogNormal(0.0, 0.6)), ("I", "D"),
                              Ratio(0.2), 0.8, "continuous")
        exact = oracle_exact(problem)
        gen = RngStream(13).gen
        m = 400_000
        x1 = np.exp(1.0 + 0.8 * gen.standard_normal(m))
        x2 = np.exp(0.6 * gen.standard_normal(m))
        est = np.mean(x1 / (x2 + 0.2) <= 0.8)
        se = math.sqrt(est * (1 - est) / m)
        assert abs(exact - est) < 3 * se

    def test_unsupported_families(self):
        mixed = ProblemSpec((Exponential(1.0), Weibull(0.5, 1.0)), ("I", "I"),
                            Sum(), 1.0, "continuous")
        assert oracle_exact(mixed) is None
        ordered = ProblemSpec((Weibull(0.5, 1.0),) * 4, ("I",) * 4,
                              OrderedPartialSum(2), 1.0, "continuous")
        assert oracle_exact(ordered) is None
        ratio3 = ProblemSpec((LogNormal(0, 1),) * 3, ("I", "D", "D"),
                             Ratio(0.1), 0.5, "continuous")
        assert oracle_exact(ratio3) is None

    def test_gamma_at_or_below_zero(self):
        problem = ProblemSpec((Exponential(1.0),) * 2, ("I", "I"), Sum(),
                              0.0, "continuous")
        assert oracle_exact(problem) == 0.0


class TestEstimateReport:
    def make(self):
        return EstimateReport(
            method="split", mean=1e-4, variance=1.6e-7,
            re=relative_error(1e-4, 1.6e-7, 200),
            wnrv=wnrv(relative_error(1e-4, 1.6e-7, 200), 12.5),
            wall_seconds=12.5, m=200, s=3000,
            levels=[0.25, 0.5, 1.0], per_level_survival=[0.1, 0.12, 0.3],
            seed=42, schedule_seconds=0.25)

    def test_json_round_trip_lossless(self):
        report = self.make()
        d = report.to_json_dict()
        again = EstimateReport.from_json_dict(d)
        assert again == report
        assert again.to_json_dict() == d

    def test_absent_re_round_trips(self):
        report = EstimateReport(method="naive", mean=0.0, variance=0.0,
                                re=None, wnrv=None, wall_seconds=1.0, m=10)
        again = EstimateReport.from_json_dict(report.to_json_dict())
        assert again.re is None and again.wnrv is None

    def test_validation(self):
        with pytest.raises(ValueError):
            EstimateReport(method="x", mean=-0.1, variance=0.0, re=None,
                           wnrv=None, wall_seconds=1.0, m=2)
        with pytest.raises(ValueError):
            EstimateReport(method="x", mean=0.5, variance=-1.0, re=None,
                           wnrv=None, wall_seconds=1.0, m=2)
        with pytest.raises(ValueError):
            EstimateReport(method="x", mean=0.5, variance=0.1, re=0.2,
                           wnrv=99.0, wall_seconds=1.0, m=2)

    def test_missing_field_rejected(self):
        d = self.make().to_json_dict()
        d.pop("seed")
        with pytest.raises(ValueError):
            EstimateReport.from_json_dict(d)
