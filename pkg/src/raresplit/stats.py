"""Replication statistics, the report container, and exact oracles.

RE follows the across-replication coefficient of variation
sqrt(Var) / (mean * sqrt(m)); WNRV is RE^2 times wall-clock seconds.
``oracle_exact`` returns exact (or quadrature-exact) values for the
problem families where an independent answer is computable, and is used
by the tests and the CLI ``verify`` paths as the second route against
the sampled estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import integrate, special

from .dist import Exponential
from .model import ProblemSpec, Ratio, Sum

__all__ = ["EstimateReport", "relative_error", "wnrv", "oracle_exact"]

REPORT_FIELDS = (
    "method", "mean", "variance", "re", "wnrv", "wall_seconds",
    "m", "s", "levels", "per_level_survival", "seed", "schedule_seconds",
)


def relative_error(mean: float, variance: float, m: int):
    """sqrt(variance) / (mean * sqrt(m)); None (absent) when mean <= 0."""
    if variance < 0:
        raise ValueError("variance must be >= 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    if mean <= 0:
        return None
    return math.sqrt(variance) / (mean * math.sqrt(m))


def wnrv(re: float, wall_seconds: float) -> float:
    """Work-normalized relative variance: RE^2 * seconds."""
    if re < 0 or wall_seconds < 0:
        raise ValueError("re and wall_seconds must be >= 0")
    return re * re * wall_seconds


@dataclass
class EstimateReport:
    """Outcome of one estimation run: point estimate plus dispersion and cost.

    ``re`` and ``wnrv`` are None when the mean is zero (relative error is
    undefined there).  ``schedule_seconds`` carries the level-construction
    time separately so the cost can be accounted either way.
    """

    method: str
    mean: float
    variance: float
    re: float | None
    wnrv: float | None
    wall_seconds: float
    m: int
    s: int | None = None
    levels: list | None = None
    per_level_survival: list | None = None
    seed: int | None = None
    schedule_seconds: float | None = None

    def __post_init__(self):
        # IS likelihood ratios can push a tiny-sample mean above 1, so only
        # nonnegativity is enforced here
        if self.mean < 0:
            raise ValueError("mean must be >= 0")
        if self.variance < 0:
            raise ValueError("variance must be >= 0")
        if self.re is not None and self.wall_seconds is not None:
            expected = wnrv(self.re, self.wall_seconds)
            if self.wnrv is not None and not math.isclose(self.wnrv, expected, rel_tol=1e-9, abs_tol=1e-300):
                raise ValueError("wnrv inconsistent with re and wall_seconds")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in REPORT_FIELDS}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EstimateReport":
        # schedule_seconds is this implementation's addition; accept
        # reports that carry only the 11 base keys
        missing = [k for k in REPORT_FIELDS if k not in obj and k != "schedule_seconds"]
        if missing:
            raise ValueError(f"report JSON missing fields {missing}")
        return cls(**{k: obj.get(k) for k in REPORT_FIELDS})


def make_report(method, estimates, wall_seconds, *, s=None, levels=None,
                per_level=None, seed=None, schedule_seconds=None) -> EstimateReport:
    """Summarize a replication sample into a report."""
    est = np.asarray(estimates, dtype=float)
    m = est.size
    mean = float(est.mean())
    variance = float(est.var(ddof=1)) if m > 1 else 0.0
    re = relative_error(mean, variance, m)
    return EstimateReport(
        method=method,
        mean=mean,
        variance=variance,
        re=re,
        wnrv=None if re is None else wnrv(re, wall_seconds),
        wall_seconds=wall_seconds,
        m=m,
        s=s,
        levels=None if levels is None else [float(t) for t in levels],
        per_level_survival=None if per_level is None else [float(p) for p in per_level],
        seed=seed,
        schedule_seconds=schedule_seconds,
    )


def bernoulli_report(method, hits, m, wall_seconds, *, seed=None) -> EstimateReport:
    """Report for an indicator-mean estimator with ``hits`` successes out of m."""
    mean = hits / m
    variance = mean * (1.0 - mean) * m / (m - 1) if m > 1 else 0.0
    re = relative_error(mean, variance, m)
    return EstimateReport(
        method=method, mean=mean, variance=variance, re=re,
        wnrv=None if re is None else wnrv(re, wall_seconds),
        wall_seconds=wall_seconds, m=m, seed=seed,
    )


def _weighted_poisson_enumeration(rates, weights, gamma, max_points) -> float | None:
    """Sum the joint pmf over the lattice {k : sum_j w_j k_j <= gamma}.

    Depth-first over coordinates with partial-sum pruning; returns None when
    the lattice exceeds ``max_points``.
    """
    n = len(rates)
    log_lam = [math.log(r) for r in rates]
    base = -float(np.sum(rates))
    budget = [int(max_points)]
    total = [0.0]

    def visit(j, remaining, logp):
        if j == n:
            budget[0] -= 1
            if budget[0] < 0:
                raise OverflowError
            total[0] += math.exp(logp)
            return
        w = weights[j]
        kmax = int(math.floor(remaining / w + 1e-12)) if w > 0 else None
        if kmax is None:
            # zero weight: the coordinate is unconstrained, its pmf sums to 1
            visit(j + 1, remaining, logp)
            return
        lk = 0.0
        for k in range(kmax + 1):
            if k > 0:
                lk += log_lam[j] - math.log(k)
            visit(j + 1, remaining - k * w, logp + lk)

    try:
        visit(0, float(gamma), base)
    except OverflowError:
        return None
    return total[0]


def oracle_exact(problem: ProblemSpec, max_lattice: int = 10 ** 8) -> float | None:
    """Exact/semi-exact value of P[S(X) <= gamma] for supported families.

    Supported: (a) plain sum of i.i.d. exponentials (Gamma CDF);
    (b) weighted sums of Poisson counts by lattice enumeration;
    (c) two-coordinate ratios by adaptive quadrature over the denominator's
    probability scale.  Returns None for anything else.
    """
    gamma = problem.gamma
    if problem.kind == "poisson":
        if gamma < 0:
            return 0.0
        return _weighted_poisson_enumeration(
            problem.rates(), problem.importance.weight_array(), gamma, max_lattice)

    if isinstance(problem.importance, Sum):
        rates = {m.rate for m in problem.marginals if isinstance(m, Exponential)}
        if len(rates) == 1 and all(isinstance(m, Exponential) for m in problem.marginals):
            if gamma <= 0:
                return 0.0
            rate = rates.pop()
            return float(special.gammainc(problem.n, rate * gamma))
        return None

    if isinstance(problem.importance, Ratio) and problem.n == 2:
        if gamma <= 0:
            return 0.0
        f1 = problem.marginals[0]
        q2 = problem.marginals[1]
        eta = problem.importance.eta

        def integrand(u):
            return f1.cdf(gamma * (q2.quantile(u) + eta))

        value, _err = integrate.quad(integrand, 0.0, 1.0, limit=200)
        return float(min(max(value, 0.0), 1.0))

    return None
