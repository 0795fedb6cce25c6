"""Baseline estimators: naive Monte Carlo and rate-scaled Poisson
importance sampling for weighted Poisson sums.
"""

from __future__ import annotations

import math
import time
import warnings

import numpy as np

from .model import ProblemSpec, importance
from .process import RngStream
from .stats import EstimateReport, bernoulli_report, relative_error, wnrv

__all__ = ["naive_mc", "poisson_is", "poisson_is_tilt"]

_CHUNK = 1 << 20  # fixed so the draw sequence is independent of m


def poisson_is_tilt(lambdas, weights, gamma: float) -> float:
    """Rate-scaling factor theta = gamma / sum_j w_j lambda_j (before clamping)."""
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    denom = float(weights @ lambdas)
    if denom == 0.0:
        raise ValueError("sum of w_i * lambda_i is zero; no tilt is defined")
    return gamma / denom


def naive_mc(problem: ProblemSpec, m: int, rng: RngStream) -> EstimateReport:
    """Plain Monte Carlo: m direct draws of X, fraction with S(X) <= gamma.

    Continuous coordinates are drawn by inverse transform from uniforms;
    Poisson coordinates natively.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = problem.n
    gen = rng.gen
    poisson = problem.kind == "poisson"
    rates = problem.rates() if poisson else None

    t0 = time.perf_counter()
    hits = 0
    done = 0
    while done < m:
        c = min(_CHUNK, m - done)
        if poisson:
            x = gen.poisson(rates, size=(c, n)).astype(float)
        else:
            u = gen.random((c, n))
            x = np.empty((c, n))
            for i, marginal in enumerate(problem.marginals):
                x[:, i] = marginal.quantile(u[:, i])
        hits += int(np.count_nonzero(importance(problem.importance, x) <= problem.gamma))
        done += c
    wall = time.perf_counter() - t0
    return bernoulli_report("naive", hits, m, wall, seed=rng.seed)


def poisson_is(lambdas, weights, gamma: float, m: int, rng: RngStream) -> EstimateReport:
    """Importance sampling for P[sum_j w_j X_j <= gamma], X_j ~ Poisson(lambda_j).

    Every rate is scaled by theta = gamma / sum_j w_j lambda_j so the tilted
    mean of the weighted sum equals gamma; each sample is reweighted by the
    likelihood ratio prod_j exp(-lambda_j (1 - theta)) theta^{-X_j},
    accumulated in log space.  theta >= 1 (gamma not rare) is clamped to 1,
    which reduces the estimator to naive MC.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if lambdas.ndim != 1 or lambdas.shape != weights.shape:
        raise ValueError("lambdas and weights must be 1-d and the same length")
    if np.any(lambdas <= 0) or np.any(weights < 0):
        raise ValueError("rates must be > 0 and weights >= 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    theta = poisson_is_tilt(lambdas, weights, gamma)
    if theta >= 1.0:
        warnings.warn(
            f"theta = gamma / sum(w*lambda) = {theta:.4g} >= 1; clamping to 1 "
            "(the event is not rare and the estimator reduces to naive MC)",
            stacklevel=2)
        theta = 1.0

    gen = rng.gen
    lam_total = float(lambdas.sum())
    log_theta = math.log(theta) if theta < 1.0 else 0.0
    const = -lam_total * (1.0 - theta)

    t0 = time.perf_counter()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < m:
        c = min(_CHUNK, m - done)
        x = gen.poisson(lambdas * theta, size=(c, lambdas.size))
        inside = (x @ weights) <= gamma
        log_w = const - log_theta * x.sum(axis=1)
        vals = np.where(inside, np.exp(log_w), 0.0)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += c
    wall = time.perf_counter() - t0

    mean = total / m
    variance = (total_sq - m * mean * mean) / (m - 1) if m > 1 else 0.0
    variance = max(variance, 0.0)
    re = relative_error(mean, variance, m)
    return EstimateReport(
        method="is", mean=mean, variance=variance, re=re,
        wnrv=None if re is None else wnrv(re, wall),
        wall_seconds=wall, m=m, seed=rng.seed,
    )
