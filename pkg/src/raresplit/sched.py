"""Level-selection heuristics targeting per-level survival p_bar.

Two constructions are provided.  ``inverse_ccdf_schedule`` is universally
applicable: it runs a pilot splitting pass on equally spaced times,
log-linearly interpolates the estimated survival curve, and inverts it at
p_bar, p_bar^2, ....  ``lower_bound_schedule`` applies to sum-type
importance functions only: it places level i at the root of an analytic
product lower bound on survival equal to p_bar^i, which needs no sampling
at all.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .dist import poisson_cdf_at
from .model import OrderedPartialSum, ProblemSpec, Ratio, Sum
from .process import RngStream
from .split import LevelSchedule, run_splitting

__all__ = ["SchedulingError", "lower_bound_schedule", "inverse_ccdf_schedule"]

_MAX_LEVELS = 10_000
_ROOT_LO = 1e-12


class SchedulingError(RuntimeError):
    """Raised when a schedule cannot be constructed from the given inputs."""


def _log_bound_continuous(problem: ProblemSpec):
    """log of prod_j P[X_j(t) <= c_j] for the component-wise survival bound.

    c_j is gamma/n for a plain sum, gamma/n_bar for ordered partial sums and
    gamma/(w_j n) for weighted sums.  Each factor equals the Gamma(t, 1) CDF
    at -ln(1 - F_j(c_j)).
    """
    n = problem.n
    gamma = problem.gamma
    if isinstance(problem.importance, Sum):
        thresholds = [gamma / n] * n
    elif isinstance(problem.importance, OrderedPartialSum):
        thresholds = [gamma / problem.importance.n_bar] * n
    else:
        thresholds = [gamma / (w * n) if w > 0 else math.inf
                      for w in problem.importance.weights]

    xs = []
    for m, c in zip(problem.marginals, thresholds):
        if math.isinf(c):
            continue  # unconstrained factor, contributes 1
        F = m.cdf(c)
        if F >= 1.0:
            continue
        x = -math.log1p(-F)
        if x <= 0.0:
            raise SchedulingError(
                f"threshold {c!r} is below the representable support of {m!r}; "
                "the component-wise bound is identically 0")
        xs.append(x)
    if not xs:
        return lambda t: 0.0  # gamma so large that the bound is identically 1
    xs = np.asarray(xs)

    def log_bound(t):
        return float(np.sum(np.log(special.gammainc(t, xs))))

    return log_bound


def _log_bound_poisson(problem: ProblemSpec):
    """log of prod_j P[N_j(t) <= floor(gamma / (w_j n))] for Poisson counts."""
    n = problem.n
    gamma = problem.gamma
    rates = problem.rates()
    weights = problem.importance.weight_array()
    ks, lams = [], []
    for lam, w in zip(rates, weights):
        if w <= 0:
            continue
        k = math.floor(gamma / (w * n))
        if k < 0:
            raise SchedulingError(
                "gamma/(w*n) is negative; the component-wise bound is identically 0")
        ks.append(float(k))
        lams.append(lam)
    if not ks:
        raise SchedulingError("all weights are zero; the bound is identically 1")
    ks = np.asarray(ks)
    lams = np.asarray(lams)

    def log_bound(t):
        return float(np.sum(np.log(poisson_cdf_at(lams * t, ks))))

    return log_bound


def lower_bound_schedule(problem: ProblemSpec, p_bar: float = 0.1,
                         t_max: float = 1.0) -> LevelSchedule:
    """Levels from the analytic component-wise survival lower bound.

    Level i solves  prod_j B_j(t_i) = p_bar^i  for t_i, where B_j(t) lower
    bounds the probability that coordinate j stays small enough at time t.
    Roots are generated until they pass ``t_max``; the final level is then
    pinned to exactly 1.  Ratio problems have no product bound of this form,
    use ``inverse_ccdf_schedule`` for those.
    """
    if isinstance(problem.importance, Ratio):
        raise SchedulingError(
            "lower_bound_schedule does not apply to ratio problems; "
            "use inverse_ccdf_schedule instead")
    if not (0.0 < p_bar < 1.0):
        raise ValueError("p_bar must lie in (0, 1)")
    if not (0.0 < t_max <= 1.0):
        raise ValueError("t_max must lie in (0, 1]")

    if problem.kind == "poisson":
        log_bound = _log_bound_poisson(problem)
    else:
        log_bound = _log_bound_continuous(problem)

    log_p = math.log(p_bar)
    times = []
    for i in range(1, _MAX_LEVELS + 1):
        target = i * log_p
        if log_bound(t_max) > target:
            break  # the next root lies beyond t_max
        root = brentq(lambda t: log_bound(t) - target, _ROOT_LO, t_max, xtol=1e-14)
        if root >= t_max * (1.0 - 1e-12):
            break
        times.append(root)
    else:
        raise SchedulingError(f"more than {_MAX_LEVELS} levels requested; check p_bar")
    times.append(1.0)
    return LevelSchedule(tuple(times), p_bar)


def _invert_decreasing(ts, ys, y):
    """t where the piecewise-linear curve through (ts, ys) equals y.

    ``ys`` is nonincreasing with ys[0] >= y > ys[-1]; flat segments resolve
    to their left endpoint.
    """
    for j in range(len(ts) - 1):
        if ys[j + 1] <= y <= ys[j]:
            if ys[j] == ys[j + 1]:
                return ts[j]
            return ts[j] + (y - ys[j]) * (ts[j + 1] - ts[j]) / (ys[j + 1] - ys[j])
    raise SchedulingError(f"target {y!r} outside the interpolated survival curve")


def inverse_ccdf_schedule(problem: ProblemSpec, rng: RngStream, *,
                          l_pilot: int = 12, s_pilot: int = 3000,
                          p_bar: float = 0.1) -> LevelSchedule:
    """Levels by inverting a pilot estimate of the survival curve.

    A pilot splitting pass at equally spaced times l/l_pilot estimates the
    survival products; the points (t, log survival) are linearly
    interpolated and inverted at p_bar^1, p_bar^2, ... until the curve's
    terminal value is reached, and the final level is pinned to exactly 1.
    """
    if l_pilot < 2:
        raise ValueError("l_pilot must be >= 2")
    if s_pilot < 100:
        raise ValueError("s_pilot must be >= 100")
    if not (0.0 < p_bar < 1.0):
        raise ValueError("p_bar must lie in (0, 1)")

    pilot_times = tuple((l + 1) / l_pilot for l in range(l_pilot))
    pilot = run_splitting(problem, LevelSchedule(pilot_times, p_bar), s_pilot, rng)
    if pilot.extinct_at is not None and pilot.extinct_at < l_pilot - 1:
        raise SchedulingError(
            f"pilot run went extinct at level {pilot.extinct_at + 1}/{l_pilot}; "
            "increase s_pilot or decrease l_pilot")

    counts = pilot.survivor_counts
    ts = [0.0]
    log_surv = [0.0]
    acc = 0.0
    for t, k in zip(pilot_times, counts):
        if k == 0:
            break  # only the extinct final level can land here
        acc += math.log(k / s_pilot)
        ts.append(t)
        log_surv.append(acc)
    if len(ts) < 2:
        raise SchedulingError("pilot produced no usable levels; increase s_pilot")

    log_p = math.log(p_bar)
    end = log_surv[-1]
    times = []
    level = 1
    # the 1e-9 slack keeps a target that matches the curve's end (up to
    # accumulation roundoff) from spawning a zero-width final step
    while level * log_p > end + 1e-9:
        t = _invert_decreasing(ts, log_surv, level * log_p)
        if t < 1.0 - 1e-12 and (not times or t > times[-1]):
            times.append(t)
        level += 1
        if level > _MAX_LEVELS:
            raise SchedulingError(f"more than {_MAX_LEVELS} levels requested; check p_bar")
    times.append(1.0)
    return LevelSchedule(tuple(times), p_bar)
