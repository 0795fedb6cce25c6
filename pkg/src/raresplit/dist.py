"""Marginal laws and the special functions used by the level heuristics.

Each marginal exposes the CDF, the quantile, and a tail-stable quantile
``quantile_from_neg_log_tail`` that evaluates F^{-1}(1 - e^{-g}) (or
F^{-1}(e^{-g})) directly from g, so that tail masses far below machine
epsilon (g up to ~700) never round through ``1 - e^{-g}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "Marginal",
    "LogNormal",
    "Weibull",
    "GeneralizedGamma",
    "Gamma",
    "Exponential",
    "Poisson",
    "reg_lower_inc_gamma",
    "poisson_cdf_at",
    "marginal_from_json",
]

_LN2 = math.log(2.0)


def _require_positive(**params) -> None:
    for name, value in params.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be finite and > 0, got {value!r}")


def _as_float_array(x):
    a = np.asarray(x, dtype=float)
    scalar = a.ndim == 0
    return np.atleast_1d(a), scalar


def _maybe_scalar(a, scalar):
    return float(a[0]) if scalar else a


class Marginal:
    """Base class for the supported marginal laws.

    Continuous members have support (0, inf); ``Poisson`` is the only
    discrete member.  All parameter validation happens at construction,
    so the evaluation methods never raise on parameter grounds.
    """

    kind: str = ""
    discrete: bool = False

    def cdf(self, x):
        a, scalar = _as_float_array(x)
        return _maybe_scalar(self._cdf(a), scalar)

    def quantile(self, p):
        """Inverse CDF.  p=0 maps to the support infimum (0), p=1 to +inf."""
        a, scalar = _as_float_array(p)
        if np.any((a < 0) | (a > 1)):
            raise ValueError("quantile requires p in [0, 1]")
        with np.errstate(divide="ignore"):  # p = 1 legitimately maps to +inf
            return _maybe_scalar(self._ppf(a), scalar)

    def quantile_from_neg_log_tail(self, g, tail="upper"):
        """Evaluate F^{-1}(1 - e^{-g}) (tail="upper") or F^{-1}(e^{-g}) (tail="lower").

        The branch is chosen so neither 1 - e^{-g} nor e^{-g} is formed
        where it would lose precision: for g >= ln 2 the upper variant
        goes through the complementary quantile at mass e^{-g}.
        """
        a, scalar = _as_float_array(g)
        if np.any(a < 0):
            raise ValueError("g must be >= 0")
        if tail not in ("upper", "lower"):
            raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")
        out = np.empty_like(a)
        small = a < _LN2
        big = ~small
        with np.errstate(divide="ignore"):  # g = 0 on the lower tail is +inf
            if tail == "upper":
                out[small] = self._ppf(-np.expm1(-a[small]))
                out[big] = self._isf(np.exp(-a[big]))
            else:
                out[small] = self._isf(-np.expm1(-a[small]))
                out[big] = self._ppf(np.exp(-a[big]))
        return _maybe_scalar(out, scalar)

    # law-specific kernels, vectorized over their argument
    def _cdf(self, x):
        raise NotImplementedError

    def _ppf(self, p):
        raise NotImplementedError

    def _isf(self, q):
        """Complementary quantile: x with P[X > x] = q."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LogNormal(Marginal):
    """Log-normal with log-scale location ``mu`` and log-scale std ``sigma``."""

    mu: float
    sigma: float
    kind = "lognormal"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        _require_positive(sigma=self.sigma)

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = special.ndtr((np.log(x[pos]) - self.mu) / self.sigma)
        return out

    def _ppf(self, p):
        return np.exp(self.mu + self.sigma * special.ndtri(p))

    def _isf(self, q):
        # ndtri stays accurate down to the smallest normal doubles
        return np.exp(self.mu - self.sigma * special.ndtri(q))

    def to_json(self) -> dict:
        return {"kind": "lognormal", "params": {"mu": self.mu, "sigma": self.sigma}}


@dataclass(frozen=True)
class Weibull(Marginal):
    """Weibull with shape ``alpha`` and scale ``eta``."""

    alpha: float
    eta: float
    kind = "weibull"

    def __post_init__(self):
        _require_positive(alpha=self.alpha, eta=self.eta)

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -np.expm1(-((x[pos] / self.eta) ** self.alpha))
        return out

    def _ppf(self, p):
        return self.eta * (-np.log1p(-p)) ** (1.0 / self.alpha)

    def _isf(self, q):
        return self.eta * (-np.log(q)) ** (1.0 / self.alpha)

    def quantile_from_neg_log_tail(self, g, tail="upper"):
        # F^{-1}(1 - e^{-g}) = eta * g^{1/alpha} exactly; keep the closed form.
        if tail == "upper":
            a, scalar = _as_float_array(g)
            if np.any(a < 0):
                raise ValueError("g must be >= 0")
            return _maybe_scalar(self.eta * a ** (1.0 / self.alpha), scalar)
        return super().quantile_from_neg_log_tail(g, tail)

    def to_json(self) -> dict:
        return {"kind": "weibull", "params": {"alpha": self.alpha, "eta": self.eta}}


@dataclass(frozen=True)
class GeneralizedGamma(Marginal):
    """Stacy generalized Gamma: density ~ x^{d-1} exp(-(x/a)^p).

    Reduces to Weibull for d = p and to Gamma (rate 1/a) for p = 1.
    """

    d: float
    p: float
    a: float
    kind = "gengamma"

    def __post_init__(self):
        _require_positive(d=self.d, p=self.p, a=self.a)

    @property
    def _k(self) -> float:
        return self.d / self.p

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = special.gammainc(self._k, (x[pos] / self.a) ** self.p)
        return out

    def _ppf(self, p):
        return self.a * special.gammaincinv(self._k, p) ** (1.0 / self.p)

    def _isf(self, q):
        return self.a * special.gammainccinv(self._k, q) ** (1.0 / self.p)

    def to_json(self) -> dict:
        return {"kind": "gengamma", "params": {"d": self.d, "p": self.p, "a": self.a}}


@dataclass(frozen=True)
class Gamma(Marginal):
    """Gamma with ``shape`` and ``rate`` (density ~ x^{shape-1} e^{-rate x})."""

    shape: float
    rate: float
    kind = "gamma"

    def __post_init__(self):
        _require_positive(shape=self.shape, rate=self.rate)

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = special.gammainc(self.shape, self.rate * x[pos])
        return out

    def _ppf(self, p):
        return special.gammaincinv(self.shape, p) / self.rate

    def _isf(self, q):
        return special.gammainccinv(self.shape, q) / self.rate

    def to_json(self) -> dict:
        return {"kind": "gamma", "params": {"shape": self.shape, "rate": self.rate}}


@dataclass(frozen=True)
class Exponential(Marginal):
    """Exponential with ``rate``."""

    rate: float
    kind = "exponential"

    def __post_init__(self):
        _require_positive(rate=self.rate)

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -np.expm1(-self.rate * x[pos])
        return out

    def _ppf(self, p):
        return -np.log1p(-p) / self.rate

    def _isf(self, q):
        return -np.log(q) / self.rate

    def quantile_from_neg_log_tail(self, g, tail="upper"):
        # F^{-1}(1 - e^{-g}) = g / rate identically.
        if tail == "upper":
            a, scalar = _as_float_array(g)
            if np.any(a < 0):
                raise ValueError("g must be >= 0")
            return _maybe_scalar(a / self.rate, scalar)
        return super().quantile_from_neg_log_tail(g, tail)

    def to_json(self) -> dict:
        return {"kind": "exponential", "params": {"rate": self.rate}}


@dataclass(frozen=True)
class Poisson(Marginal):
    """Poisson counts with rate ``lam``; support {0, 1, 2, ...}.

    Only the CDF is defined: no caller needs the Poisson quantile, and the
    embedding applies to continuous marginals only.
    """

    lam: float
    kind = "poisson"
    discrete = True

    def __post_init__(self):
        _require_positive(lam=self.lam)

    def cdf(self, x):
        a, scalar = _as_float_array(x)
        return _maybe_scalar(poisson_cdf_at(self.lam, a), scalar)

    def quantile(self, p):
        raise ValueError("Poisson quantile is not supported (discrete law)")

    def quantile_from_neg_log_tail(self, g, tail="upper"):
        raise ValueError("Poisson has no continuous quantile; use the jump process directly")

    def to_json(self) -> dict:
        return {"kind": "poisson", "params": {"lambda": self.lam}}


def reg_lower_inc_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr <= 0):
        raise ValueError("shape a must be > 0")
    x_arr, scalar = _as_float_array(x)
    if np.any(x_arr < 0):
        raise ValueError("x must be >= 0")
    out = special.gammainc(a_arr, x_arr)
    return _maybe_scalar(out, scalar and np.ndim(a) == 0)


def poisson_cdf_at(lam, k):
    """P[Poisson(lam) <= floor(k)]; 0 for k < 0.  Stable for lam up to 1e4+."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValueError("lam must be > 0")
    k_arr, scalar = _as_float_array(k)
    k_floor = np.floor(k_arr)
    # pdtr evaluates the regularized upper incomplete gamma Q(k+1, lam)
    out = np.where(k_floor < 0, 0.0, special.pdtr(np.maximum(k_floor, 0.0), lam_arr))
    return _maybe_scalar(out, scalar and np.ndim(lam) == 0)


_KINDS = {
    "lognormal": LogNormal,
    "weibull": Weibull,
    "gengamma": GeneralizedGamma,
    "gamma": Gamma,
    "exponential": Exponential,
    "poisson": Poisson,
}

_PARAM_NAMES = {
    "lognormal": ("mu", "sigma"),
    "weibull": ("alpha", "eta"),
    "gengamma": ("d", "p", "a"),
    "gamma": ("shape", "rate"),
    "exponential": ("rate",),
    "poisson": ("lambda",),
}


def marginal_from_json(obj: dict) -> Marginal:
    """Build a marginal from {"kind": ..., "params": {...}} (natural units)."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("marginal JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    params = obj.get("params", {})
    names = _PARAM_NAMES[kind]
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"{kind} params missing {missing}")
    extra = [n for n in params if n not in names]
    if extra:
        raise ValueError(f"{kind} params has unknown fields {extra}")
    values = [float(params[n]) for n in names]
    if kind == "poisson":
        return Poisson(lam=values[0])
    return _KINDS[kind](*values)
