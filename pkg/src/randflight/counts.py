"""Generalized Poisson laws for the number of direction changes.

First family (drives model X, d >= 2)::

    P{N = k} = (lt)^{k(d-1)} / [Gamma((k+1)(d-1)) E_{d-1,d-1}((lt)^{d-1})]

Second family (drives model Y, d >= 3)::

    P{N = k} = (lt)^{k(d-2)} / [Gamma((d-2)k+d-1) E_{d-2,d-1}((lt)^{d-2})]

with ``lt = lambda * t``.  For d = 2 the first family is Poisson(lt).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from randflight.errors import ConfigError, SeriesError
from randflight.specfun import (
    SeriesControl,
    default_control,
    mittag_leffler,
    multi_index_ml,
    sum_series,
)

_CDF_TARGET = 1.0 - 1e-12
_TAIL_NEGLIGIBLE = 1e-18


class Family(str, enum.Enum):
    FIRST = "first"
    SECOND = "second"
    POISSON = "poisson"


@dataclass(frozen=True)
class CountDistribution:
    family: Family
    d: int
    lam: float
    t: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.FIRST and self.d < 2:
            raise ConfigError("First family requires dim ≥ 2")
        if self.family is Family.SECOND and self.d < 3:
            raise ConfigError("Second family requires dim ≥ 3")
        if not (self.lam > 0 and self.t > 0):
            raise ConfigError("lambda and t must be positive")

    @property
    def lt(self) -> float:
        return self.lam * self.t

    def _shape(self) -> tuple[int, int, int]:
        """(power step, Gamma step, Gamma offset): term k is
        x^{k*step} / Gamma(gstep*k + goff)."""
        d = self.d
        if self.family is Family.FIRST:
            return d - 1, d - 1, d - 1
        if self.family is Family.SECOND:
            return d - 2, d - 2, d - 1
        return 1, 1, 1

    @cached_property
    def log_normalizer(self) -> float:
        if self.family is Family.POISSON:
            return self.lt
        step, gstep, goff = self._shape()
        return math.log(mittag_leffler(gstep, goff, self.lt**step))

    def log_pmf(self, k: int) -> float:
        if k < 0:
            return -math.inf
        step, gstep, goff = self._shape()
        return k * step * math.log(self.lt) - math.lgamma(gstep * k + goff) - self.log_normalizer

    def pmf(self, k: int) -> float:
        return math.exp(self.log_pmf(k))

    @cached_property
    def _cdf(self) -> np.ndarray:
        ctl = default_control()
        probs = []
        total = 0.0
        for k in range(ctl.max_terms):
            p = self.pmf(k)
            probs.append(p)
            total += p
            if total >= _CDF_TARGET and p < _TAIL_NEGLIGIBLE:
                cdf = np.cumsum(probs)
                cdf.setflags(write=False)
                return cdf
        raise SeriesError(
            f"cumulative mass {total!r} short of {_CDF_TARGET} after {ctl.max_terms} terms"
        )

    def support_size(self) -> int:
        return len(self._cdf)

    def pmf_table(self) -> np.ndarray:
        return np.diff(self._cdf, prepend=0.0)

    def mean(self) -> float:
        p = self.pmf_table()
        return float(np.dot(np.arange(len(p)), p))

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.sample_many(rng, 1)[0])

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws; the cached CDF is rescaled so its last entry is 1."""
        cdf = self._cdf
        u = rng.random(size) * cdf[-1]
        return np.searchsorted(cdf, u, side="right").astype(np.int64)


def pmf(dist: CountDistribution, k: int) -> float:
    return dist.pmf(k)


def sample(dist: CountDistribution, rng: np.random.Generator) -> int:
    return dist.sample(rng)


def pmf_multi_index(dist: CountDistribution, k: int) -> float:
    return math.exp(log_pmf_multi_index(dist, k))


def log_pmf_multi_index(dist: CountDistribution, k: int) -> float:
    """The same log-pmf written through a multi-index Mittag-Leffler normalizer.

    Obtained from the first form by the Gamma duplication formula; kept as a
    separate evaluation route so the two can be compared.
    """
    d = dist.d
    half = dist.lt / 2
    if dist.family is Family.FIRST:
        a = (d - 1) / 2
        num = k * (d - 1) * math.log(half) - math.lgamma(a * k + d / 2) - math.lgamma(a * k + a)
        norm = multi_index_ml(a, d / 2, a, a, half ** (d - 1))
    elif dist.family is Family.SECOND:
        a = d / 2 - 1
        num = (
            k * (d - 2) * math.log(half)
            - math.lgamma(a * k + d / 2)
            - math.lgamma(a * k + (d - 1) / 2)
        )
        norm = multi_index_ml(a, d / 2, a, (d - 1) / 2, half ** (d - 2))
    else:
        raise ConfigError("multi-index form exists only for the First/Second families")
    return num - math.log(norm)


def pgf(d: int, lam: float, t: float, u: float, ctl: SeriesControl | None = None) -> float:
    """G_d(u, t) = E_{d-1,d-1}((lt)^{d-1} u) / E_{d-1,d-1}((lt)^{d-1})."""
    if d < 2:
        raise ConfigError("First family requires dim ≥ 2")
    if not 0 <= u <= 1:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    x = (lam * t) ** (d - 1)
    return mittag_leffler(d - 1, d - 1, x * u, ctl) / mittag_leffler(d - 1, d - 1, x, ctl)


def _falling(n: int, m: int) -> int:
    out = 1
    for j in range(m):
        out *= n - j
    return out


def pgf_ode_residual(d: int, lam: float, t: float, u: float, ctl: SeriesControl | None = None) -> float:
    """Residual of f^{(d-1)}(u) = (lt)^{d-1} f(u) for f(u) = u^{d-2} G_d(u^{d-1}, t).

    f is expanded as sum_k C_k u^{n_k}, n_k = (k+1)(d-1) - 1; the left side is
    differentiated term by term with integer falling factorials.
    """
    if not 2 <= d <= 6:
        raise ValueError("pgf ODE check is implemented for 2 <= d <= 6")
    if not 0 < u < 1:
        raise ValueError("u must lie in (0, 1)")
    m = d - 1
    x = (lam * t) ** m
    log_norm = math.log(mittag_leffler(m, m, x, ctl))
    logx, logu = math.log(x), math.log(u)

    def coeff(k):
        return k * logx - math.lgamma((k + 1) * m) - log_norm

    def f_term(k):
        n = (k + 1) * m - 1
        return math.exp(coeff(k) + n * logu)

    def lhs_term(k):
        n = (k + 1) * m - 1
        ff = _falling(n, m)
        if ff == 0:
            return 0.0
        return ff * math.exp(coeff(k) + (n - m) * logu)

    rhs = x * sum_series(f_term, ctl).value
    lhs = sum_series(lhs_term, ctl, min_terms=2).value
    return abs(lhs - rhs) / (abs(rhs) + 1.0)
