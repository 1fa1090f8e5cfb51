"""Special-function kernel: log-Gamma, Mittag-Leffler (two-parameter and
multi-index) and the modified Bessel functions I_0, I_1.

Every series is summed in increasing order with Neumaier compensation and
stops at the first term with ``|term| <= rel_tol * |partial_sum|``.  Running
out of terms raises :class:`SeriesError`; nothing is silently truncated.

All functions accept floats or numpy arrays for the argument ``x``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from randflight.errors import PoleError, SeriesError

MAX_TERMS_ENV = "RANDFLIGHT_MAX_TERMS"


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for adaptive series summation."""

    rel_tol: float = 1e-14
    max_terms: int = 512

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_terms) < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


def default_control() -> SeriesControl:
    """Default control, with ``max_terms`` overridable from the environment."""
    raw = os.environ.get(MAX_TERMS_ENV)
    if raw is None or raw.strip() == "":
        return SeriesControl()
    return SeriesControl(max_terms=int(raw))


class SeriesSum(NamedTuple):
    value: np.ndarray | float
    terms: int
    last: np.ndarray | float


def sum_series(
    term: Callable[[int], np.ndarray | float],
    ctl: SeriesControl | None = None,
    start: int = 0,
    min_terms: int = 1,
) -> SeriesSum:
    """Sum ``term(start) + term(start+1) + ...`` pointwise.

    ``term`` may return a scalar or an array; the stopping rule must hold at
    every point.  ``min_terms`` guards series whose leading terms vanish.
    """
    ctl = ctl or default_control()
    s = c = None
    t = 0.0
    for i in range(ctl.max_terms):
        t = np.asarray(term(start + i), dtype=float)
        if s is None:
            s = t.copy()
            c = np.zeros_like(t)
        else:
            u = s + t
            big = np.abs(s) >= np.abs(t)
            c = c + np.where(big, (s - u) + t, (t - u) + s)
            s = u
        if i + 1 >= min_terms:
            total = s + c
            if not np.all(np.isfinite(total)):
                raise SeriesError("non-finite partial sum")
            if np.all(np.abs(t) <= ctl.rel_tol * np.abs(total)):
                return SeriesSum(_unwrap(total), i + 1, _unwrap(t))
    raise SeriesError(
        f"series did not converge to rel_tol={ctl.rel_tol} within {ctl.max_terms} terms"
    )


def _unwrap(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_ln(x: float) -> tuple[float, int]:
    """Return ``(ln|Gamma(x)|, sign(Gamma(x)))``."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x > 0:
        return math.lgamma(x), 1
    # Gamma alternates sign between consecutive negative integers.
    sign = -1 if math.floor(-x) % 2 == 0 else 1
    return math.lgamma(x), sign


def log_rgamma(x: float) -> tuple[float, int]:
    """``(ln|1/Gamma(x)|, sign)``; sign is 0 at the poles of Gamma."""
    if _is_pole(float(x)):
        return -math.inf, 0
    lg, sgn = gamma_ln(x)
    return -lg, sgn


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x), exactly 0.0 at non-positive integers."""
    la, sgn = log_rgamma(x)
    if sgn == 0:
        return 0.0
    return sgn * math.exp(la)


def _log_arg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be non-negative")
    with np.errstate(divide="ignore"):
        return np.log(x)


def _power_term(k: int, logx, log_coeff: float, sign: int = 1):
    if sign == 0:
        return np.zeros_like(logx)
    if k == 0:
        return np.full_like(logx, sign * math.exp(log_coeff))
    return sign * np.exp(k * logx + log_coeff)


def mittag_leffler(alpha: float, beta: float, x, ctl: SeriesControl | None = None):
    """E_{alpha,beta}(x) = sum_k x^k / Gamma(alpha*k + beta), for x >= 0."""
    if not (alpha > 0 and beta > 0):
        raise ValueError(f"need alpha > 0 and beta > 0, got ({alpha}, {beta})")
    logx = _log_arg(x)

    def term(k):
        return _power_term(k, logx, -math.lgamma(alpha * k + beta))

    return sum_series(term, ctl).value


def multi_index_ml(a1: float, b1: float, a2: float, b2: float, x, ctl: SeriesControl | None = None):
    """sum_k x^k / (Gamma(a1*k + b1) * Gamma(a2*k + b2)), for x >= 0.

    Index order follows the subscript order E_{a1,b1,a2,b2}.
    """
    if not (a1 > 0 and a2 > 0):
        raise ValueError(f"need a1 > 0 and a2 > 0, got ({a1}, {a2})")
    logx = _log_arg(x)

    def term(k):
        l1, s1 = log_rgamma(a1 * k + b1)
        l2, s2 = log_rgamma(a2 * k + b2)
        return _power_term(k, logx, l1 + l2, s1 * s2)

    return sum_series(term, ctl).value


def bessel_i(nu: int, x, ctl: SeriesControl | None = None):
    """Modified Bessel function I_nu(x) for nu in {0, 1} and x >= 0."""
    if nu not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {nu}")
    log_half = _log_arg(x) - math.log(2.0)

    def term(k):
        p = 2 * k + nu
        lc = -math.lgamma(k + 1) - math.lgamma(k + nu + 1)
        if p == 0:
            return np.full_like(log_half, math.exp(lc))
        return np.exp(p * log_half + lc)

    return sum_series(term, ctl).value
