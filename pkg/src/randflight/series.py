"""Power terms and power series in w with Gamma-ratio coefficients.

Coefficients are carried as ``(log|c|, sign)``; sign 0 marks an exact zero,
which is how a pole of a denominator Gamma shows up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from randflight.specfun import SeriesControl, sum_series


@dataclass(frozen=True)
class PowerTerm:
    """The monomial ``sign * exp(log_abs) * w**exponent``."""

    log_abs: float
    sign: int
    exponent: float

    @classmethod
    def zero(cls, exponent: float) -> "PowerTerm":
        return cls(-math.inf, 0, exponent)

    @classmethod
    def from_value(cls, value: float, exponent: float) -> "PowerTerm":
        if value == 0:
            return cls.zero(exponent)
        return cls(math.log(abs(value)), 1 if value > 0 else -1, exponent)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def coefficient(self) -> float:
        return 0.0 if self.is_zero else self.sign * math.exp(self.log_abs)

    def scaled(self, log_factor: float, sign: int = 1) -> "PowerTerm":
        if self.is_zero or sign == 0:
            return PowerTerm.zero(self.exponent)
        return PowerTerm(self.log_abs + log_factor, self.sign * sign, self.exponent)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.is_zero:
            return np.zeros_like(w)
        return self.sign * np.exp(self.log_abs + self.exponent * np.log(w))


def relative_mismatch(a: PowerTerm, b: PowerTerm) -> float:
    """|a - b| / |b| computed in log space; 0 when both are exact zeros."""
    if a.exponent != b.exponent:
        return math.inf
    if a.is_zero and b.is_zero:
        return 0.0
    if a.is_zero or b.is_zero:
        return math.inf if b.is_zero else 1.0
    if a.sign != b.sign:
        return 1.0 + math.exp(a.log_abs - b.log_abs)
    return abs(math.expm1(a.log_abs - b.log_abs))


class GammaSeries:
    """``sum_{k >= start} term(k)(w)`` for w > 0, summed adaptively."""

    def __init__(self, term: Callable[[int], PowerTerm], start: int = 0):
        self._term = term
        self.start = start

    def term(self, k: int) -> PowerTerm:
        return self._term(k)

    def terms(self, count: int) -> list[PowerTerm]:
        return [self._term(self.start + i) for i in range(count)]

    def __call__(self, w, ctl: SeriesControl | None = None):
        w = np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise ValueError("GammaSeries is evaluated only at w > 0")
        logw = np.log(w)

        def values(k):
            p = self._term(k)
            if p.is_zero:
                return np.zeros_like(logw)
            return p.sign * np.exp(p.log_abs + p.exponent * logw)

        return sum_series(values, ctl, start=self.start).value
