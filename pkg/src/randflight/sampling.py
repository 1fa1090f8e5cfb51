"""Uniform directions on the sphere and Dirichlet inter-change times."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from randflight.counts import Family
from randflight.errors import ConfigError, DomainError


@dataclass(frozen=True)
class DirichletFamily:
    """Law of (tau_1, ..., tau_{k+1}) on {tau_j > 0, sum tau_j = t}.

    All Dirichlet parameters equal d-1 (FIRST) or d/2-1 (SECOND).
    """

    family: Family
    d: int
    k: int
    t: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.FIRST and self.d < 2:
            raise ConfigError("First family requires dim ≥ 2")
        if self.family is Family.SECOND and self.d < 3:
            raise ConfigError("Second family requires dim ≥ 3")
        if self.family is Family.POISSON:
            raise ConfigError("inter-change times are Dirichlet only for First/Second")
        if self.k < 0 or not self.t > 0:
            raise ConfigError("need k >= 0 and t > 0")

    @property
    def shape(self) -> float:
        return self.d - 1.0 if self.family is Family.FIRST else self.d / 2 - 1.0


def sample_directions(d: int, size: int | tuple, rng: np.random.Generator) -> np.ndarray:
    """Array of shape ``(*size, d)`` of independent uniform unit vectors.

    Normalized Gaussian vectors; the (measure-zero) zero vector is redrawn.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    size = (size,) if isinstance(size, int) else tuple(size)
    g = rng.standard_normal(size + (d,))
    norm = np.linalg.norm(g, axis=-1)
    bad = norm == 0
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norm = np.linalg.norm(g, axis=-1)
        bad = norm == 0
    return g / norm[..., None]


def sample_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    return sample_directions(d, 1, rng)[0]


def sample_times_many(fam: DirichletFamily, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws, shape ``(size, k+1)``, each row summing to t."""
    if fam.k == 0:
        return np.full((size, 1), float(fam.t))
    g = rng.gamma(fam.shape, 1.0, size=(size, fam.k + 1))
    tau = g / g.sum(axis=1, keepdims=True) * fam.t
    last = fam.t - tau[:, :-1].sum(axis=1)
    ok = last > 0
    tau[ok, -1] = last[ok]
    return tau


def sample_times(fam: DirichletFamily, rng: np.random.Generator) -> np.ndarray:
    return sample_times_many(fam, 1, rng)[0]


def density_times(fam: DirichletFamily, tau) -> float:
    """Joint density of the k free coordinates (tau_1, ..., tau_k)."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if fam.k == 0:
        if tau.size:
            raise DomainError("k = 0 has no free coordinates")
        return 1.0
    if tau.size != fam.k:
        raise DomainError(f"expected {fam.k} free coordinates, got {tau.size}")
    last = fam.t - tau.sum()
    if np.any(tau <= 0) or last <= 0:
        raise DomainError("tau outside the open simplex")
    a, n = fam.shape, fam.k + 1
    full = np.append(tau, last)
    log_f = (
        math.lgamma(n * a)
        - n * math.lgamma(a)
        - (n * a - 1) * math.log(fam.t)
        + (a - 1) * float(np.log(full).sum())
    )
    return math.exp(log_f)
