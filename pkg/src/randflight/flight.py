"""Monte Carlo simulation of final positions X_d(t), Y_d(t) and U_3(t).

Batches are split into fixed-size chunks.  Chunk ``i`` draws from a Philox
stream keyed by ``(seed, i)``, so a batch is a deterministic function of
``(params, n, seed)`` whatever the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from randflight import io
from randflight.counts import CountDistribution, Family
from randflight.params import FlightParams, Model
from randflight.sampling import DirichletFamily, sample_directions, sample_times_many

CHUNK = 1 << 16


def stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for chunk ``index`` of a batch seeded with ``seed``."""
    if not 0 <= seed < 2**64 or index < 0:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed + (index << 64)))


def count_distribution(params: FlightParams) -> CountDistribution:
    if params.model is Model.X:
        return CountDistribution(Family.FIRST, params.d, params.lam, params.t)
    if params.model is Model.Y:
        return CountDistribution(Family.SECOND, params.d, params.lam, params.t)
    raise ValueError("U3 counts are Poisson events, not a direction-change law")


def time_family(params: FlightParams, k: int) -> DirichletFamily:
    # Given N(t) = 2k+1, pairs of uniform spacings make U3 times Dirichlet(2).
    fam = Family.SECOND if params.model is Model.Y else Family.FIRST
    return DirichletFamily(fam, params.d, k, params.t)


def _positions(params: FlightParams, k: int, m: int, rng) -> np.ndarray:
    tau = sample_times_many(time_family(params, k), m, rng)
    theta = sample_directions(params.d, (m, k + 1), rng)
    return params.c * np.einsum("ij,ijk->ik", tau, theta)


def simulate_one(params: FlightParams, k: int, rng: np.random.Generator) -> np.ndarray:
    """Final position after exactly k direction changes.

    For U3 this is the stratum N(t) = 2k+1 (k turns, odd event count).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    return _positions(params, k, 1, rng)[0]


def simulate_fixed_k(params: FlightParams, k: int, n: int, seed: int) -> np.ndarray:
    """n positions conditional on k direction changes (chunked like batches)."""
    out = np.empty((n, params.d))
    for i, lo in enumerate(range(0, n, CHUNK)):
        hi = min(lo + CHUNK, n)
        out[lo:hi] = _positions(params, k, hi - lo, stream(seed, i))
    return out


def _flight_chunk(params: FlightParams, size: int, rng):
    ks = count_distribution(params).sample_many(rng, size)
    pos = np.empty((size, params.d))
    for k in np.unique(ks):
        idx = np.flatnonzero(ks == k)
        pos[idx] = _positions(params, int(k), idx.size, rng)
    return pos, ks, None


def _u3_chunk(params: FlightParams, size: int, rng):
    events = rng.poisson(params.lt, size)
    pos = np.empty((size, 3))
    for n_ev in np.unique(events):
        idx = np.flatnonzero(events == n_ev)
        m = idx.size
        arrivals = np.sort(rng.random((m, int(n_ev))), axis=1) * params.t
        turns = arrivals[:, 1::2]
        edges = np.concatenate([np.zeros((m, 1)), turns, np.full((m, 1), params.t)], axis=1)
        tau = np.diff(edges, axis=1)
        theta = sample_directions(3, (m, tau.shape[1]), rng)
        pos[idx] = params.c * np.einsum("ij,ijk->ik", tau, theta)
    return pos, events // 2, events


@dataclass
class SampleBatch:
    positions: np.ndarray
    k_values: np.ndarray
    params: FlightParams
    seed: int
    events: np.ndarray | None = field(default=None)

    @property
    def n(self) -> int:
        return len(self.k_values)

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.positions, axis=1)

    @property
    def odd(self) -> np.ndarray | None:
        return None if self.events is None else (self.events % 2 == 1)

    def meta(self) -> dict:
        return {"params": self.params.to_dict(), "seed": self.seed, "n": self.n}

    def columns(self):
        header = ["k"] + [f"x{j + 1}" for j in range(self.params.d)]
        return header, [self.k_values] + [self.positions[:, j] for j in range(self.params.d)]

    def to_csv(self, path, extra_meta: dict | None = None):
        header, cols = self.columns()
        return io.write_table(path, header, cols, {**self.meta(), **(extra_meta or {})})


def simulate_batch(params: FlightParams, n: int, seed: int, workers: int = 1) -> SampleBatch:
    if n < 1:
        raise ValueError("n must be >= 1")
    chunk_fn = _u3_chunk if params.model is Model.U3 else _flight_chunk
    bounds = [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]

    def run(i):
        lo, hi = bounds[i]
        return chunk_fn(params, hi - lo, stream(seed, i))

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(bounds))))
    else:
        parts = [run(i) for i in range(len(bounds))]
    pos = np.concatenate([p[0] for p in parts])
    ks = np.concatenate([p[1] for p in parts])
    events = None if params.model is not Model.U3 else np.concatenate([p[2] for p in parts])
    return SampleBatch(pos, ks, params, seed, events)


def simulate_u3(params: FlightParams, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """One U3 flight: final position and whether N(t) is odd."""
    if params.model is not Model.U3:
        raise ValueError("simulate_u3 needs model U3")
    pos, _, events = _u3_chunk(params, 1, rng)
    return pos[0], bool(events[0] % 2)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)
