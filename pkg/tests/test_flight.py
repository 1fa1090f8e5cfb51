import math

import numpy as np
import pytest

from randflight import density as dens
from randflight.flight import (
    CHUNK,
    SampleBatch,
    binomial_sigma,
    simulate_batch,
    simulate_fixed_k,
    simulate_one,
    simulate_u3,
    stream,
)
from randflight.io import read_table, sidecar_path
from randflight.params import FlightParams, Model
from randflight.errors import ConfigError


def test_params_validation():
    with pytest.raises(ConfigError, match="Second family requires dim ≥ 3"):
        FlightParams(Model.Y, 2)
    with pytest.raises(ConfigError):
        FlightParams(Model.U3, 4)
    with pytest.raises(ConfigError):
        FlightParams(Model.X, 3, c=-1.0)
    p = FlightParams("x", 3, 2.0, 0.5, 3.0)
    assert p.ct == 6.0 and p.lt == 1.5
    assert p.to_dict()["model"] == "x"


def test_stream_keys_are_distinct():
    a = stream(1, 0).random(4)
    assert np.array_equal(a, stream(1, 0).random(4))
    assert not np.array_equal(a, stream(1, 1).random(4))
    assert not np.array_equal(a, stream(2, 0).random(4))
    with pytest.raises(ValueError):
        stream(-1, 0)


@pytest.mark.parametrize("model,d", [(Model.X, 2), (Model.X, 4), (Model.Y, 3), (Model.U3, 3)])
def test_positions_stay_in_ball(model, d):
    p = FlightParams(model, d, 1.5, 2.0, 1.0)
    b = simulate_batch(p, 20_000, 3)
    r = b.radii
    assert np.all(r <= p.ct * (1 + 1e-12))
    on_sphere = np.isclose(r, p.ct, rtol=1e-12)
    if model is Model.U3:
        assert np.array_equal(on_sphere, b.events <= 1)
    else:
        assert np.array_equal(on_sphere, b.k_values == 0)


def test_batch_is_deterministic_across_workers():
    p = FlightParams(Model.X, 3)
    n = 2 * CHUNK + 123
    one = simulate_batch(p, n, 99, workers=1)
    four = simulate_batch(p, n, 99, workers=4)
    assert np.array_equal(one.positions, four.positions)
    assert np.array_equal(one.k_values, four.k_values)
    other = simulate_batch(p, n, 100)
    assert not np.array_equal(one.positions, other.positions)


def test_prefix_stability():
    # The first chunk does not depend on the batch size.
    p = FlightParams(Model.Y, 4)
    big = simulate_batch(p, CHUNK + 10, 5)
    assert np.array_equal(simulate_batch(p, CHUNK, 5).positions, big.positions[:CHUNK])


def test_fixed_k_matches_conditional_mean_square():
    # E|X|^2 for k changes: c^2 * sum E[tau_i tau_j] <theta_i, theta_j> = c^2 * sum E[tau_i^2]
    p = FlightParams(Model.X, 3, 1.0, 1.0, 2.0)
    k = 2
    pos = simulate_fixed_k(p, k, 200_000, 8)
    a, m = 2.0, 3
    e_sq = (p.t**2) * m * a * (a + 1) / (m * a * (m * a + 1))
    assert np.mean(np.sum(pos**2, axis=1)) == pytest.approx(e_sq, rel=5e-3)


def test_simulate_one_shapes():
    rng = np.random.default_rng(1)
    p = FlightParams(Model.X, 5)
    assert simulate_one(p, 3, rng).shape == (5,)
    assert np.linalg.norm(simulate_one(p, 0, rng)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        simulate_one(p, -1, rng)


def test_u3_single_flight():
    rng = np.random.default_rng(2)
    pos, odd = simulate_u3(FlightParams(Model.U3, 3), rng)
    assert pos.shape == (3,) and isinstance(odd, bool)
    with pytest.raises(ValueError):
        simulate_u3(FlightParams(Model.X, 3), rng)


def test_u3_event_stratum_fractions():
    p = FlightParams(Model.U3, 3)
    b = simulate_batch(p, 400_000, 17)
    lt = p.lt
    for mask, prob in (
        (b.events == 1, lt * math.exp(-lt)),
        ((b.events % 2 == 1) & (b.events >= 3), math.exp(-lt) * (math.sinh(lt) - lt)),
    ):
        assert abs(mask.mean() - prob) <= 4 * binomial_sigma(prob, b.n)


def test_csv_roundtrip(tmp_path):
    p = FlightParams(Model.X, 3)
    b = simulate_batch(p, 50, 4)
    side = b.to_csv(tmp_path / "pos.csv", {"note": "x"})
    assert side == sidecar_path(tmp_path / "pos.csv")
    header, data = read_table(tmp_path / "pos.csv")
    assert header == ["k", "x1", "x2", "x3"]
    assert np.array_equal(data[:, 1:], b.positions)
    assert np.array_equal(data[:, 0], b.k_values)


def test_batch_meta():
    b = SampleBatch(np.zeros((2, 3)), np.zeros(2, dtype=int), FlightParams(Model.X, 3), 0)
    assert b.n == 2 and b.odd is None
    assert b.meta()["params"]["d"] == 3


def test_conditional_radius_mean_matches_quadrature():
    p = FlightParams(Model.Y, 4)
    pos = simulate_fixed_k(p, 1, 100_000, 21)
    law = dens.RadialLaw(Model.Y, 4, 1.0, 1.0, 1.0, dens.Kind.CONDITIONAL, 1)
    from scipy import integrate

    mean, _ = integrate.quad(lambda r: r * dens.radial_marginal(law, r), 0, 1 - 1e-12)
    r = np.linalg.norm(pos, axis=1)
    assert r.mean() == pytest.approx(mean, abs=4 * r.std() / math.sqrt(r.size))
