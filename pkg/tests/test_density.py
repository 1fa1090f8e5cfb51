import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from scipy import integrate, special

from randflight import density as dens
from randflight.errors import ConfigError, DomainError
from randflight.params import Model

LAM, C, T = 1.0, 1.0, 1.0


def test_radial_reduction_of_dalembertian():
    # For g(w), w = sqrt(c^2 t^2 - r^2): box g = c^2 (g'' + (d/w) g').
    t, r, c, d = sp.symbols("t r c d", positive=True)
    w = sp.sqrt(c**2 * t**2 - r**2)
    g = sp.Function("g")
    expr = g(w)
    box = sp.diff(expr, t, 2) - c**2 * (sp.diff(expr, r, 2) + (d - 1) / r * sp.diff(expr, r))
    s = sp.Symbol("s", positive=True)
    gs = g(s)
    target = c**2 * (sp.diff(gs, s, 2) + d / s * sp.diff(gs, s)).subs(s, w)
    assert sp.simplify(box.doit() - target.doit()) == 0


@pytest.mark.parametrize("model,d,k", [(Model.X, 2, 1), (Model.X, 3, 2), (Model.X, 5, 3), (Model.Y, 3, 1), (Model.Y, 4, 2), (Model.Y, 6, 1)])
def test_conditional_density_normalized(model, d, k):
    law = dens.RadialLaw(model, d, 1.3, LAM, 0.8, dens.Kind.CONDITIONAL, k)
    assert dens.ball_mass(law) == pytest.approx(1.0, abs=1e-10)


def test_x_d2_k1_conditional_closed_form():
    # Two uniform-time segments in the plane: p = 1 / (2 pi c t w)
    r = np.array([0.0, 0.3, 0.9])
    w = np.sqrt(1 - r**2)
    assert np.allclose(dens.conditional_density(Model.X, 2, 1, C, T, r), 1 / (2 * math.pi * w), rtol=1e-14)


@pytest.mark.parametrize("model,d", [(Model.X, 2), (Model.X, 3), (Model.Y, 3)])
def test_closed_forms_match_mixture(model, d):
    r = np.linspace(0, 0.99, 50)
    closed = dens.closed_form_density(model, d, C, LAM, T, r)
    assert np.allclose(closed, dens.mixture_density(model, d, C, LAM, T, r), rtol=1e-12, atol=0)
    assert np.allclose(closed, dens.unconditional_density(model, d, C, LAM, T, r), rtol=1e-12, atol=0)


def test_x3_closed_form_against_scipy_bessel():
    lam, c, t = 1.7, 0.6, 2.0
    r = np.linspace(0.1, 1.1, 7)
    w = np.sqrt((c * t) ** 2 - r**2)
    ref = (lam / (2 * c)) ** 2 / (math.pi * math.sinh(lam * t)) * special.iv(1, lam * w / c) / w
    assert np.allclose(dens.closed_form_density(Model.X, 3, c, lam, t, r), ref, rtol=1e-13)


def test_y3_two_series_forms():
    r = np.linspace(0, 0.95, 20)
    assert np.allclose(dens.y3_series_density(C, 1.4, T, r), dens.closed_form_density(Model.Y, 3, C, 1.4, T, r), rtol=1e-13)


def test_no_closed_form():
    with pytest.raises(ConfigError):
        dens.closed_form_density(Model.X, 4, C, LAM, T, 0.1)


@pytest.mark.parametrize("model,d", [(Model.X, 2), (Model.X, 3), (Model.X, 5), (Model.Y, 3), (Model.Y, 4), (Model.Y, 6)])
@pytest.mark.parametrize("lt", [0.25, 1.0, 4.0])
def test_total_mass_is_one(model, d, lt):
    law = dens.RadialLaw(model, d, C, lt, T)
    assert dens.ball_mass(law) + dens.singular_weight(model, d, lt, T) == pytest.approx(1.0, abs=1e-10)


def test_u3_mass_and_origin():
    law = dens.RadialLaw(Model.U3, 3, C, LAM, T)
    assert dens.ball_mass(law) == pytest.approx(math.exp(-1) * (math.sinh(1) - 1), rel=1e-10)
    assert dens.u3_density(C, LAM, T, 0.0) == pytest.approx(math.exp(-1) * special.iv(1, 1.0) / (4 * math.pi), rel=1e-14)
    assert dens.singular_weight(Model.U3, 3, LAM, T) == pytest.approx(2 * math.exp(-1))


def test_boundary_behaviour():
    rs = 1 - np.logspace(-2, -7, 6)
    w = np.sqrt(1 - rs**2)
    x3 = dens.closed_form_density(Model.X, 3, C, LAM, T, rs)
    assert np.all(np.isfinite(x3))
    assert x3[-1] == pytest.approx(1 / (8 * math.pi * math.sinh(1)), rel=1e-6)
    ratio = dens.closed_form_density(Model.Y, 3, C, LAM, T, rs) * w
    assert np.all(np.diff(dens.closed_form_density(Model.Y, 3, C, LAM, T, rs)) > 0)
    assert np.all(np.isfinite(ratio))


def test_outside_support_rejected():
    with pytest.raises(DomainError):
        dens.closed_form_density(Model.X, 3, C, LAM, T, 1.0)
    with pytest.raises(DomainError):
        dens.conditional_density(Model.X, 3, 0, C, T, 0.2)


def test_plane_projection_normalized_and_limits():
    for model in (Model.X, Model.Y):
        law = dens.RadialLaw(model, 3, C, LAM, T, dens.Kind.PROJ_PLANE)
        assert dens.ball_mass(law) == pytest.approx(1.0, abs=1e-10)
    assert dens.plane_origin_limit(Model.X, C, LAM, T) == pytest.approx(1 / (2 * math.pi * math.tanh(1)), rel=1e-15)
    assert dens.plane_origin_limit(Model.Y, C, LAM, T) == pytest.approx(1 / (2 * math.pi * (1 - math.exp(-1))), rel=1e-15)
    assert dens.project_plane(Model.X, C, LAM, T, 1e-6) == pytest.approx(0.20897605614129663, rel=1e-10)
    assert dens.project_plane(Model.Y, C, LAM, T, 1e-6) == pytest.approx(0.25177941275449167, rel=1e-10)


def test_plane_projection_by_direct_integration():
    # Integrate the X_3 law (a.c. and singular parts) along x3 at fixed (x1, x2).
    rho = 0.4
    h = math.sqrt(1 - rho**2)
    ac, _ = integrate.quad(lambda z: dens.closed_form_density(Model.X, 3, C, LAM, T, math.hypot(rho, z)), -h, h, epsabs=1e-13)
    sing = dens.singular_weight(Model.X, 3, LAM, T) / (4 * math.pi) * 2 / h
    assert ac + sing == pytest.approx(dens.project_plane(Model.X, C, LAM, T, rho), rel=1e-9)


@pytest.mark.parametrize("model", [Model.X, Model.Y])
def test_line_projection(model):
    law = dens.RadialLaw(model, 3, C, LAM, T, dens.Kind.PROJ_LINE)
    assert dens.ball_mass(law) == pytest.approx(1.0, abs=1e-10)
    # Marginal of the plane law.
    x = 0.35
    h = math.sqrt(1 - x**2)
    val, _ = integrate.quad(lambda y: dens.project_plane(model, C, LAM, T, math.hypot(x, y)), -h, h, limit=200)
    assert val == pytest.approx(dens.project_line(model, C, LAM, T, x), rel=1e-8)


def test_line_projection_x_is_bessel():
    x = np.array([0.0, 0.5])
    ref = special.iv(0, np.sqrt(1 - x**2)) / (2 * math.sinh(1))
    assert np.allclose(dens.project_line(Model.X, C, LAM, T, x), ref, rtol=1e-14)
    assert dens.project_line(Model.X, C, LAM, T, 0.0) == pytest.approx(0.53865920346220642, rel=1e-13)


def test_y4_series_against_mpmath():
    # Direct sum over k of pmf(k) * conditional density, in 30-digit arithmetic.
    mpmath.mp.dps = 30
    r = mpmath.mpf("0.45")
    w2 = 1 - r**2
    x = mpmath.mpf(1)
    norm = mpmath.nsum(lambda j: x**(2 * j) / mpmath.gamma(2 * j + 3), [0, mpmath.inf])

    def term(k):
        pk = x**(2 * k) / mpmath.gamma(2 * k + 3) / norm
        # Dirichlet(1) spacings in 4D: density (k+1) k / pi^2 * w^{2(k-1)}
        cond = mpmath.gamma(k + 2) / mpmath.gamma(k) * w2**(k - 1) / mpmath.pi**2
        return pk * cond

    ref = float(mpmath.nsum(term, [1, mpmath.inf]))
    assert dens.unconditional_density(Model.Y, 4, C, LAM, T, 0.45) == pytest.approx(ref, rel=1e-12)
    assert dens.mixture_density(Model.Y, 4, C, LAM, T, 0.45) == pytest.approx(ref, rel=1e-12)


def test_radial_cdf_matches_quad():
    law = dens.RadialLaw(Model.X, 4, C, LAM, T)
    r = np.array([0.2, 0.5, 0.9])
    total = dens.ball_mass(law)
    ref = [dens.ball_mass(law, x) / total for x in r]
    assert np.allclose(dens.radial_cdf(law, r), ref, rtol=1e-10)
    edges = np.array([0.0, 0.3, 0.7, 1.0])
    assert dens.bin_masses(law, edges).sum() == pytest.approx(total, rel=1e-10)


def test_law_validation():
    with pytest.raises(ConfigError):
        dens.RadialLaw(Model.X, 3, C, LAM, T, dens.Kind.CONDITIONAL)
    with pytest.raises(ConfigError):
        dens.RadialLaw(Model.X, 4, C, LAM, T, dens.Kind.PROJ_PLANE)
    assert dens.RadialLaw(Model.X, 3, C, LAM, T, dens.Kind.PROJ_LINE).space_dim == 1
