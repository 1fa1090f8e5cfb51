"""Probability laws of the flights.

Every law is radial; internally it is a function of both ``r`` and
``w = sqrt(c^2 t^2 - r^2)`` so quadrature near the light cone can pass an
accurate ``w`` instead of recomputing it from ``r``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from randflight.counts import CountDistribution, Family
from randflight.errors import ConfigError, DomainError
from randflight.params import Model, check_model_dim
from randflight.series import GammaSeries, PowerTerm
from randflight.specfun import (
    SeriesControl,
    bessel_i,
    log_rgamma,
    multi_index_ml,
    sum_series,
)

_NEAR_CONE = 1e-8


def _light_cone(c: float, t: float, r):
    r = np.asarray(r, dtype=float)
    ct = c * t
    if np.any(np.abs(r) >= ct):
        raise DomainError(f"|r| must be < ct = {ct}")
    return np.abs(r), np.sqrt((ct - np.abs(r)) * (ct + np.abs(r)))


def _out(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} (2 for d = 1)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


# ---------------------------------------------------------------------------
# conditional laws


def _conditional_exponents(model: Model, d: int, k: int):
    """(log Gamma-ratio, power of w^2, power of ct) of the k-conditional law."""
    if model is Model.X:
        a = k * (d - 1) / 2
        big = (k + 1) * (d - 1) / 2 + 0.5
        e_ct = (k + 1) * (d - 1) - 1
    else:
        a = k * (d / 2 - 1)
        big = (k + 1) * (d / 2 - 1) + 1
        e_ct = 2 * (k + 1) * (d / 2 - 1)
    return math.lgamma(big) - math.lgamma(a), a - 1, e_ct


def _conditional_rw(model, d, k, c, t, r, w):
    lg, e_w2, e_ct = _conditional_exponents(model, d, k)
    log_p = lg + 2 * e_w2 * np.log(w) - (d / 2) * math.log(math.pi) - e_ct * math.log(c * t)
    return np.exp(log_p)


def conditional_density(model, d: int, k: int, c: float, t: float, r):
    """Density of the position given k >= 1 direction changes."""
    model = Model(model)
    if model is Model.U3:
        raise ConfigError("conditional laws are defined for models X and Y")
    check_model_dim(model, d)
    if k < 1:
        raise DomainError("conditional density needs k >= 1 (k = 0 is singular)")
    r, w = _light_cone(c, t, r)
    return _out(_conditional_rw(model, d, k, c, t, r, w))


# ---------------------------------------------------------------------------
# unconditional laws as Gamma series in w


def _kg_params(model: Model, d: int):
    """(step, shift) so that term k has exponent step*k - 2 and Gammas
    Gamma(step*k/2) Gamma(shift + step*k/2)."""
    if model is Model.X:
        return d - 1, (d - 1) / 2
    return d - 2, (d - 1) / 2


def kg_series(model, d: int, lam: float, c: float) -> GammaSeries:
    """The prefactor-stripped unconditional law as a series in w.

    X: sum_{k>=1} (lam/2c)^{k(d-1)} w^{k(d-1)-2} / [Gamma(k(d-1)/2) Gamma((d-1)(k+1)/2)]
    Y: sum_{k>=1} (lam/2c)^{k(d-2)} w^{k(d-2)-2} / [Gamma(k(d/2-1)) Gamma((d-1)/2 + (d/2-1)k)]
    """
    model = Model(model)
    check_model_dim(model, d)
    step, shift = _kg_params(model, d)
    log_ratio = math.log(lam / (2 * c))

    def term(k: int) -> PowerTerm:
        l1, s1 = log_rgamma(step * k / 2)
        l2, s2 = log_rgamma(shift + step * k / 2)
        if s1 * s2 == 0:
            return PowerTerm.zero(step * k - 2)
        return PowerTerm(k * step * log_ratio + l1 + l2, s1 * s2, step * k - 2)

    return GammaSeries(term, start=1)


def multi_index_normalizer(model, d: int, lam: float, t: float) -> float:
    model = Model(model)
    half = lam * t / 2
    if model is Model.X:
        a = (d - 1) / 2
        return multi_index_ml(a, d / 2, a, a, half ** (d - 1))
    a = d / 2 - 1
    return multi_index_ml(a, d / 2, a, (d - 1) / 2, half ** (d - 2))


def kg_prefactor(model, d: int, c: float, lam: float, t: float) -> float:
    """Factor turning the density into the Klein-Gordon solution f."""
    return math.pi ** (d / 2) * (c * t) ** (d - 2) * multi_index_normalizer(model, d, lam, t)


def _unconditional_rw(model, d, c, lam, t, r, w, ctl=None):
    return kg_series(model, d, lam, c)(w, ctl) / kg_prefactor(model, d, c, lam, t)


def unconditional_density(model, d: int, c: float, lam: float, t: float, r, ctl: SeriesControl | None = None):
    """Absolutely continuous part of the law of X_d(t) or Y_d(t)."""
    model = Model(model)
    if model is Model.U3:
        return u3_density(c, lam, t, r)
    check_model_dim(model, d)
    r, w = _light_cone(c, t, r)
    return _out(_unconditional_rw(model, d, c, lam, t, r, w, ctl))


def count_law(model, d: int, lam: float, t: float) -> CountDistribution:
    fam = Family.FIRST if Model(model) is Model.X else Family.SECOND
    return CountDistribution(fam, d, lam, t)


def mixture_density(model, d: int, c: float, lam: float, t: float, r, ctl: SeriesControl | None = None):
    """sum_{k>=1} P{N=k} * conditional_k, summed directly over k."""
    model = Model(model)
    check_model_dim(model, d)
    r, w = _light_cone(c, t, r)
    counts = count_law(model, d, lam, t)
    logw = np.log(w)
    log_pi = (d / 2) * math.log(math.pi)

    def term(k):
        lg, e_w2, e_ct = _conditional_exponents(model, d, k)
        return np.exp(
            lg + 2 * e_w2 * logw - log_pi - e_ct * math.log(c * t) + counts.log_pmf(k)
        )

    return _out(sum_series(term, ctl, start=1).value)


def _i1_over_w(a: float, w, ctl=None):
    """I_1(a w) / w with the cone limit a/2 for tiny w."""
    w = np.asarray(w, dtype=float)
    tiny = w < _NEAR_CONE
    safe = np.where(tiny, 1.0, w)
    val = bessel_i(1, a * safe, ctl) / safe
    lead = a / 2 * (1 + (a * w) ** 2 / 8)
    return np.where(tiny, lead, val)


def closed_form_density(model, d: int, c: float, lam: float, t: float, r, ctl: SeriesControl | None = None):
    """Closed forms of the unconditional law for (X, 2), (X, 3) and (Y, 3)."""
    model = Model(model)
    r, w = _light_cone(c, t, r)
    q = lam / (2 * c)
    if model is Model.X and d == 3:
        val = q * q / (math.pi * math.sinh(lam * t)) * _i1_over_w(lam / c, w, ctl)
    elif model is Model.X and d == 2:
        val = lam / (2 * math.pi * c) * np.exp(-lam * t + lam * w / c) / w
    elif model is Model.Y and d == 3:
        e = multi_index_ml(0.5, 0.5, 0.5, 1.5, q * w, ctl)
        val = q * q / (math.pi * math.expm1(lam * t)) * e / w
    else:
        raise ConfigError(f"no closed form for model {model.value} in dim {d}")
    return _out(val)


def y3_series_density(c: float, lam: float, t: float, r, ctl: SeriesControl | None = None):
    """Y_3 law written as the k-from-0 series with exponent (k - 1)."""
    r, w = _light_cone(c, t, r)
    q = lam / (2 * c)
    logw = np.log(w)

    def term(k):
        lg = (k + 1) * math.log(q) - math.lgamma((k + 1) / 2) - math.lgamma((k + 3) / 2)
        return np.exp(lg + (k - 1) * logw)

    pref = q / (math.pi * math.expm1(lam * t))
    return _out(pref * sum_series(term, ctl).value)


def singular_weight(model, d: int, lam: float, t: float) -> float:
    """Probability carried by the sphere |x| = ct (no direction change)."""
    model = Model(model)
    check_model_dim(model, d)
    if model is Model.U3:
        lt = lam * t
        return math.exp(-lt) * (1 + lt)
    return count_law(model, d, lam, t).pmf(0)


# ---------------------------------------------------------------------------
# projections (3D flights) and the Poisson-driven motion


def _plane_rw(model, c, lam, t, rho, w):
    a = lam / c
    if model is Model.X:
        return lam / (2 * math.pi * c * math.sinh(lam * t)) * np.cosh(a * w) / w
    return lam / (2 * math.pi * c * math.expm1(lam * t)) * np.exp(a * w) / w


def project_plane(model, c: float, lam: float, t: float, rho):
    """Law of (x1, x2) for the 3D flight, singular part included."""
    model = Model(model)
    if model is Model.U3:
        raise ConfigError("projections are implemented for models X and Y")
    rho, w = _light_cone(c, t, rho)
    return _out(_plane_rw(model, c, lam, t, rho, w))


def plane_origin_limit(model, c: float, lam: float, t: float) -> float:
    """Value of the plane projection at the origin."""
    model = Model(model)
    base = lam / (2 * math.pi * c * c * t)
    if model is Model.X:
        return base / math.tanh(lam * t)
    if model is Model.Y:
        return base / -math.expm1(-lam * t)
    raise ConfigError("projections are implemented for models X and Y")


def _line_rw(model, c, lam, t, x, w, ctl=None):
    a = lam / c
    if model is Model.X:
        return lam * bessel_i(0, a * w, ctl) / (2 * c * math.sinh(lam * t))
    logz = np.log(a * w / 2)

    def term(k):
        lg = -2 * math.lgamma(k / 2 + 1)
        if k == 0:
            return np.full_like(logz, math.exp(lg))
        return np.exp(k * logz + lg)

    return lam / (2 * c * math.expm1(lam * t)) * sum_series(term, ctl).value


def project_line(model, c: float, lam: float, t: float, x1, ctl: SeriesControl | None = None):
    """Law of the first coordinate of the 3D flight."""
    model = Model(model)
    if model is Model.U3:
        raise ConfigError("projections are implemented for models X and Y")
    x1, w = _light_cone(c, t, x1)
    return _out(_line_rw(model, c, lam, t, x1, w, ctl))


def _u3_rw(c, lam, t, r, w, ctl=None):
    q = lam / (2 * c)
    return math.exp(-lam * t) / math.pi * q * q * _i1_over_w(lam / c, w, ctl)


def u3_density(c: float, lam: float, t: float, r, ctl: SeriesControl | None = None):
    """Joint density of U_3(t) and the event {N(t) odd, N(t) >= 3}."""
    r, w = _light_cone(c, t, r)
    return _out(_u3_rw(c, lam, t, r, w, ctl))


# ---------------------------------------------------------------------------
# radial laws, marginals and quadrature


class Kind(str, enum.Enum):
    CONDITIONAL = "conditional"
    UNCONDITIONAL = "unconditional"
    PROJ_PLANE = "plane"
    PROJ_LINE = "line"


@dataclass(frozen=True)
class RadialLaw:
    model: Model
    d: int
    c: float
    lam: float
    t: float
    kind: Kind = Kind.UNCONDITIONAL
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "kind", Kind(self.kind))
        check_model_dim(self.model, self.d)
        if self.kind is Kind.CONDITIONAL:
            if self.model is Model.U3:
                raise ConfigError("conditional laws are defined for models X and Y")
            if self.k is None or self.k < 1:
                raise ConfigError("conditional law needs k >= 1")
        if self.kind in (Kind.PROJ_PLANE, Kind.PROJ_LINE):
            if self.model is Model.U3 or self.d != 3:
                raise ConfigError("projections are implemented for 3D X and Y flights")

    @property
    def ct(self) -> float:
        return self.c * self.t

    @property
    def space_dim(self) -> int:
        """Dimension of the space the density lives in."""
        return {Kind.PROJ_PLANE: 2, Kind.PROJ_LINE: 1}.get(self.kind, self.d)

    def to_dict(self) -> dict:
        return {
            "model": self.model.value, "d": self.d, "c": self.c, "lam": self.lam,
            "t": self.t, "kind": self.kind.value, "k": self.k,
        }


def _law_rw(law: RadialLaw, r, w, ctl=None):
    m, d, c, lam, t = law.model, law.d, law.c, law.lam, law.t
    if law.kind is Kind.CONDITIONAL:
        return _conditional_rw(m, d, law.k, c, t, r, w)
    if law.kind is Kind.PROJ_PLANE:
        return _plane_rw(m, c, lam, t, r, w)
    if law.kind is Kind.PROJ_LINE:
        return _line_rw(m, c, lam, t, r, w, ctl)
    if m is Model.U3:
        return _u3_rw(c, lam, t, r, w, ctl)
    return _unconditional_rw(m, d, c, lam, t, r, w, ctl)


def law_density(law: RadialLaw, r, ctl: SeriesControl | None = None):
    r, w = _light_cone(law.c, law.t, r)
    return _out(_law_rw(law, r, w, ctl))


def _marginal_rw(law: RadialLaw, r, w, ctl=None):
    n = law.space_dim
    return sphere_area(n) * r ** (n - 1) * _law_rw(law, r, w, ctl)


def radial_marginal(law: RadialLaw, r, ctl: SeriesControl | None = None):
    """Density of |position| (of |x1| for the line projection)."""
    r, w = _light_cone(law.c, law.t, r)
    return _out(_marginal_rw(law, r, w, ctl))


def _phi_integrand(law, phi, ctl=None):
    ct = law.ct
    r, w = ct * np.sin(phi), ct * np.cos(phi)
    return _marginal_rw(law, r, w, ctl) * w


def ball_mass(law: RadialLaw, r_max: float | None = None, epsrel: float = 1e-12) -> float:
    """Mass of the law inside |x| < r_max (default: the whole open ball).

    Uses r = ct sin(phi), which absorbs the (c^2t^2 - r^2)^(-1/2) edge.
    """
    phi_max = math.pi / 2 if r_max is None else math.asin(min(r_max / law.ct, 1.0))

    def f(phi):
        return float(_phi_integrand(law, np.array(phi)))

    val, _ = integrate.quad(f, 0.0, phi_max, epsabs=0.0, epsrel=epsrel, limit=400)
    return val


def bin_masses(law: RadialLaw, edges) -> np.ndarray:
    """Mass of the law in each radial shell [edges[i], edges[i+1])."""
    phis = np.arcsin(np.clip(np.asarray(edges, dtype=float) / law.ct, 0.0, 1.0))

    def f(phi):
        return float(_phi_integrand(law, np.array(phi)))

    return np.array([
        integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-11, limit=400)[0]
        for a, b in zip(phis[:-1], phis[1:])
    ])


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def radial_cdf(law: RadialLaw, r, panels: int = 512) -> np.ndarray:
    """Mass inside radius r for many r at once, normalized by the total a.c. mass.

    Composite Gauss-Legendre in phi over the union of a uniform panel grid and
    the requested points.
    """
    r = np.asarray(r, dtype=float)
    phi_r = np.arcsin(np.clip(r / law.ct, 0.0, 1.0))
    knots = np.unique(np.concatenate([np.linspace(0, math.pi / 2, panels + 1), phi_r.ravel()]))
    a, b = knots[:-1], knots[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = _phi_integrand(law, nodes)
    pieces = (vals * _GL_W[None, :]).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    out = np.interp(phi_r, knots, cum) / cum[-1]
    return out
