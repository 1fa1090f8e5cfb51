"""Finite-difference certificates for the PDEs satisfied by the flight laws.

Every law is radial, so operators are applied in (t, r) with
Laplacian = d^2/dr^2 + (n-1)/r d/dr (n = space dimension) and second-order
central differences.  Powers of the d'Alembertian are obtained by nesting the
stencil: the target is an exact function of (t, r), so the inner operator is
simply re-evaluated at the shifted points.  The axis r = 0 needs no special
treatment (see :func:`laplacian`).

A check is run with stencil steps h and h/2 at the same evaluation points;
the order estimate is log2(res(h) / res(h/2)).  Its negative control reruns
the step-h residual with one coefficient scaled by 1.01.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from randflight import density as dens
from randflight.errors import DomainError
from randflight.params import Model, check_model_dim
from randflight.specfun import SeriesControl, bessel_i, log_rgamma

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

FLOOR = 1e-13
ORDER_BAND = (1.5, 2.5)
CONTROL_RATIO = 10.0
PERTURBATION = 1.01
# Sum series to full double precision; truncation noise is amplified by h^-2p.
_TIGHT = SeriesControl(rel_tol=1e-17, max_terms=2000)


@dataclass(frozen=True)
class Grid2D:
    """Evaluation points t in [t0, t1], r in [0, rho*c*t]; stencil step h_r,
    with h_t = h_r / c."""

    t0: float = 1.0
    t1: float = 1.5
    rho: float = 0.8
    h_r: float = 0.02
    nt: int = 6
    nr: int = 6
    c: float = 1.0

    def __post_init__(self):
        if not (0 < self.rho < 1 and 0 < self.t0 <= self.t1):
            raise DomainError("need 0 < rho < 1 and 0 < t0 <= t1")
        if self.h_r <= 0 or self.nt < 5 or self.nr < 5:
            raise DomainError("need h_r > 0 and at least 5 points per axis")

    @property
    def h_t(self) -> float:
        return self.h_r / self.c

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(self.t0, self.t1, self.nt)
        frac = np.linspace(0.0, 1.0, self.nr)
        tt = np.repeat(t, self.nr)
        rr = (self.rho * self.c * t)[:, None] * frac[None, :]
        return tt, rr.ravel()

    def check_reach(self, reach: int, h_r: float | None = None) -> None:
        """All stencil points of a ``reach``-fold nested stencil stay inside the cone."""
        h = self.h_r if h_r is None else h_r
        t_low = self.t0 - reach * h / self.c
        if t_low <= 0:
            raise DomainError("stencil reaches t <= 0")
        for t in (self.t0, self.t1):
            if self.rho * self.c * t + reach * h >= self.c * (t - reach * h / self.c):
                raise DomainError("grid violates the light-cone margin")

    def to_dict(self) -> dict:
        return asdict(self)


def scaled(grid: Grid2D, factor: float) -> Grid2D:
    return Grid2D(grid.t0, grid.t1, grid.rho, grid.h_r * factor, grid.nt, grid.nr, grid.c)


@dataclass
class ResidualReport:
    equation_id: str
    params: dict
    h: float
    residual_max: float
    residual_rms: float
    residual_max_half: float
    residual_rms_half: float
    order_estimate: float | None
    negative_control_ratio: float
    passed: bool
    grid: dict = field(default_factory=dict)
    note: str = ""
    variants: dict = field(default_factory=dict)

    @property
    def at_floor(self) -> bool:
        return self.order_estimate is None

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# stencils


def _cone_w(c, t, r):
    r = np.abs(r)
    ct = c * t
    return np.sqrt((ct - r) * (ct + r))


def d_t(F: Field, h: float) -> Field:
    return lambda t, r: (F(t + h, r) - F(t - h, r)) / (2 * h)


def d_tt(F: Field, h: float) -> Field:
    return lambda t, r: (F(t + h, r) - 2 * F(t, r) + F(t - h, r)) / (h * h)


def laplacian(F: Field, n: int, h: float) -> Field:
    """Radial form of the axis-aligned Cartesian 5-point Laplacian.

    At x = r e_1 the n-1 transverse neighbours sit at radius sqrt(r^2 + h^2),
    so no special case is needed on the axis and the truncation error is a
    smooth even function of r, which keeps nested applications second order.
    """

    def G(t, r):
        f0 = F(t, r)
        along = (F(t, r + h) - 2 * f0 + F(t, r - h)) / (h * h)
        if n == 1:
            return along
        across = 2 * (F(t, np.hypot(r, h)) - f0) / (h * h)
        return along + (n - 1) * across

    return G


def box(F: Field, n: int, c: float, h_r: float) -> Field:
    """Central-difference d'Alembertian d^2/dt^2 - c^2 Laplacian, h_t = h_r / c."""
    ftt = d_tt(F, h_r / c)
    lap = laplacian(F, n, h_r)
    return lambda t, r: ftt(t, r) - c * c * lap(t, r)


def box_power(F: Field, n: int, c: float, h_r: float, power: int) -> Field:
    G = F
    for _ in range(power):
        G = box(G, n, c, h_r)
    return G


# ---------------------------------------------------------------------------
# target fields


def kg_field(model, d, lam, c) -> Field:
    series = dens.kg_series(model, d, lam, c)
    return lambda t, r: series(_cone_w(c, t, r), _TIGHT)


def x3_density_field(lam, c) -> Field:
    q = lam / (2 * c)

    def F(t, r):
        w = _cone_w(c, t, r)
        return q * q / (math.pi * np.sinh(lam * t)) * bessel_i(1, lam * w / c, _TIGHT) / w

    return F


def y3_density_field(lam, c) -> Field:
    series = dens.kg_series(Model.Y, 3, lam, c)

    def F(t, r):
        w = _cone_w(c, t, r)
        return lam / (2 * math.pi * c * np.expm1(lam * t)) * series(w, _TIGHT)

    return F


def u3_field(lam, c) -> Field:
    q = lam / (2 * c)

    def F(t, r):
        w = _cone_w(c, t, r)
        return np.exp(-lam * t) / math.pi * q * q * bessel_i(1, lam * w / c, _TIGHT) / w

    return F


def plane_field(model, lam, c) -> Field:
    a = lam / c

    def F(t, r):
        w = _cone_w(c, t, r)
        if Model(model) is Model.X:
            return lam / (2 * math.pi * c * np.sinh(lam * t)) * np.cosh(a * w) / w
        return lam / (2 * math.pi * c * np.expm1(lam * t)) * np.exp(a * w) / w

    return F


def line_field(lam, c) -> Field:
    def F(t, r):
        w = _cone_w(c, t, r)
        return lam * bessel_i(0, lam * w / c, _TIGHT) / (2 * c * np.sinh(lam * t))

    return F


def i0_field(lam, c) -> Field:
    return lambda t, r: bessel_i(0, lam * _cone_w(c, t, r) / c, _TIGHT)


def coth(x):
    return 1.0 / np.tanh(x)


# ---------------------------------------------------------------------------
# residual fields: each returns R(t, r) for step h and coefficient scale s


def kg_source(model, d, lam, c) -> float:
    """(2 lam c)^{d-2} / (sqrt(pi) Gamma(1 - d/2)) for Y; exactly 0 for X and even d."""
    if Model(model) is not Model.Y:
        return 0.0
    l_r, s_r = log_rgamma(1 - d / 2)
    if s_r == 0:
        return 0.0
    return s_r * math.exp((d - 2) * math.log(2 * lam * c) - 0.5 * math.log(math.pi) + l_r)


def _res_kg(model, d, lam, c, power):
    F = kg_field(model, d, lam, c)
    src = kg_source(model, d, lam, c)

    def R(h, s=1.0):
        lhs = box_power(F, d, c, h, power)

        def out(t, r):
            rhs = s * lam ** (2 * power) * F(t, r)
            if src:
                rhs = rhs + src * _cone_w(c, t, r) ** (-d)
            return lhs(t, r) - rhs

        return out

    return R


def _res_x3_fourth(lam, c, variant="derived", p: Field | None = None):
    """Fourth-order law of X_3 with b(t) = coth(lam t).

    derived:  box^2 p + 2 lam box (lam + 2b d/dt) p + 4 lam^2 (d^2/dt^2 + lam b d/dt) p,
              with b kept outside the d'Alembertian.
    verbatim: same with lam^2 b in the last block.
    composed: box applied after multiplying p_t by b(t).
    """
    p = p or x3_density_field(lam, c)

    def R(h, s=1.0):
        ht = h / c
        bp = box(p, 3, c, h)
        b2p = box(bp, 3, c, h)
        pt = d_t(p, ht)
        ptt = d_tt(p, ht)
        bpt = box(pt, 3, c, h)

        def bq(t, r):
            return coth(lam * t) * pt(t, r)

        b_bq = box(bq, 3, c, h)
        last_b = lam**2 if variant == "verbatim" else lam

        def out(t, r):
            b = coth(lam * t)
            mixed = b_bq(t, r) if variant == "composed" else b * bpt(t, r)
            return (
                b2p(t, r)
                + 2 * lam * (lam * bp(t, r) + 2 * mixed)
                + 4 * lam**2 * (s * ptt(t, r) + last_b * b * pt(t, r))
            )

        return out

    return R


def _res_y3_telegraph(lam, c):
    u = y3_density_field(lam, c)
    g3 = lam**2 / (math.pi**1.5 * -2 * math.sqrt(math.pi))

    def R(h, s=1.0, source_sign=1.0):
        bu = box(u, 3, c, h)
        ut = d_t(u, h / c)

        def out(t, r):
            em1 = np.expm1(lam * t)
            c1 = 2 * lam * np.exp(lam * t) / em1
            c2 = -(lam**2) / em1
            c3 = source_sign * g3 / em1 * _cone_w(c, t, r) ** -3
            return bu(t, r) + s * c1 * ut(t, r) - c2 * u(t, r) - c3

        return out

    return R


def _res_u3_telegraph(lam, c):
    u = u3_field(lam, c)

    def R(h, s=1.0):
        bu = box(u, 3, c, h)
        ut = d_t(u, h / c)
        return lambda t, r: bu(t, r) + s * 2 * lam * ut(t, r)

    return R


def _res_u3_exponential(lam, c):
    u = u3_field(lam, c)

    def f(t, r):
        return np.exp(lam * t) * u(t, r)

    def R(h, s=1.0):
        bf = box(f, 3, c, h)
        return lambda t, r: bf(t, r) - s * lam**2 * f(t, r)

    return R


def _res_coth_telegraph(field_fn: Field, n, lam, c):
    def R(h, s=1.0):
        bp = box(field_fn, n, c, h)
        pt = d_t(field_fn, h / c)
        return lambda t, r: bp(t, r) + s * 2 * lam * coth(lam * t) * pt(t, r)

    return R


def _res_plane_y(lam, c):
    p = plane_field(Model.Y, lam, c)

    def R(h, s=1.0):
        bp = box(p, 2, c, h)
        pt = d_t(p, h / c)

        def out(t, r):
            em1 = np.expm1(lam * t)
            c1 = 2 * lam * np.exp(lam * t) / em1
            c2 = -(lam**2) / em1
            return bp(t, r) + s * c1 * pt(t, r) - c2 * p(t, r)

        return out

    return R


def _res_kg_line(lam, c):
    q = i0_field(lam, c)

    def R(h, s=1.0):
        bq = box(q, 1, c, h)
        return lambda t, r: bq(t, r) - s * lam**2 * q(t, r)

    return R


# ---------------------------------------------------------------------------


def _stats(values: np.ndarray) -> tuple[float, float]:
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite residual")
    return float(np.max(np.abs(values))), float(np.sqrt(np.mean(values**2)))


def _run(equation_id, R, grid: Grid2D, reach: int, params: dict, note="", variants=None) -> ResidualReport:
    grid.check_reach(reach)
    t, r = grid.points()
    m1, s1 = _stats(R(grid.h_r)(t, r))
    m2, s2 = _stats(R(grid.h_r / 2)(t, r))
    mp, _ = _stats(R(grid.h_r, PERTURBATION)(t, r))
    order = None if m2 <= FLOOR else math.log2(m1 / m2)
    ratio = mp / m1 if m1 > 0 else math.inf
    in_band = order is None or ORDER_BAND[0] <= order <= ORDER_BAND[1]
    return ResidualReport(
        equation_id=equation_id, params=params, h=grid.h_r,
        residual_max=m1, residual_rms=s1, residual_max_half=m2, residual_rms_half=s2,
        order_estimate=order, negative_control_ratio=ratio,
        passed=bool(in_band and ratio >= CONTROL_RATIO),
        grid=grid.to_dict(), note=note, variants=variants or {},
    )


# Default stencil steps (times c), chosen per operator order: second-order
# operators tolerate small steps, while nested fourth-order stencils lose
# digits to cancellation at roughly eps / h^4.
STEP_SECOND_ORDER = 0.005
STEP_FOURTH_ORDER = {"kg": 0.04, "x3_fourth": 0.01}


def default_grid(c: float = 1.0, step: float = STEP_SECOND_ORDER) -> Grid2D:
    return Grid2D(c=c, h_r=step * c)


def dalembert_power_residual(model, d, lam, c, grid: Grid2D | None = None, power: int | None = None) -> ResidualReport:
    """(box)^power f = lam^{2 power} f (+ source for Y) on the Klein-Gordon series f."""
    model = Model(model)
    check_model_dim(model, d)
    expected = d - 1 if model is Model.X else d - 2
    power = expected if power is None else power
    if power != expected or model is Model.U3:
        raise ValueError(f"power must be {expected} for model {model.value}, dim {d}")
    if grid is None:
        step = STEP_SECOND_ORDER if power == 1 else STEP_FOURTH_ORDER["kg"] * 2 / power
        grid = default_grid(c, step)
    eq = "kg_power_x" if model is Model.X else "kg_power_y"
    return _run(
        f"{eq}[d={d}]", _res_kg(model, d, lam, c, power), grid, power,
        {"model": model.value, "d": d, "lam": lam, "c": c, "power": power,
         "source": kg_source(model, d, lam, c)},
    )


def x3_fourth_order_residual(lam, c, grid: Grid2D | None = None, with_variants: bool = True) -> ResidualReport:
    grid = grid or default_grid(c, STEP_FOURTH_ORDER["x3_fourth"])
    if lam * (grid.t0 - 2 * grid.h_t) < 0.1:
        raise DomainError("lambda * t0 must stay >= 0.1 (coth blows up near t = 0)")
    variants = {}
    if with_variants:
        t, r = grid.points()
        for name in ("verbatim", "composed"):
            R = _res_x3_fourth(lam, c, name)
            m1, _ = _stats(R(grid.h_r)(t, r))
            m2, _ = _stats(R(grid.h_r / 2)(t, r))
            variants[name] = {"residual_max": m1, "residual_max_half": m2,
                              "order_estimate": None if m2 <= FLOOR else math.log2(m1 / m2)}
        true = x3_density_field(lam, c)

        def skewed(tt, rr):
            return true(tt, rr) * (1 + 0.01 * rr / (c * tt))

        base = _stats(_res_x3_fourth(lam, c)(grid.h_r)(t, r))[0]
        bad = _stats(_res_x3_fourth(lam, c, p=skewed)(grid.h_r)(t, r))[0]
        variants["perturbed_density"] = {"residual_max": bad, "ratio": bad / base}
    return _run(
        "x3_fourth", _res_x3_fourth(lam, c), grid, 2, {"lam": lam, "c": c},
        note="coefficient form with lam*b(t) in the last block", variants=variants,
    )


def y3_telegraph_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    t, r = grid.points()
    R = _res_y3_telegraph(lam, c)
    flipped = _stats(R(grid.h_r, 1.0, -1.0)(t, r))[0]
    rep = _run("telegraph_y3", R, grid, 1, {"lam": lam, "c": c})
    rep.variants["source_sign_flipped"] = {"residual_max": flipped, "ratio": flipped / rep.residual_max}
    return rep


def u3_telegraph_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("telegraph_u3", _res_u3_telegraph(lam, c), grid, 1, {"lam": lam, "c": c})


def u3_exponential_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("kg_u3_exponential", _res_u3_exponential(lam, c), grid, 1, {"lam": lam, "c": c})


def line_telegraph_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("telegraph_line", _res_coth_telegraph(line_field(lam, c), 1, lam, c), grid, 1,
                {"lam": lam, "c": c})


def plane_telegraph_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("telegraph_plane", _res_coth_telegraph(plane_field(Model.X, lam, c), 2, lam, c),
                grid, 1, {"lam": lam, "c": c})


def plane_y_telegraph_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("telegraph_plane_y", _res_plane_y(lam, c), grid, 1, {"lam": lam, "c": c})


def kg_line_residual(lam, c, grid: Grid2D | None = None) -> ResidualReport:
    grid = grid or default_grid(c)
    return _run("kg_line", _res_kg_line(lam, c), grid, 1, {"lam": lam, "c": c})


def bessel_ode_residual(lam, c, w0: float = 0.2, w1: float = 1.0, h: float = 0.02,
                        n_points: int = 9, radial_dim: int = 3) -> ResidualReport:
    """f'' + (radial_dim/w) f' = (lam/c)^2 f for f(w) = I_1(lam w / c) / w.

    radial_dim = 3 is the operator the w-substitution produces in three
    dimensions; the report also records the residual for radial_dim = 1.
    """
    a = lam / c

    def f(w):
        return bessel_i(1, a * w, _TIGHT) / w

    def residual(step, s=1.0, n=radial_dim):
        w = np.linspace(w0, w1, n_points)
        fp, f0, fm = f(w + step), f(w), f(w - step)
        d2 = (fp - 2 * f0 + fm) / step**2
        d1 = (fp - fm) / (2 * step)
        return d2 + n / w * d1 - s * a * a * f0

    if w0 - h <= 0:
        raise DomainError("stencil reaches w <= 0")
    m1, s1 = _stats(residual(h))
    m2, s2 = _stats(residual(h / 2))
    mp, _ = _stats(residual(h, PERTURBATION))
    alt = _stats(residual(h, n=1))[0] if radial_dim != 1 else m1
    order = None if m2 <= FLOOR else math.log2(m1 / m2)
    ratio = mp / m1 if m1 > 0 else math.inf
    in_band = order is None or ORDER_BAND[0] <= order <= ORDER_BAND[1]
    return ResidualReport(
        equation_id=f"bessel_ode[n={radial_dim}]", params={"lam": lam, "c": c}, h=h,
        residual_max=m1, residual_rms=s1, residual_max_half=m2, residual_rms_half=s2,
        order_estimate=order, negative_control_ratio=ratio,
        passed=bool(in_band and ratio >= CONTROL_RATIO),
        grid={"w0": w0, "w1": w1, "n_points": n_points},
        variants={"radial_dim_1": {"residual_max": alt}},
    )


CHECKS = {
    "kg_power_x3": lambda lam, c: dalembert_power_residual(Model.X, 3, lam, c),
    "telegraph_y3": y3_telegraph_residual,
    "telegraph_u3": u3_telegraph_residual,
    "kg_u3_exponential": u3_exponential_residual,
    "telegraph_line": line_telegraph_residual,
    "telegraph_plane": plane_telegraph_residual,
    "telegraph_plane_y": plane_y_telegraph_residual,
    "kg_line": kg_line_residual,
    "x3_fourth": x3_fourth_order_residual,
    "bessel_ode": bessel_ode_residual,
    "kg_power_x2": lambda lam, c: dalembert_power_residual(Model.X, 2, lam, c),
    "kg_power_y4": lambda lam, c: dalembert_power_residual(Model.Y, 4, lam, c),
}

# Short names accepted by the command line for the checks above.
ALIASES = {
    "cadd": "kg_power_x3",
    "varte": "telegraph_y3",
    "xte": "telegraph_u3",
    "obe": "kg_u3_exponential",
    "sepr": "telegraph_plane_y",
    "simil": "kg_line",
    "pt": "kg_power_x2",
    "ddim4": "kg_power_y4",
}
