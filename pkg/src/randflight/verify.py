"""Invariant suites shared by the CLI and the test-suite.

Each suite returns a list of plain dicts with at least ``name`` and
``passed`` so results serialize straight to JSON.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from randflight import density as dens
from randflight import hyperbessel as hb
from randflight import pdecheck
from randflight.counts import CountDistribution, Family, log_pmf_multi_index, pgf_ode_residual
from randflight.flight import binomial_sigma, simulate_batch, simulate_fixed_k
from randflight.params import FlightParams, Model

SUITES = ("counts", "mixture", "mc", "hyperbessel", "pde")
ACCEPTANCE_PDE = ("kg_power_x3", "telegraph_y3", "telegraph_u3", "telegraph_line", "telegraph_plane", "kg_line")


@dataclass(frozen=True)
class VerifyConfig:
    model: Model | None = None
    d: int | None = None
    lam: float = 1.0
    c: float = 1.0
    t: float = 1.0
    n: int = 100_000
    seed: int = 2024
    k: int | None = None
    which: str | None = None
    tol: float | None = None


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def _tol(cfg: VerifyConfig, default: float) -> float:
    return default if cfg.tol is None else cfg.tol


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a)


# ---------------------------------------------------------------------------
# counts


def poisson_reduction(lts=(0.1, 1.0, 5.0), k_max: int = 50, tol: float = 1e-12) -> dict:
    worst = 0.0
    for lt in lts:
        dist = CountDistribution(Family.FIRST, 2, lt, 1.0)
        for k in range(k_max + 1):
            ref = stats.poisson.pmf(k, lt)
            worst = max(worst, abs(dist.pmf(k) - float(ref)))
    return _check("poisson_reduction", worst <= tol, max_abs_diff=worst, tol=tol)


def multi_index_rewrite(dims=(2, 3, 4, 5), lts=(0.5, 1.0, 2.0), k_max: int = 30, tol: float = 1e-9) -> dict:
    worst, cases = 0.0, []
    for d in dims:
        families = [Family.FIRST] + ([Family.SECOND] if d >= 3 else [])
        for fam in families:
            for lt in lts:
                dist = CountDistribution(fam, d, lt, 1.0)
                err = max(abs(math.expm1(log_pmf_multi_index(dist, k) - dist.log_pmf(k))) for k in range(k_max + 1))
                worst = max(worst, err)
                cases.append({"family": fam.value, "d": d, "lt": lt, "max_rel": err})
    return _check("multi_index_rewrite", worst <= tol, max_rel_diff=worst, tol=tol, cases=cases)


def pgf_ode(dims=(2, 3, 4, 5), lts=(0.5, 1.0), us=(0.25, 0.5, 0.75), tol: float = 1e-9) -> dict:
    worst = max(pgf_ode_residual(d, lt, 1.0, u) for d in dims for lt in lts for u in us)
    return _check("pgf_ode", worst <= tol, max_residual=worst, tol=tol)


def pmf_total(tol: float = 1e-12) -> dict:
    worst = 0.0
    for fam, dims in ((Family.FIRST, range(2, 7)), (Family.SECOND, range(3, 7))):
        for d in dims:
            for lt in (0.25, 1.0, 4.0):
                worst = max(worst, abs(float(CountDistribution(fam, d, lt, 1.0).pmf_table().sum()) - 1))
    return _check("pmf_total", worst <= tol, max_abs_diff=worst, tol=tol)


def suite_counts(cfg: VerifyConfig) -> list[dict]:
    return [
        poisson_reduction(tol=_tol(cfg, 1e-12)),
        multi_index_rewrite(tol=_tol(cfg, 1e-9)),
        pgf_ode(tol=_tol(cfg, 1e-9)),
        pmf_total(tol=_tol(cfg, 1e-12)),
    ]


# ---------------------------------------------------------------------------
# mixture and quadrature


def closed_vs_mixture(c=1.0, lam=1.0, t=1.0, points: int = 50, tol: float = 1e-9) -> list[dict]:
    r = np.linspace(0.0, 0.98 * c * t, points)
    out = []
    for model, d in ((Model.X, 3), (Model.X, 2), (Model.Y, 3)):
        closed = dens.closed_form_density(model, d, c, lam, t, r)
        mix = dens.mixture_density(model, d, c, lam, t, r)
        err = float(np.max(np.abs(closed - mix) / np.abs(mix)))
        out.append(_check(f"closed_vs_mixture[{model.value}{d}]", err <= tol, max_rel_diff=err, tol=tol))
    series = dens.y3_series_density(c, lam, t, r)
    closed = dens.closed_form_density(Model.Y, 3, c, lam, t, r)
    err = float(np.max(np.abs(series - closed) / closed))
    out.append(_check("y3_two_forms", err <= tol, max_rel_diff=err, tol=tol))
    return out


def mass_balance(model, d, c=1.0, lam=1.0, t=1.0, tol: float = 1e-8) -> dict:
    law = dens.RadialLaw(model, d, c, lam, t)
    ac = dens.ball_mass(law)
    w = dens.singular_weight(model, d, lam, t)
    if Model(model) is Model.U3:
        # Even event counts are not part of this law; compare with its known mass.
        lt = lam * t
        target = math.exp(-lt) * (math.sinh(lt) - lt)
        err = abs(ac - target)
        return _check("mass_balance[u3]", err <= tol, ac_mass=ac, expected=target, abs_diff=err, tol=tol)
    err = abs(ac - (1 - w))
    return _check(f"mass_balance[{Model(model).value}{d}]", err <= tol,
                  ac_mass=ac, singular_weight=w, abs_diff=err, tol=tol)


def origin_limits(c=1.0, lam=1.0, t=1.0, tol: float = 1e-6) -> list[dict]:
    out = []
    rho = 1e-6 * c * t
    for model in (Model.X, Model.Y):
        val = dens.project_plane(model, c, lam, t, rho)
        ref = dens.plane_origin_limit(model, c, lam, t)
        err = _rel(val, ref)
        out.append(_check(f"origin_limit[{model.value}]", err <= tol, value=val, limit=ref, rel_diff=err, tol=tol))
    return out


def suite_mixture(cfg: VerifyConfig) -> list[dict]:
    out = closed_vs_mixture(cfg.c, cfg.lam, cfg.t, tol=_tol(cfg, 1e-9))
    for model, d in ((Model.X, 2), (Model.X, 3), (Model.X, 4), (Model.Y, 3), (Model.Y, 4), (Model.U3, 3)):
        out.append(mass_balance(model, d, cfg.c, cfg.lam, cfg.t, tol=_tol(cfg, 1e-8)))
    out += origin_limits(cfg.c, cfg.lam, cfg.t, tol=_tol(cfg, 1e-6))
    return out


# ---------------------------------------------------------------------------
# Monte Carlo


def singular_fraction(params: FlightParams, n: int, seed: int, sigmas: float = 3.0) -> dict:
    batch = simulate_batch(params, n, seed)
    frac = float(np.mean(batch.k_values == 0))
    w = dens.singular_weight(params.model, params.d, params.lam, params.t)
    sigma = binomial_sigma(w, n)
    z = (frac - w) / sigma
    return _check(f"singular_fraction[{params.model.value}{params.d}]", abs(z) <= sigmas,
                  fraction=frac, weight=w, z=z, n=n, seed=seed)


def ks_radii(radii: np.ndarray, law: dens.RadialLaw, alpha: float = 0.01, name: str = "ks") -> dict:
    res = stats.kstest(radii, lambda r: dens.radial_cdf(law, r))
    return _check(name, res.pvalue >= alpha, statistic=float(res.statistic),
                  pvalue=float(res.pvalue), n=int(radii.size), alpha=alpha, law=law.to_dict())


def conditional_ks(params: FlightParams, k: int, n: int, seed: int, alpha: float = 0.01) -> dict:
    pos = simulate_fixed_k(params, k, n, seed)
    law = dens.RadialLaw(params.model, params.d, params.c, params.lam, params.t, dens.Kind.CONDITIONAL, k)
    return ks_radii(np.linalg.norm(pos, axis=1), law, alpha,
                    f"conditional_ks[{params.model.value}{params.d},k={k}]")


def quantile_edges(law: dens.RadialLaw, bins: int, grid: int = 4096) -> np.ndarray:
    """Radial bin edges with (nearly) equal mass under ``law``."""
    r = np.linspace(0.0, law.ct, grid + 1)[:-1]
    cdf = dens.radial_cdf(law, r)
    inner = np.interp(np.arange(1, bins) / bins, cdf, r)
    return np.concatenate([[0.0], inner, [law.ct]])


def u3_checks(params: FlightParams, n: int, seed: int, bins: int = 32, alpha: float = 0.01,
              sigmas: float = 3.0) -> list[dict]:
    batch = simulate_batch(params, n, seed)
    stratum = (batch.events % 2 == 1) & (batch.events >= 3)
    law = dens.RadialLaw(Model.U3, 3, params.c, params.lam, params.t)
    mass = dens.ball_mass(law)
    frac = float(stratum.mean())
    z = (frac - mass) / binomial_sigma(mass, n)
    mass_check = _check("u3_odd_mass", abs(z) <= sigmas, fraction=frac, quadrature_mass=mass,
                        z=z, n=n, seed=seed)
    radii = batch.radii[stratum]
    edges = quantile_edges(law, bins)
    expected = dens.bin_masses(law, edges)
    expected = expected / expected.sum() * radii.size
    observed = np.histogram(radii, edges)[0]
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    pvalue = float(stats.chi2.sf(chi2, bins - 1))
    chi_check = _check("u3_radial_chi2", pvalue >= alpha, chi2=chi2, dof=bins - 1, pvalue=pvalue,
                       bins=bins, n_stratum=int(radii.size), min_expected=float(expected.min()))
    return [mass_check, chi_check]


def suite_mc(cfg: VerifyConfig) -> list[dict]:
    if cfg.model is None:
        targets = [(Model.X, 3), (Model.Y, 3), (Model.U3, 3)]
    else:
        targets = [(Model(cfg.model), cfg.d or 3)]
    out = []
    for model, d in targets:
        params = FlightParams(model, d, cfg.c, cfg.lam, cfg.t)
        if model is Model.U3:
            out += u3_checks(params, cfg.n, cfg.seed)
            continue
        out.append(singular_fraction(params, cfg.n, cfg.seed))
        out.append(conditional_ks(params, cfg.k or 2, cfg.n, cfg.seed))
    return out


# ---------------------------------------------------------------------------
# hyper-Bessel and PDE


def suite_hyperbessel(cfg: VerifyConfig) -> list[dict]:
    if cfg.d is not None:
        cases = [(Model.X, cfg.d)] + ([(Model.Y, cfg.d)] if cfg.d >= 3 else [])
        if cfg.model is not None:
            cases = [(m, d) for m, d in cases if m is Model(cfg.model)]
    else:
        cases = [(Model.X, d) for d in range(2, 7)] + [(Model.Y, d) for d in range(3, 7)]
    tol = _tol(cfg, 1e-10)
    out = []
    for model, d in cases:
        rep = hb.eigen_check(model, d, cfg.lam, cfg.c, K=40 + d)
        detail = {k: v for k, v in rep.to_dict().items() if k != "passed"}
        out.append(_check(f"eigen[{model.value}{d}]", rep.vanishing_ok and rep.max_mismatch <= tol,
                          tol=tol, **detail))
        if model is Model.Y and d % 2 == 0:
            zero = rep.source_expected == 0.0 and rep.source_computed == 0.0
            out.append(_check(f"even_source_zero[{d}]", zero, source_expected=rep.source_expected,
                              source_computed=rep.source_computed))
    return out


def suite_pde(cfg: VerifyConfig) -> list[dict]:
    names = ACCEPTANCE_PDE if cfg.which in (None, "acceptance") else (
        tuple(pdecheck.CHECKS) if cfg.which == "all" else (pdecheck.ALIASES.get(cfg.which, cfg.which),))
    out = []
    for name in names:
        if name not in pdecheck.CHECKS:
            raise KeyError(f"unknown PDE check {name!r}; choose from {sorted(pdecheck.CHECKS)}")
        rep = pdecheck.CHECKS[name](cfg.lam, cfg.c)
        out.append(_check(name, rep.passed, report=rep.to_dict()))
    return out


RUNNERS = {
    "counts": suite_counts,
    "mixture": suite_mixture,
    "mc": suite_mc,
    "hyperbessel": suite_hyperbessel,
    "pde": suite_pde,
}


def run_suite(name: str, cfg: VerifyConfig | None = None) -> list[dict]:
    cfg = cfg or VerifyConfig()
    if name == "all":
        return [dict(check, suite=s) for s in SUITES for check in RUNNERS[s](cfg)]
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}")
    return [dict(check, suite=name) for check in RUNNERS[name](cfg)]
