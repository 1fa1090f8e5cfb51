"""Hyper-Bessel operators L = x^{a_1} D x^{a_2} ... x^{a_n} D x^{a_{n+1}} and
their integer powers, acting on power functions and on Gamma series.

The radial operator used by the flight laws is d^2/dw^2 + (d/w) d/dw, i.e.
exponents (-d, d, 0).  Its r-th power sends w^beta to

    4^r Gamma(beta/2 + (d+1)/2) Gamma(beta/2 + 1)
    / [Gamma(beta/2 + (d+1)/2 - r) Gamma(beta/2 + 1 - r)] * w^(beta - 2r),

the product of two Erdelyi-Kober factors with (eta, alpha) = ((d-1)/2, -r)
and (0, -r).  The admissibility conditions on the b_k in the function-space
setting are analytic assumptions and are not checked here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy import integrate

from randflight.params import Model, check_model_dim
from randflight.series import PowerTerm, relative_mismatch
from randflight.specfun import gamma_ln, log_rgamma


@dataclass(frozen=True)
class HyperBesselOp:
    exponents: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if len(self.exponents) < 2:
            raise ValueError("need n >= 1, i.e. at least two exponents")

    @property
    def n(self) -> int:
        return len(self.exponents) - 1

    @classmethod
    def radial(cls, d: int) -> "HyperBesselOp":
        return cls((-d, d, 0))

    def normal_form(self):
        return normal_form(self.exponents)

    def apply_to_power(self, beta: float) -> PowerTerm:
        """x^{a_1} D ... D x^{a_{n+1}} x^beta, differentiated factor by factor."""
        coeff, e = 1.0, beta
        for a in reversed(self.exponents[1:]):
            e += a
            coeff *= e
            e -= 1
        e += self.exponents[0]
        return PowerTerm.from_value(coeff, e)


def normal_form(a: Sequence[float]) -> tuple[float, float, list[float]]:
    """Constants (m, a, b_1..b_n) of L f = m^n x^{a-n} prod x^{m - m b_k} D_m x^{m b_k} f."""
    a = [float(v) for v in a]
    n = len(a) - 1
    if n < 1:
        raise ValueError("need at least two exponents")
    a_sum = sum(a)
    m = abs(a_sum - n)
    if m == 0:
        raise ValueError("degenerate operator: m = |a - n| = 0")
    b = [(sum(a[k:]) + k - n) / m for k in range(1, n + 1)]
    return m, a_sum, b


def normal_form_on_power(a: Sequence[float], beta: float) -> PowerTerm:
    """L x^beta evaluated through the normal form.

    Each factor x^{m - m b} D_m x^{m b} maps x^g to ((m b + g)/m) x^g.
    """
    m, a_sum, b = normal_form(a)
    n = len(b)
    coeff = m**n
    for bk in b:
        coeff *= (m * bk + beta) / m
    return PowerTerm.from_value(coeff, beta + a_sum - n)


def frac_int_power(m: float, eta: float, alpha: float, beta: float) -> PowerTerm:
    """Action of the Erdelyi-Kober operator I_m^{eta,alpha} on x^beta."""
    top = eta + beta / m + 1
    if not top > 0:
        raise ValueError(f"need eta + beta/m + 1 > 0, got {top}")
    lg_top, _ = gamma_ln(top)
    l_bot, s_bot = log_rgamma(alpha + top)
    if s_bot == 0:
        return PowerTerm.zero(beta)
    return PowerTerm(lg_top + l_bot, s_bot, beta)


def frac_int_quadrature(m: float, eta: float, alpha: float, f: Callable[[float], float], x: float) -> float:
    """I_m^{eta,alpha} f at x from the integral definition (alpha > 0).

    With s = u/x the integral becomes
    x^{-m eta - m alpha} / Gamma(alpha) * int_0^1 (x^m - (xs)^m)^{alpha-1} (xs)^{m eta} f(xs) m (xs)^{m-1} x ds.
    """
    if not alpha > 0:
        raise ValueError("integral form needs alpha > 0")

    def g(s):
        u = x * s
        return (x**m - u**m) ** (alpha - 1) * u ** (m * eta) * f(u) * m * u ** (m - 1) * x

    val, _ = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return x ** (-m * eta - m * alpha) / math.gamma(alpha) * val


def frac_int_recursive(m: float, eta: float, alpha: float, beta: float, x: float) -> float:
    """I_m^{eta,alpha} x^beta via the alpha <= 0 recursion down to a quadrature.

    On powers the recursion reads
    I^{eta,alpha} x^b = (eta + alpha + 1 + b/m) I^{eta,alpha+1} x^b.
    """
    factor = 1.0
    while alpha <= 0:
        factor *= eta + alpha + 1 + beta / m
        alpha += 1
    return factor * frac_int_quadrature(m, eta, alpha, lambda u: u**beta, x)


def l_power_on_power(d: int, r: int, beta: float) -> PowerTerm:
    """(d^2/dw^2 + (d/w) d/dw)^r w^beta as a single power term."""
    if r < 1:
        raise ValueError("r must be a positive integer")
    p = beta / 2
    if not (p + 1 > 0 and p + (d + 1) / 2 > 0):
        raise ValueError(f"power {beta} violates the Erdelyi-Kober precondition")
    first = frac_int_power(2, (d - 1) / 2, -r, beta)
    second = frac_int_power(2, 0, -r, beta)
    if first.is_zero or second.is_zero:
        return PowerTerm.zero(beta - 2 * r)
    return PowerTerm(
        first.log_abs + second.log_abs + r * math.log(4), first.sign * second.sign, beta - 2 * r
    )


def l_power_product(d: int, r: int, beta: float) -> float:
    """Same coefficient as a finite product: prod_j (beta - 2j)(beta - 2j + d - 1)."""
    out = 1.0
    for j in range(r):
        out *= (beta - 2 * j) * (beta - 2 * j + d - 1)
    return out


# ---------------------------------------------------------------------------


@dataclass
class EigenReport:
    model: str
    d: int
    power: int
    eigenvalue: float
    terms_checked: int
    max_mismatch: float
    source_expected: float
    source_computed: float
    vanishing_ok: bool
    per_term: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.vanishing_ok and self.max_mismatch <= 1e-10

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "per_term"}
        out["passed"] = self.passed
        return out


def source_coefficient(d: int, lam: float, c: float) -> float:
    """(2 lam / c)^{d-2} / (sqrt(pi) Gamma(1 - d/2)); zero for even d."""
    l_r, s_r = log_rgamma(1 - d / 2)
    if s_r == 0:
        return 0.0
    return s_r * math.exp((d - 2) * math.log(2 * lam / c) - 0.5 * math.log(math.pi) + l_r)


def eigen_check(model, d: int, lam: float, c: float, K: int = 40) -> EigenReport:
    """Apply L^r term by term to the Klein-Gordon series of the law and compare
    with eigenvalue * series (+ source w^{-d} for model Y).

    r = d-1 for X and d-2 for Y; the eigenvalue is (lam/c)^{2r}.  Image term k
    lines up with series term k-2; images of k = 1, 2 must vanish except the
    Y source at k = 1.
    """
    from randflight.density import kg_series

    model = Model(model)
    check_model_dim(model, d)
    if K < d + 2:
        raise ValueError("K must be at least d + 2")
    r = d - 1 if model is Model.X else d - 2
    series = kg_series(model, d, lam, c)
    log_eig = 2 * r * math.log(lam / c)
    terms = series.terms(K)
    images = [l_power_on_power(d, r, p.exponent) for p in terms]
    images = [
        PowerTerm.zero(img.exponent) if (img.is_zero or p.is_zero)
        else PowerTerm(img.log_abs + p.log_abs, img.sign * p.sign, img.exponent)
        for img, p in zip(images, terms)
    ]

    source = source_coefficient(d, lam, c) if model is Model.Y else 0.0
    src_img = images[0].coefficient
    vanishing_ok = images[1].is_zero
    if model is Model.X:
        vanishing_ok = vanishing_ok and images[0].is_zero
        src_err = 0.0
    else:
        src_err = relative_mismatch(images[0], PowerTerm.from_value(source, -d))
        if source == 0.0:
            vanishing_ok = vanishing_ok and images[0].is_zero

    per_term = [src_err, 0.0]
    for k in range(3, K + 1):
        target = terms[k - 3].scaled(log_eig)
        per_term.append(relative_mismatch(images[k - 1], target))
    per_term = per_term[: max(K - d, 2)]
    return EigenReport(
        model=model.value, d=d, power=r, eigenvalue=math.exp(log_eig),
        terms_checked=len(per_term), max_mismatch=max(per_term),
        source_expected=source, source_computed=src_img,
        vanishing_ok=vanishing_ok, per_term=per_term,
    )


def radial_normal_form(d: int):
    """Constants of the radial operator; b = ((d-1)/2, 0) and m = 2."""
    return normal_form((-d, d, 0))

