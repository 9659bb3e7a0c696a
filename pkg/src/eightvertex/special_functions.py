"""Scalar building blocks shared by every layer of the toolkit.

Multi-base q-Pochhammer products, the triple-product theta function, the
complete elliptic integral via the arithmetic-geometric mean, the rotated
Jacobi elliptic function snh(u) = -i sn(iu), and two generic numeric
utilities (a Richardson-extrapolated log-derivative and trapezoidal Laurent
coefficient extraction on circles).

All arithmetic is double-precision complex.  Fractional powers of complex
quantities use the principal branch of the logarithm throughout; this one
convention is applied consistently everywhere so that all identity checks
are branch-coherent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ContourError,
    ConvergenceError,
    DomainError,
    SingularityError,
)

ScalarFunction = Callable[[complex], complex]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy: truncation thresholds, test tolerances, step sizes.

    trunc_eps       stop criterion for infinite products and series
    test_tol        maximum accepted identity residual
    diff_step       step for numeric differentiation in the level parameter
    max_terms       hard cap on series terms per index
    contour_points  quadrature nodes per contour (even)
    """

    trunc_eps: float = 1e-14
    test_tol: float = 1e-9
    diff_step: float = 1e-4
    max_terms: int = 400
    contour_points: int = 256

    def __post_init__(self) -> None:
        if not (0.0 < self.trunc_eps < self.test_tol < 1.0):
            raise DomainError(
                "tolerances must satisfy 0 < trunc_eps < test_tol < 1"
            )
        if self.diff_step <= 0.0:
            raise DomainError("diff_step must be positive")
        if self.max_terms < 64:
            raise DomainError("max_terms must be at least 64")
        if self.contour_points < 64 or self.contour_points % 2 != 0:
            raise DomainError("contour_points must be even and at least 64")


DEFAULT_CONFIG = ToleranceConfig()


def _truncation_count(abs_x: float, abs_base: float, cfg: ToleranceConfig) -> int:
    """Smallest exponent count N such that every factor with an exponent
    beyond N differs from 1 by less than trunc_eps."""
    if abs_base == 0.0:
        return 0
    if abs_x == 0.0:
        return 0
    need = (math.log(cfg.trunc_eps) - math.log(abs_x)) / math.log(abs_base)
    n = max(0, math.ceil(need))
    if n > cfg.max_terms:
        raise ConvergenceError(
            f"q-Pochhammer truncation needs {n} terms per index, "
            f"cap is {cfg.max_terms} (|x|={abs_x:.3g}, |base|={abs_base:.3g})"
        )
    return n


def qpochhammer_multi(
    x: complex,
    bases: Sequence[complex],
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Infinite multi-index product prod_{n_i >= 0} (1 - x b_1^{n_1}...b_m^{n_m}).

    Truncated on the rectangle of exponents outside of which every factor
    differs from 1 by less than cfg.trunc_eps.  Deterministic for fixed cfg.
    """
    if len(bases) == 0:
        raise DomainError("qpochhammer_multi requires at least one base")
    bs = [complex(b) for b in bases]
    for b in bs:
        if abs(b) >= 1.0:
            raise DomainError(f"every base must satisfy |b| < 1, got {b!r}")
    xc = complex(x)
    if xc == 0:
        return 1.0 + 0.0j
    ax = abs(xc)
    grid = np.ones(1, dtype=np.complex128)
    for b in bs:
        n = _truncation_count(ax, abs(b), cfg)
        powers = np.power(b, np.arange(n + 1))
        grid = np.multiply.outer(grid, powers).ravel()
    return complex(np.prod(1.0 - xc * grid))


def jacobi_theta(
    x: complex,
    p2: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Triple-product theta function (x; p2) (p2/x; p2) (p2; p2)."""
    xc = complex(x)
    p2c = complex(p2)
    if not 0.0 < abs(p2c) < 1.0:
        raise DomainError("theta base must satisfy 0 < |p2| < 1")
    if xc == 0:
        raise DomainError("theta argument must be nonzero (the p2/x factor)")
    return (
        qpochhammer_multi(xc, [p2c], cfg)
        * qpochhammer_multi(p2c / xc, [p2c], cfg)
        * qpochhammer_multi(p2c, [p2c], cfg)
    )


def _theta_log_x_derivative(
    w: complex,
    p2: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """w d/dw log of the triple-product theta function, summed termwise."""
    wc = complex(w)
    p2c = complex(p2)
    if wc == 0:
        raise DomainError("log-derivative argument must be nonzero")
    guard = math.sqrt(cfg.trunc_eps)
    total = 0.0 + 0.0j
    pw = 1.0 + 0.0j
    for n in range(cfg.max_terms + 1):
        a = wc * pw          # from (w; p2): factor 1 - w p2^n, n >= 0
        da = 1.0 - a
        if abs(da) < guard:
            raise SingularityError("theta log-derivative evaluated at a zero")
        t1 = -a / da
        pw *= p2c
        b = pw / wc          # from (p2/w; p2): factor 1 - p2^{n+1}/w
        db = 1.0 - b
        if abs(db) < guard:
            raise SingularityError("theta log-derivative evaluated at a zero")
        t2 = b / db
        total += t1 + t2
        if abs(a) < cfg.trunc_eps and abs(b) < cfg.trunc_eps:
            return total
    raise ConvergenceError("theta log-derivative did not converge")


def elliptic_K(modulus: float) -> float:
    """Complete elliptic integral K(k) by the arithmetic-geometric mean."""
    k = float(modulus)
    if not 0.0 <= k < 1.0:
        raise DomainError("modulus must lie in [0, 1)")
    comp = (1.0 - k) * (1.0 + k)
    if comp < 1e-15:
        raise DomainError("modulus too close to 1; the integral diverges")
    a, b = 1.0, math.sqrt(comp)
    for _ in range(64):
        if abs(a - b) <= 4.0 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def modulus_from_nome(
    p: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Modulus k with exp(-pi K'(k)/K(k)) = p, from theta-constant quotients.

    Real nomes in (0, 1) give a real modulus in (0, 1); complex nomes in the
    punctured unit disc are accepted (principal square root) because the
    level-shifted R-matrix rebuilds parameters at a complex nome.
    """
    pc = complex(p)
    if not 0.0 < abs(pc) < 1.0:
        raise DomainError("nome must satisfy 0 < |p| < 1")
    p2 = pc * pc
    num = qpochhammer_multi(-p2, [p2], cfg)
    den = qpochhammer_multi(-pc, [p2], cfg)
    k = 4.0 * cmath.sqrt(pc) * (num / den) ** 4
    if pc.imag == 0.0 and pc.real > 0.0:
        return k.real
    return k


def theta3_zero_squared(
    p: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Square of the third theta constant at the given nome.

    Equals 2K/pi; used to build K for complex nomes where the AGM route is
    not available."""
    pc = complex(p)
    p2 = pc * pc
    t3 = qpochhammer_multi(p2, [p2], cfg) * qpochhammer_multi(-pc, [p2], cfg) ** 2
    return t3 * t3


@lru_cache(maxsize=256)
def _snh_scale(p: complex, cfg: ToleranceConfig) -> complex:
    # (1/2) ((-p; p^2)/(-p^2; p^2))^2; the quarter-power of the nome that
    # appears in the classical theta quotient cancels exactly, so the scale
    # is branch-free.
    p2 = p * p
    num = qpochhammer_multi(-p, [p2], cfg)
    den = qpochhammer_multi(-p2, [p2], cfg)
    return 0.5 * (num / den) ** 2


def _odd_power_lattice_distance(w: complex, base: complex) -> float:
    """Distance |w / base^(2l+1) - 1| minimized over nearby integers l."""
    ab = abs(base)
    aw = abs(w)
    if ab == 0.0 or aw == 0.0:
        return math.inf
    center = (math.log(aw) / math.log(ab) - 1.0) / 2.0
    best = math.inf
    for ell in range(math.floor(center) - 1, math.floor(center) + 3):
        sigma = base ** (2 * ell + 1)
        if sigma != 0:
            best = min(best, abs(w / sigma - 1.0))
    return best


def snh_from_x(
    x: complex,
    nome: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """snh evaluated in the multiplicative coordinate x = exp(pi u / 2K).

    Theta-quotient form; poles sit where the denominator theta vanishes,
    i.e. at x^2 on odd powers of the nome.
    """
    xc = complex(x)
    pc = complex(nome)
    if xc == 0:
        raise DomainError("multiplicative coordinate must be nonzero")
    w = xc * xc
    if _odd_power_lattice_distance(w, pc) < math.sqrt(cfg.trunc_eps):
        raise SingularityError("snh evaluated too close to a pole")
    p2 = pc * pc
    num = jacobi_theta(w, p2, cfg)
    den = jacobi_theta(pc * w, p2, cfg)
    return -_snh_scale(pc, cfg) * num / (xc * den)


def snh_log_x_derivative(
    x: complex,
    nome: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """x d/dx log snh in the multiplicative coordinate (termwise analytic)."""
    xc = complex(x)
    pc = complex(nome)
    w = xc * xc
    p2 = pc * pc
    return (
        -1.0
        + 2.0 * _theta_log_x_derivative(w, p2, cfg)
        - 2.0 * _theta_log_x_derivative(pc * w, p2, cfg)
    )


@lru_cache(maxsize=64)
def _nome_of_modulus(modulus: float) -> tuple[float, float]:
    big_k = elliptic_K(modulus)
    big_kp = elliptic_K(math.sqrt((1.0 - modulus) * (1.0 + modulus)))
    return math.exp(-math.pi * big_kp / big_k), big_k


def snh(
    u: complex,
    modulus: float,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Rotated Jacobi elliptic function snh(u) = -i sn(iu) at modulus k."""
    k = float(modulus)
    if not 0.0 < k < 1.0:
        raise DomainError("modulus must lie in (0, 1)")
    nome, big_k = _nome_of_modulus(k)
    x = cmath.exp(math.pi * complex(u) / (2.0 * big_k))
    return snh_from_x(x, nome, cfg)


def numeric_log_derivative(
    f: ScalarFunction,
    x: complex,
    h: float,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """x (d/dx) log f(x) by central differences with one Richardson step.

    Error O(h^4) for analytic f; raises if f is numerically zero at x."""
    xc = complex(x)
    hc = float(h)
    if hc <= 0.0:
        raise DomainError("step must be positive")
    f0 = f(xc)
    if abs(f0) < cfg.trunc_eps:
        raise SingularityError("log-derivative of a numerically vanishing value")
    d1 = (f(xc + hc) - f(xc - hc)) / (2.0 * hc)
    d2 = (f(xc + 0.5 * hc) - f(xc - 0.5 * hc)) / hc
    return xc * (4.0 * d2 - d1) / (3.0 * f0)


def contour_coefficient(
    f: ScalarFunction,
    radius: float,
    s: int,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
    pole_radii: Sequence[float] = (),
) -> complex:
    """(1/2 pi i) times the circle integral of f(x) x^{-2s} dx/x.

    Trapezoidal rule on cfg.contour_points nodes; spectrally accurate for f
    analytic in a neighbourhood of the circle."""
    r = float(radius)
    if r <= 0.0:
        raise DomainError("contour radius must be positive")
    guard = math.sqrt(cfg.trunc_eps)
    for rho in pole_radii:
        if abs(r - rho) < guard:
            raise ContourError(
                f"contour radius {r} grazes declared pole radius {rho}"
            )
    n = cfg.contour_points
    angles = _TWO_PI * np.arange(n) / n
    nodes = r * np.exp(1j * angles)
    values = np.array([f(complex(z)) for z in nodes], dtype=np.complex128)
    return complex(np.mean(values * nodes ** (-2 * s)))
