"""Quadratic Poisson brackets on the even modes, indexed by the annulus
sector k.

The generator bracket is {t_n, t_m}_k = sum_s F_k(s) t_{m+2s} t_{n-2s} with
the odd structure constants F_k(s); it extends to polynomials by the Leibniz
rule.  Structure constants are built so that F_k(-s) is the bitwise exact
negation of F_k(s), and per-monomial contributions are accumulated with
compensated summation, which makes antisymmetry of the bracket exact at
coefficient level rather than merely small.

Crossing the contour ratio over a pole radius adds the step contribution
implemented in delta_step_contribution; summed over steps it telescopes the
k = 0 family into the generic one.  The delta distribution behind those
steps is never materialized, only its residue action.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping

from .errors import DomainError, ModeWindowError
from .report import CheckReport, make_check
from .special_functions import DEFAULT_CONFIG, ToleranceConfig, contour_coefficient

Monomial = tuple[int, ...]


def _canonical_monomial(indices: Iterable[int]) -> Monomial:
    key = []
    for idx in indices:
        i = int(idx)
        if i % 2 != 0:
            raise DomainError(f"mode indices must be even, got {i}")
        key.append(i)
    return tuple(sorted(key))


def _finalize(buckets: Mapping[Monomial, list[complex]]) -> dict[Monomial, complex]:
    out: dict[Monomial, complex] = {}
    for key, vals in buckets.items():
        re = math.fsum(v.real for v in vals)
        im = math.fsum(v.imag for v in vals)
        if re != 0.0 or im != 0.0:
            out[key] = complex(re, im)
    return out


class ModePolynomial:
    """Immutable commutative polynomial in the even mode symbols t_n.

    Terms map canonical (sorted) index multisets to complex coefficients;
    exact zeros are dropped."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, complex] | None = None):
        buckets: dict[Monomial, list[complex]] = {}
        if terms:
            for mono, coeff in terms.items():
                buckets.setdefault(_canonical_monomial(mono), []).append(complex(coeff))
        object.__setattr__(self, "_terms", _finalize(buckets))

    def __setattr__(self, name, value):
        raise AttributeError("ModePolynomial is immutable")

    @classmethod
    def _raw(cls, terms: dict[Monomial, complex]) -> "ModePolynomial":
        poly = cls.__new__(cls)
        object.__setattr__(poly, "_terms", terms)
        return poly

    @classmethod
    def zero(cls) -> "ModePolynomial":
        return cls._raw({})

    @classmethod
    def generator(cls, n: int) -> "ModePolynomial":
        return cls({_canonical_monomial([n]): 1.0 + 0.0j})

    @property
    def terms(self) -> dict[Monomial, complex]:
        return dict(self._terms)

    def coefficient(self, mono: Iterable[int]) -> complex:
        return self._terms.get(_canonical_monomial(mono), 0.0 + 0.0j)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "ModePolynomial") -> "ModePolynomial":
        buckets: dict[Monomial, list[complex]] = {}
        for src in (self._terms, other._terms):
            for key, val in src.items():
                buckets.setdefault(key, []).append(val)
        return ModePolynomial._raw(_finalize(buckets))

    def __neg__(self) -> "ModePolynomial":
        return ModePolynomial._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "ModePolynomial") -> "ModePolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ModePolynomial):
            buckets: dict[Monomial, list[complex]] = {}
            for k1, v1 in self._terms.items():
                for k2, v2 in other._terms.items():
                    key = tuple(sorted(k1 + k2))
                    buckets.setdefault(key, []).append(v1 * v2)
            return ModePolynomial._raw(_finalize(buckets))
        scal = complex(other)
        if scal == 0:
            return ModePolynomial.zero()
        return ModePolynomial._raw({k: v * scal for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModePolynomial):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None  # mutable-dict backed equality

    def max_abs_diff(self, other: "ModePolynomial") -> float:
        keys = set(self._terms) | set(other._terms)
        if not keys:
            return 0.0
        return max(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) for k in keys
        )

    def max_abs_coeff(self) -> float:
        if not self._terms:
            return 0.0
        return max(abs(v) for v in self._terms.values())

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self._terms.items()))
        return f"ModePolynomial({{{inner}}})"


@dataclass(frozen=True)
class BracketFamily:
    """Sector index k, deformation base q, and structure-constant cutoff."""

    k: int
    q: complex
    s_cutoff: int = 8

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 0:
            raise DomainError("sector index k must be a non-negative integer")
        object.__setattr__(self, "k", int(self.k))
        qc = complex(self.q)
        if not 0.0 < abs(qc) < 1.0:
            raise DomainError("base q must satisfy 0 < |q| < 1")
        object.__setattr__(self, "q", qc)
        if int(self.s_cutoff) != self.s_cutoff or self.s_cutoff < 1:
            raise DomainError("s_cutoff must be a positive integer")
        object.__setattr__(self, "s_cutoff", int(self.s_cutoff))

    @property
    def log_q(self) -> complex:
        return cmath.log(self.q)


def F_coefficient(fam: BracketFamily, s: int) -> complex:
    """Structure constant of the sector-k generator bracket.

    Exactly zero at s = 0, and F(-s) is the exact negation of F(s)."""
    si = int(s)
    if abs(si) > fam.s_cutoff:
        raise DomainError(f"|s| = {abs(si)} exceeds s_cutoff = {fam.s_cutoff}")
    if si == 0:
        return 0.0 + 0.0j
    t = abs(si)
    q = fam.q
    order = 2 * fam.k + 1
    num = q ** (order * t) - q ** (-order * t)
    den = q ** t + q ** (-t)
    value = (-1.0) ** (fam.k + 1) * 2.0 * fam.log_q * num / den
    return value if si > 0 else -value


def _window_check(index: int, window: int | None) -> None:
    if window is not None and abs(index) > window:
        raise ModeWindowError(
            f"generated mode index {index} falls outside the window |n| <= {window}"
        )


def poisson_bracket(
    P: ModePolynomial,
    Q: ModePolynomial,
    fam: BracketFamily,
    window: int | None = None,
) -> ModePolynomial:
    """Sector-k Poisson bracket {P, Q}, extended by the Leibniz rule.

    Generated indices outside the window raise rather than being dropped,
    since for k >= 1 the structure constants grow with |s| and silent
    truncation would corrupt downstream identities."""
    buckets: dict[Monomial, list[complex]] = {}
    s_values = [s for s in range(-fam.s_cutoff, fam.s_cutoff + 1) if s != 0]
    f_values = {s: F_coefficient(fam, s) for s in s_values}
    for mono_p, c_p in P.terms.items():
        for i in range(len(mono_p)):
            n = mono_p[i]
            rest_p = mono_p[:i] + mono_p[i + 1:]
            for mono_q, c_q in Q.terms.items():
                base = c_p * c_q
                for j in range(len(mono_q)):
                    m = mono_q[j]
                    rest_q = mono_q[:j] + mono_q[j + 1:]
                    for s in s_values:
                        ia = m + 2 * s
                        ib = n - 2 * s
                        _window_check(ia, window)
                        _window_check(ib, window)
                        key = tuple(sorted(rest_p + rest_q + (ia, ib)))
                        buckets.setdefault(key, []).append(base * f_values[s])
    return ModePolynomial._raw(_finalize(buckets))


def delta_step_contribution(
    n: int,
    m: int,
    j: int,
    fam: BracketFamily,
    window: int,
) -> ModePolynomial:
    """Residue contribution picked up when the contour ratio crosses the
    j-th pole radius, restricted to the mode window."""
    if n % 2 != 0 or m % 2 != 0:
        raise DomainError("mode indices must be even")
    if j < 1:
        raise DomainError("pole step j must be a positive integer")
    w = int(window)
    if w < 0 or w % 2 != 0:
        raise DomainError("window must be a non-negative even integer")
    q = fam.q
    prefactor = -((-1.0) ** j) * 2.0 * fam.log_q
    buckets: dict[Monomial, list[complex]] = {}
    for a in range(-w, w + 1, 2):
        partner = n + m - a
        if abs(partner) > w:
            continue
        if a == n:
            continue  # the q^0 - q^0 term vanishes identically
        e = j * (n - a)
        t = abs(e)
        osc = q ** t - q ** (-t)
        if e < 0:
            osc = -osc
        key = tuple(sorted((a, partner)))
        buckets.setdefault(key, []).append(prefactor * osc)
    return ModePolynomial._raw(_finalize(buckets))


def check_telescoping(fam: BracketFamily, s: int) -> CheckReport:
    """Residuals of the step recursion between adjacent sector families.

    Residuals are scaled by the largest participating magnitude, since the
    structure constants grow geometrically with k|s|."""
    report = CheckReport(suite="telescoping", params_echo={"q": fam.q, "s": int(s)})
    q = fam.q
    for kk in range(1, fam.k + 1):
        f_hi = F_coefficient(replace(fam, k=kk), s)
        f_lo = F_coefficient(replace(fam, k=kk - 1), s)
        t = abs(2 * kk * s)
        osc = q ** t - q ** (-t)
        if 2 * kk * s < 0:
            osc = -osc
        step = -((-1.0) ** kk) * 2.0 * fam.log_q * osc
        scale = max(1.0, abs(f_hi), abs(f_lo), abs(step))
        residual = abs(f_hi - f_lo - step) / scale
        report.checks.append(make_check(f"telescoping_k{kk}", [residual], 1e-12))
    return report


def truncated_kernel(
    fam: BracketFamily,
    s_max: int | None = None,
) -> Callable[[complex], complex]:
    """Laurent-polynomial kernel sum_s F_k(s) x^(2s), |s| <= s_max.

    Exactly antisymmetric under x -> 1/x because the structure constants are
    odd; this is the realizable stand-in for the sector-k bracket kernel in
    functional identity checks."""
    cut = fam.s_cutoff if s_max is None else min(int(s_max), fam.s_cutoff)
    coeffs = [(s, F_coefficient(fam, s)) for s in range(1, cut + 1)]

    def kernel(x: complex) -> complex:
        xc = complex(x)
        w = xc * xc
        total = 0.0 + 0.0j
        power = 1.0 + 0.0j
        for _, f in coeffs:
            power *= w
            total += f * (power - 1.0 / power)
        return total

    return kernel


def check_jacobi_functional(
    z: complex,
    w: complex,
    v: complex,
    f: Callable[[complex], complex] | BracketFamily,
    tolerance: float = 1e-9,
) -> CheckReport:
    """Cyclic functional identity behind the Jacobi property of the bracket
    {t(z), t(w)} = f(z/w) t(z) t(w); vanishes for any antisymmetric kernel."""
    kernel = truncated_kernel(f) if isinstance(f, BracketFamily) else f
    t1 = kernel(z / w) * (kernel(z / v) + kernel(w / v))
    t2 = kernel(w / v) * (kernel(w / z) + kernel(v / z))
    t3 = kernel(v / z) * (kernel(v / w) + kernel(z / w))
    scale = max(1.0, abs(t1), abs(t2), abs(t3))
    residual = abs(t1 + t2 + t3) / scale
    report = CheckReport(suite="jacobi-functional", params_echo={})
    report.checks.append(make_check("jacobi_cyclic", [residual], tolerance))
    return report


def check_contour_match(
    fam: BracketFamily,
    s: int,
    radius: float,
    params,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
    tolerance: float = 1e-8,
) -> CheckReport:
    """Symmetrized double-contour realization of the bracket coefficients.

    Averages the Laurent coefficients of the structure function over the
    contour-ratio circle and its inverse, and compares against the sector-k
    structure constant; the radius must lie strictly inside sector k."""
    from .poisson_center import structure_function_closed

    if abs(complex(params.q) - fam.q) > 1e-12:
        raise DomainError("family base must match the structure-function parameters")
    aq = abs(fam.q)
    lo = aq ** (-fam.k)
    hi = aq ** (-fam.k - 1)
    r = float(radius)
    if not lo < r < hi:
        raise DomainError(
            f"radius {r} must lie strictly inside sector {fam.k}: ({lo:.6g}, {hi:.6g})"
        )
    span = fam.k + 3
    pole_radii = [aq ** j for j in range(-span, span + 1)]

    def f(x: complex) -> complex:
        return structure_function_closed(x, params, cfg)

    c_out = contour_coefficient(f, r, s, cfg, pole_radii=pole_radii)
    c_in = contour_coefficient(f, 1.0 / r, s, cfg, pole_radii=pole_radii)
    symmetrized = 0.5 * (c_out + c_in)
    reference = F_coefficient(fam, s)
    residual = abs(symmetrized - reference) / max(1.0, abs(reference))
    report = CheckReport(
        suite="contour-match",
        params_echo={"q": fam.q, "k": fam.k, "s": int(s), "radius": r},
    )
    report.checks.append(make_check(f"contour_k{fam.k}_s{int(s)}", [residual], tolerance))
    return report
