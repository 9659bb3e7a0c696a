"""Eight-vertex R-matrix: construction, normalization, and identity checks.

Everything is evaluated in the multiplicative spectral coordinate
x = exp(pi u / 2K), where the Boltzmann-weight functions become single-valued
theta-product quotients.  The additive coordinate u only enters through the
parameter bundle and the public snh wrapper.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConditioningError,
    DomainError,
    SingularityError,
    ToolkitError,
)
from .report import CheckReport, CheckResult, make_check
from .special_functions import (
    DEFAULT_CONFIG,
    ToleranceConfig,
    elliptic_K,
    jacobi_theta,
    modulus_from_nome,
    qpochhammer_multi,
    snh_from_x,
    snh_log_x_derivative,
    theta3_zero_squared,
)

SIGMA = {
    1: np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    2: np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    3: np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}

_ID2 = np.eye(2, dtype=np.complex128)


def principal_power(base: complex, exponent: float) -> complex:
    """base**exponent with the principal logarithm; integer exponents are
    computed by repeated multiplication so they stay exactly real for real
    bases."""
    b = complex(base)
    e = float(exponent)
    if e == int(e) and abs(e) <= 64:
        return b ** int(e)
    return cmath.exp(e * cmath.log(b))


# ---------------------------------------------------------------------------
# parameter bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModularParams:
    """Elliptic nome p, deformation parameter q, and derived constants.

    For a real nome the elliptic integrals come from the AGM; for a complex
    nome (reached only through the level-shifted R-matrix) K is built from
    the third theta constant and K' is defined by exp(-pi K'/K) = p.
    """

    p: complex
    q: complex
    modulus: complex
    bigK: complex
    bigKprime: complex
    lam: complex

    @property
    def x_lambda(self) -> complex:
        """Multiplicative coordinate of the crossing parameter."""
        return -1.0 / self.q

    def residuals(self, cfg: ToleranceConfig = DEFAULT_CONFIG) -> dict[str, float]:
        """Consistency residuals for the defining relations of the bundle."""
        nome = cmath.exp(-math.pi * self.bigKprime / self.bigK)
        r_nome = abs(nome - self.p)
        r_q = abs(-cmath.exp(-math.pi * self.lam / (2.0 * self.bigK)) - self.q)
        if self.p.imag == 0.0 and self.p.real > 0.0:
            r_modulus = abs(complex(elliptic_K(self.modulus.real)) - self.bigK)
        else:
            r_modulus = abs(
                math.pi / 2.0 * theta3_zero_squared(self.p, cfg) - self.bigK
            )
        return {"nome": r_nome, "q": r_q, "modulus": r_modulus}


def make_params(
    p: complex,
    q: complex,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> ModularParams:
    """Build the parameter bundle from the nome and deformation parameter."""
    pc = complex(p)
    qc = complex(q)
    if not 0.0 < abs(pc) < 1.0:
        raise DomainError("nome p must satisfy 0 < |p| < 1")
    if not 0.0 < abs(qc) < 1.0:
        raise DomainError("deformation parameter q must satisfy 0 < |q| < 1")
    k = modulus_from_nome(pc, cfg)
    if pc.imag == 0.0 and pc.real > 0.0:
        kr = float(np.real(k))
        big_k = complex(elliptic_K(kr))
        big_kp = complex(elliptic_K(math.sqrt((1.0 - kr) * (1.0 + kr))))
        k = complex(kr)
    else:
        big_k = math.pi / 2.0 * theta3_zero_squared(pc, cfg)
        big_kp = -big_k * cmath.log(pc) / math.pi
    lam = -(2.0 * big_k / math.pi) * cmath.log(-qc)
    return ModularParams(pc, qc, complex(k), big_k, big_kp, lam)


@dataclass(frozen=True)
class SpectralPoint:
    """Multiplicative and additive spectral coordinates, kept consistent."""

    x: complex
    u: complex

    @classmethod
    def from_x(cls, x: complex, params: ModularParams) -> "SpectralPoint":
        xc = complex(x)
        if xc == 0:
            raise DomainError("spectral coordinate must be nonzero")
        u = (2.0 * params.bigK / math.pi) * cmath.log(xc)
        return cls(xc, u)

    @classmethod
    def from_u(cls, u: complex, params: ModularParams) -> "SpectralPoint":
        uc = complex(u)
        x = cmath.exp(math.pi * uc / (2.0 * params.bigK))
        return cls(x, uc)


# ---------------------------------------------------------------------------
# two-site tensor matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorMatrix:
    """4x4 complex matrix on the two-site tensor space.

    Row and column indices factor as pairs (i1, i2) with i = 2*i1 + i2, so
    partial transposes and space permutation are axis swaps of the (2,2,2,2)
    view.  Instances are immutable."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.complex128)
        if m.shape != (4, 4):
            raise DomainError("TensorMatrix requires a 4x4 matrix")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls) -> "TensorMatrix":
        return cls(np.eye(4, dtype=np.complex128))

    def _legs(self) -> np.ndarray:
        return self.entries.reshape(2, 2, 2, 2)

    def partial_transpose(self, space: int) -> "TensorMatrix":
        if space == 1:
            axes = (2, 1, 0, 3)
        elif space == 2:
            axes = (0, 3, 2, 1)
        else:
            raise DomainError("space must be 1 or 2")
        return TensorMatrix(self._legs().transpose(axes).reshape(4, 4))

    def permute_spaces(self) -> "TensorMatrix":
        return TensorMatrix(self._legs().transpose(1, 0, 3, 2).reshape(4, 4))

    def invert(self, cfg: ToleranceConfig = DEFAULT_CONFIG) -> "TensorMatrix":
        cond = np.linalg.cond(self.entries)
        if not np.isfinite(cond) or cond > 1.0 / cfg.trunc_eps:
            raise ConditioningError(
                f"matrix condition number {cond:.3g} exceeds {1.0 / cfg.trunc_eps:.3g}"
            )
        return TensorMatrix(np.linalg.inv(self.entries))

    def sigma_conjugate(self, which: int, space: int) -> "TensorMatrix":
        if which not in SIGMA:
            raise DomainError("which must be 1, 2 or 3")
        if space == 1:
            dress = np.kron(SIGMA[which], _ID2)
        elif space == 2:
            dress = np.kron(_ID2, SIGMA[which])
        else:
            raise DomainError("space must be 1 or 2")
        return TensorMatrix(dress @ self.entries @ dress)

    def __matmul__(self, other: "TensorMatrix") -> "TensorMatrix":
        return TensorMatrix(self.entries @ other.entries)

    def __add__(self, other: "TensorMatrix") -> "TensorMatrix":
        return TensorMatrix(self.entries + other.entries)

    def __sub__(self, other: "TensorMatrix") -> "TensorMatrix":
        return TensorMatrix(self.entries - other.entries)

    def __mul__(self, scalar: complex) -> "TensorMatrix":
        return TensorMatrix(self.entries * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "TensorMatrix":
        return TensorMatrix(self.entries / complex(scalar))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def diff(self, other: "TensorMatrix") -> float:
        return float(np.max(np.abs(self.entries - other.entries)))


def partial_transpose(matrix: TensorMatrix, space: int) -> TensorMatrix:
    return matrix.partial_transpose(space)


def permute_spaces(matrix: TensorMatrix) -> TensorMatrix:
    return matrix.permute_spaces()


def invert(matrix: TensorMatrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> TensorMatrix:
    inv = matrix.invert(cfg)
    if (matrix @ inv).diff(TensorMatrix.identity()) > cfg.test_tol:
        raise ConditioningError("inverse failed its residual postcondition")
    return inv


def sigma_conjugate(matrix: TensorMatrix, which: int, space: int) -> TensorMatrix:
    return matrix.sigma_conjugate(which, space)


# ---------------------------------------------------------------------------
# Boltzmann weights and normalization
# ---------------------------------------------------------------------------


def baxter_entries(
    sp: SpectralPoint,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> tuple[complex, complex, complex, complex]:
    """Weights (a, b, c, d) of the eight-vertex matrix at a spectral point."""
    x = sp.x
    xl = params.x_lambda
    s_lam = snh_from_x(xl, params.p, cfg)
    if abs(s_lam) < math.sqrt(cfg.trunc_eps):
        raise SingularityError("crossing-parameter snh value vanishes")
    s_u = snh_from_x(x, params.p, cfg)
    s_lu = snh_from_x(xl / x, params.p, cfg)
    a = s_lu / s_lam
    b = s_u / s_lam
    c = 1.0 + 0.0j
    d = params.modulus * s_lu * s_u
    return a, b, c, d


def _bare_eight_vertex(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> TensorMatrix:
    """Unnormalized eight-vertex block pattern at multiplicative argument x."""
    a, b, c, d = baxter_entries(SpectralPoint.from_x(x, params), params, cfg)
    return TensorMatrix(
        np.array(
            [
                [a, 0.0, 0.0, d],
                [0.0, b, c, 0.0],
                [0.0, c, b, 0.0],
                [d, 0.0, 0.0, a],
            ],
            dtype=np.complex128,
        )
    )


@lru_cache(maxsize=256)
def _mu_constant(params: ModularParams, cfg: ToleranceConfig) -> complex:
    p, q = params.p, params.q
    p2 = p * p
    ratio = qpochhammer_multi(p2, [p2], cfg) / qpochhammer_multi(p, [p], cfg) ** 2
    return ratio * jacobi_theta(q * q, p2, cfg)


def normalization_mu(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Normalization factor that makes the R-matrix exactly unitary."""
    p, q = params.p, params.q
    xc = complex(x)
    if xc == 0:
        raise DomainError("argument must be nonzero")
    w = xc * xc
    q2 = q * q
    q4 = q2 * q2
    bases = [p, q4]
    inv_kappa = (
        qpochhammer_multi(q4 / w, bases, cfg)
        * qpochhammer_multi(q2 * w, bases, cfg)
        * qpochhammer_multi(p / w, bases, cfg)
        * qpochhammer_multi(p * q2 * w, bases, cfg)
    ) / (
        qpochhammer_multi(q4 * w, bases, cfg)
        * qpochhammer_multi(q2 / w, bases, cfg)
        * qpochhammer_multi(p * w, bases, cfg)
        * qpochhammer_multi(p * q2 / w, bases, cfg)
    )
    theta_num = jacobi_theta(p * w, p * p, cfg)
    theta_den = jacobi_theta(q2 * w, p * p, cfg)
    if abs(theta_den) < cfg.trunc_eps:
        raise SingularityError("normalization denominator theta vanishes")
    inv_mu = inv_kappa * _mu_constant(params, cfg) * theta_num / theta_den
    if inv_mu == 0:
        raise SingularityError("normalization factor diverges")
    return 1.0 / inv_mu


def _odd_q_lattice_distance(w: complex, q: complex) -> float:
    aq = abs(q)
    aw = abs(w)
    if aw == 0.0:
        return 0.0
    center = (math.log(aw) / math.log(aq) - 1.0) / 2.0
    best = math.inf
    for ell in range(math.floor(center) - 1, math.floor(center) + 3):
        sigma = q ** (2 * ell + 1)
        best = min(best, abs(w / sigma - 1.0))
    return best


def tau(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """Scalar prefactor turning the bare R-matrix into its modified form.

    Periodic under x -> x q^2; poles and zeros sit at x^2 on odd powers
    of q."""
    q = params.q
    xc = complex(x)
    if xc == 0:
        raise DomainError("argument must be nonzero")
    w = xc * xc
    if _odd_q_lattice_distance(w, q) < math.sqrt(cfg.trunc_eps):
        raise SingularityError("tau evaluated too close to a pole or zero")
    q3 = q * q * q
    q4 = q3 * q
    num = qpochhammer_multi(q * w, [q4], cfg) * qpochhammer_multi(q3 / w, [q4], cfg)
    den = qpochhammer_multi(q / w, [q4], cfg) * qpochhammer_multi(q3 * w, [q4], cfg)
    return num / (xc * den)


def tau_log_x_derivative(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> complex:
    """x d/dx log tau, summed termwise from the product representation."""
    q = params.q
    xc = complex(x)
    if xc == 0:
        raise DomainError("argument must be nonzero")
    w = xc * xc
    winv = 1.0 / w
    guard = math.sqrt(cfg.trunc_eps)
    q4 = q ** 4
    qa = q          # q^{4n+1}
    qb = q * q * q  # q^{4n+3}
    total = -1.0 + 0.0j
    bound = max(abs(w), abs(winv))
    for n in range(cfg.max_terms):
        pieces = (
            (-2.0, qa * w),
            (2.0, qb * winv),
            (-2.0, qa * winv),
            (2.0, qb * w),
        )
        worst = 0.0
        for sign, z in pieces:
            den = 1.0 - z
            if abs(den) < guard:
                raise SingularityError("tau log-derivative at a pole")
            total += sign * z / den
            worst = max(worst, abs(z))
        if worst < cfg.trunc_eps:
            return total
        qa *= q4
        qb *= q4
    raise SingularityError(
        f"tau log-derivative did not converge within {cfg.max_terms} groups "
        f"(|x^2| bound {bound:.3g})"
    )


# ---------------------------------------------------------------------------
# the R-matrices
# ---------------------------------------------------------------------------


def R(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> TensorMatrix:
    """Normalized eight-vertex R-matrix at multiplicative argument x."""
    mu = normalization_mu(x, params, cfg)
    return _bare_eight_vertex(x, params, cfg) / mu


def Rplus(
    x: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> TensorMatrix:
    """Modified R-matrix: tau(q^(1/2)/x) times the normalized matrix."""
    xc = complex(x)
    rq = principal_power(params.q, 0.5)
    return tau(rq / xc, params, cfg) * R(xc, params, cfg)


def Rplus_star(
    x: complex,
    c: float,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> TensorMatrix:
    """Modified R-matrix with the nome shifted to p q^(-2c).

    Rebuilds the full parameter bundle at the shifted nome rather than
    reusing cached values."""
    shift = principal_power(params.q, -2.0 * float(c))
    p_star = params.p * shift
    if not 0.0 < abs(p_star) < 1.0:
        raise DomainError(
            f"shifted nome must stay in the unit disc, got |p q^(-2c)| = {abs(p_star):.3g}"
        )
    star = make_params(p_star, params.q, cfg)
    return Rplus(x, star, cfg)


# ---------------------------------------------------------------------------
# pole-aware sampling
# ---------------------------------------------------------------------------


def _pole_safe(
    x: complex,
    params: ModularParams,
    margin: float = 1e-3,
    q_range: int = 8,
    p_range: int = 4,
) -> bool:
    """Reject x whose square is close to +-q^a p^b for small integers a, b.

    Conservative union of the singular sets of snh, tau and the
    normalization factor, including the shifted arguments used by checks."""
    w = x * x
    aw = abs(w)
    if aw == 0.0:
        return False
    for a in range(-q_range, q_range + 1):
        qa = params.q ** a
        for b in range(-p_range, p_range + 1):
            sigma = qa * params.p ** b
            if abs(sigma) == 0.0:
                continue
            ratio = w / sigma
            if abs(ratio - 1.0) < margin or abs(ratio + 1.0) < margin:
                return False
    return True


def sample_spectral_points(
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
    count: int = 25,
    seed: int = 0,
    radii: Sequence[float] = (1.05, 1.2),
    margin: float = 1e-3,
) -> list[complex]:
    """Deterministic pole-aware sample of spectral points on fixed circles."""
    rng = np.random.default_rng(seed)
    points: list[complex] = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 200 * count:
            raise DomainError("pole-aware sampling failed to find enough points")
        r = radii[len(points) % len(radii)]
        theta = rng.uniform(0.0, 2.0 * math.pi)
        x = r * cmath.exp(1j * theta)
        if _pole_safe(x, params, margin=margin):
            points.append(x)
    return points


# ---------------------------------------------------------------------------
# three-site embeddings (Yang-Baxter)
# ---------------------------------------------------------------------------


def _embed_12(m: TensorMatrix) -> np.ndarray:
    return np.kron(m.entries, _ID2)


def _embed_23(m: TensorMatrix) -> np.ndarray:
    return np.kron(_ID2, m.entries)


def _embed_13(m: TensorMatrix) -> np.ndarray:
    legs = m.entries.reshape(2, 2, 2, 2)  # (i1, i3, j1, j3)
    return np.einsum("acdf,be->abcdef", legs, _ID2).reshape(8, 8)


def yang_baxter_residual(
    x: complex,
    y: complex,
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> float:
    """Max-entry residual of the Yang-Baxter relation at arguments (x, y)."""
    r12 = _embed_12(R(x, params, cfg))
    r13 = _embed_13(R(x * y, params, cfg))
    r23 = _embed_23(R(y, params, cfg))
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    scale = max(1.0, float(np.max(np.abs(lhs))))
    return float(np.max(np.abs(lhs - rhs))) / scale


# ---------------------------------------------------------------------------
# the identity suite
# ---------------------------------------------------------------------------


def _rel(diff: float, scale: float) -> float:
    return diff / max(1.0, scale)


def unitarity_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    left = R(1.0 / x, params, cfg).permute_spaces() @ R(x, params, cfg)
    return _rel(left.diff(TensorMatrix.identity()), left.max_abs())


def crossing_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    lhs = R(1.0 / x, params, cfg).permute_spaces().partial_transpose(1)
    arg = -x / params.q
    rhs = R(arg, params, cfg).sigma_conjugate(1, 1)
    return _rel(lhs.diff(rhs), max(lhs.max_abs(), rhs.max_abs()))


def antisymmetry_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    lhs = R(-x, params, cfg)
    rhs = -1.0 * R(x, params, cfg).sigma_conjugate(3, 1)
    return _rel(lhs.diff(rhs), max(lhs.max_abs(), rhs.max_abs()))


def quasi_periodicity_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    root_p = principal_power(params.p, 0.5)
    lhs = Rplus(-root_p * x, params, cfg)
    rhs = invert(Rplus(1.0 / x, params, cfg).permute_spaces(), cfg).sigma_conjugate(1, 1)
    return _rel(lhs.diff(rhs), max(lhs.max_abs(), rhs.max_abs()))


def transpose_inverse_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    q2 = params.q * params.q
    lhs = invert(Rplus(x, params, cfg).partial_transpose(2), cfg)
    rhs = invert(Rplus(q2 * x, params, cfg), cfg).partial_transpose(2)
    return _rel(lhs.diff(rhs), max(lhs.max_abs(), rhs.max_abs()))


def tau_periodicity_residual(x, params, cfg=DEFAULT_CONFIG) -> float:
    q2 = params.q * params.q
    t0 = tau(x, params, cfg)
    t1 = tau(x * q2, params, cfg)
    return abs(t0 - t1) / max(1.0, abs(t0))


def _params_echo(params: ModularParams, cfg: ToleranceConfig) -> dict:
    return {
        "p": params.p,
        "q": params.q,
        "modulus": params.modulus,
        "bigK": params.bigK,
        "bigKprime": params.bigKprime,
        "lambda": params.lam,
        "trunc_eps": cfg.trunc_eps,
        "test_tol": cfg.test_tol,
        "diff_step": cfg.diff_step,
        "max_terms": cfg.max_terms,
        "contour_points": cfg.contour_points,
    }


def verify_rmatrix_properties(
    params: ModularParams,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
    samples: int = 25,
    seed: int = 0,
) -> CheckReport:
    """Certify unitarity, crossing, antisymmetry, quasi-periodicity, the
    transpose-inverse exchange, tau periodicity and the Yang-Baxter relation
    on a deterministic pole-aware sample."""
    points = sample_spectral_points(params, cfg, samples, seed)
    partners = sample_spectral_points(params, cfg, samples, seed + 1)
    report = CheckReport(
        suite="rmatrix",
        params_echo=_params_echo(params, cfg),
        seed=seed,
    )

    single_point_checks = [
        ("unitarity", unitarity_residual, cfg.test_tol),
        ("crossing", crossing_residual, cfg.test_tol),
        ("antisymmetry", antisymmetry_residual, cfg.test_tol),
        ("quasi_periodicity", quasi_periodicity_residual, cfg.test_tol),
        ("transpose_inverse", transpose_inverse_residual, cfg.test_tol),
        ("tau_periodicity", tau_periodicity_residual, min(cfg.test_tol, 1e-10)),
    ]
    for name, fn, tol in single_point_checks:
        residuals: list[float] = []
        error = None
        for x in points:
            try:
                residuals.append(fn(x, params, cfg))
            except ToolkitError as exc:
                error = f"{type(exc).__name__}: {exc}"
                break
        report.checks.append(make_check(name, residuals, tol, error))

    residuals = []
    error = None
    for x, y in zip(points, partners):
        if not _pole_safe(x * y, params):
            continue
        try:
            residuals.append(yang_baxter_residual(x, y, params, cfg))
        except ToolkitError as exc:
            error = f"{type(exc).__name__}: {exc}"
            break
    report.checks.append(make_check("yang_baxter", residuals, cfg.test_tol, error))
    return report
