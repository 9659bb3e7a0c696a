"""Command-line front end: verification suites, single-object evaluation,
coefficient tables, and mode brackets, all emitting machine-readable JSON.

Exit codes: 0 all checks passed, 1 a check failed or an evaluation error was
recorded, 2 usage error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

from . import mode_algebra, poisson_center, rmatrix
from .errors import DomainError, ToolkitError
from .mode_algebra import BracketFamily, F_coefficient, ModePolynomial, poisson_bracket
from .report import CheckReport, encode_value, make_check
from .rmatrix import ModularParams, make_params
from .special_functions import DEFAULT_CONFIG, ToleranceConfig, elliptic_K, jacobi_theta

USAGE_ERROR = 2
CHECK_FAILURE = 1


@dataclass
class RunConfig:
    """Parameters and policy for one CLI run."""

    p: Optional[complex] = None
    q: Optional[complex] = None
    modulus: Optional[float] = None
    lam: Optional[float] = None
    trunc_eps: float = 1e-14
    test_tol: float = 1e-9
    diff_step: float = 1e-4
    max_terms: int = 400
    contour_points: int = 256
    samples: int = 25
    seed: int = 7
    k_max: int = 2
    s_cutoff: int = 8
    s_max: int = 5
    window: int = 32
    mode_q: float = 0.5
    contour_radius: Optional[float] = None
    output: Optional[str] = None

    def tolerance_config(self) -> ToleranceConfig:
        return ToleranceConfig(
            trunc_eps=self.trunc_eps,
            test_tol=self.test_tol,
            diff_step=self.diff_step,
            max_terms=self.max_terms,
            contour_points=self.contour_points,
        )

    def params(self) -> ModularParams:
        cfg = self.tolerance_config()
        if self.p is not None and self.q is not None:
            return make_params(self.p, self.q, cfg)
        if self.modulus is not None and self.lam is not None:
            k = float(self.modulus)
            big_k = elliptic_K(k)
            big_kp = elliptic_K(math.sqrt((1.0 - k) * (1.0 + k)))
            p = math.exp(-math.pi * big_kp / big_k)
            q = -math.exp(-math.pi * self.lam / (2.0 * big_k))
            return make_params(p, q, cfg)
        raise DomainError("provide either (p, q) or (modulus, lam)")


_DEFAULTS = RunConfig(p=0.3, q=-0.5)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def build_config(args: argparse.Namespace) -> RunConfig:
    config = replace(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as handle:
            loaded = json.load(handle)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        for key, value in loaded.items():
            if key in ("p", "q") and isinstance(value, list):
                value = complex(value[0], value[1])
            setattr(config, key, value)
    for field_def in fields(RunConfig):
        value = getattr(args, field_def.name, None)
        if value is not None:
            setattr(config, field_def.name, value)
    # choosing a modulus/lam pair on the command line overrides config (p, q)
    if getattr(args, "modulus", None) is not None and getattr(args, "lam", None) is not None:
        config.p = None
        config.q = None
    return config


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _center_suite(
    params: ModularParams,
    cfg: ToleranceConfig,
    samples: int,
    seed: int,
) -> CheckReport:
    report = CheckReport(
        suite="center",
        params_echo=rmatrix._params_echo(params, cfg),
        seed=seed,
    )
    ident = rmatrix.TensorMatrix.identity()
    points = rmatrix.sample_spectral_points(
        params, cfg, min(samples, 20), seed, margin=5e-3
    )

    def run(name, tol, fn):
        residuals, error = [], None
        try:
            for x in points:
                residuals.append(fn(x))
        except ToolkitError as exc:
            error = f"{type(exc).__name__}: {exc}"
        report.checks.append(make_check(name, residuals, tol, error))

    run("collapse_Y", cfg.test_tol,
        lambda x: poisson_center.Y_matrix(x, -2.0, params, cfg).diff(ident))
    run("collapse_T", cfg.test_tol,
        lambda x: abs(poisson_center.T_prefactor(x, -2.0, params, cfg) - 1.0))
    run("collapse_Rcal", cfg.test_tol,
        lambda x: poisson_center.Rcal_matrix(x, -2.0, params, cfg).diff(ident))
    run("dRcal_dc", 1e-7,
        lambda x: poisson_center.dRcal_dc_at_critical(x, params, cfg).max_abs())

    def entry_derivative_residual(x):
        ders = poisson_center.m_entry_derivatives(x, params, cfg)
        closed = poisson_center.m_diagonal_derivative_closed(x, params, cfg)
        return max(
            abs(ders["m21"]),
            abs(ders["m22"]),
            abs(ders["m11"] - ders["m12"]),
            abs(ders["m11"] - closed),
        )

    run("m_entry_derivatives", 1e-7, entry_derivative_residual)

    def threeway_residual(x):
        ev = poisson_center.evaluate_structure_function(x, params, cfg)
        return max(ev.residuals().values())

    run("structure_threeway", 1e-6, threeway_residual)

    def factorization_residual(x):
        worst = 0.0
        for c in (-2.001, -1.999):
            lhs = poisson_center.T_prefactor(x, c, params, cfg) * \
                poisson_center.Rcal_matrix(x, c, params, cfg)
            rhs = poisson_center.Y_matrix(x, c, params, cfg)
            worst = max(worst, lhs.diff(rhs) / max(1.0, rhs.max_abs()))
        return worst

    run("factorization_T_Rcal", 1e-6, factorization_residual)

    rng = np.random.default_rng(seed + 17)
    lam = params.lam
    snh_res, mu_res, error = [], [], None
    try:
        made = 0
        while made < 50:
            coeffs = rng.uniform(0.08, 0.45, size=3)
            jitter = rng.uniform(-0.05, 0.05, size=3)
            u, v, a = (complex(cr, ji) * lam for cr, ji in zip(coeffs, jitter))
            a = a + 0.6 * lam  # keep the sum arguments away from zeros
            try:
                res = poisson_center.snh_identity_residuals(u, v, a, params, cfg)
            except ToolkitError:
                continue
            snh_res.append(max(res.values()))
            mu_res.append(max(
                poisson_center.mu_identity_residuals(u, params, cfg).values()
            ))
            made += 1
    except ToolkitError as exc:
        error = f"{type(exc).__name__}: {exc}"
    report.checks.append(make_check("snh_identities", snh_res, cfg.test_tol, error))
    report.checks.append(make_check("mu_identities", mu_res, cfg.test_tol, error))
    return report


def _modes_suite(
    params: ModularParams,
    cfg: ToleranceConfig,
    config: RunConfig,
) -> CheckReport:
    seed = config.seed
    report = CheckReport(
        suite="modes",
        params_echo={
            "elliptic_q": params.q,
            "mode_q": config.mode_q,
            "k_max": config.k_max,
            "s_cutoff": config.s_cutoff,
            "window": config.window,
        },
        seed=seed,
    )
    rng = np.random.default_rng(seed)

    # telescoping over the sector ladder at the mode-layer base
    residuals = []
    fam_top = BracketFamily(k=max(config.k_max, 4), q=config.mode_q, s_cutoff=8)
    for s in range(-8, 9):
        rep = mode_algebra.check_telescoping(fam_top, s)
        residuals.extend(c.max_residual for c in rep.checks)
    report.checks.append(make_check("telescoping", residuals, 1e-12))

    def random_poly(max_degree=2, n_terms=3):
        terms = {}
        for _ in range(n_terms):
            degree = int(rng.integers(1, max_degree + 1))
            mono = tuple(int(2 * rng.integers(-5, 6)) for _ in range(degree))
            # powers of two keep every regrouping of coefficient products exact
            coeff = float(2.0 ** rng.integers(-3, 4)) * float(rng.choice([-1, 1]))
            terms[mono] = terms.get(mono, 0.0) + coeff
        return ModePolynomial(terms)

    anti, leib_exact, leib_random, parity_ok = [], [], [], True
    monomial_cases = [((2, 0), 4), ((2, 2), 0), ((4, -2), 2), ((0, 0), 6)]
    for k in range(0, config.k_max + 1):
        fam = BracketFamily(k=k, q=config.mode_q, s_cutoff=config.s_cutoff)
        gen = ModePolynomial.generator
        for (pa, pb), rc in monomial_cases:
            lhs = poisson_bracket(gen(pa) * gen(pb), gen(rc), fam)
            rhs = gen(pa) * poisson_bracket(gen(pb), gen(rc), fam) + \
                gen(pb) * poisson_bracket(gen(pa), gen(rc), fam)
            leib_exact.append(lhs.max_abs_diff(rhs))
        for _ in range(5):
            P, Q, Rp = random_poly(), random_poly(), random_poly()
            anti.append((poisson_bracket(P, Q, fam) + poisson_bracket(Q, P, fam)).max_abs_coeff())
            lhs = poisson_bracket(P * Q, Rp, fam)
            rhs = P * poisson_bracket(Q, Rp, fam) + Q * poisson_bracket(P, Rp, fam)
            scale = max(1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff())
            leib_random.append(lhs.max_abs_diff(rhs) / scale)
            parity_ok = parity_ok and all(
                all(idx % 2 == 0 for idx in mono) for mono in lhs.terms
            )
    # antisymmetry and monomial-case Leibniz cancel exactly at coefficient
    # level; the random multi-term Leibniz residual is bounded only by
    # regrouping of correctly rounded sums, hence the relative tolerance
    report.checks.append(make_check("antisymmetry", anti, 1e-300))
    report.checks.append(make_check("leibniz_monomial", leib_exact, 1e-300))
    report.checks.append(make_check("leibniz_random", leib_random, 1e-12))
    report.checks.append(make_check("parity", [0.0 if parity_ok else 1.0], 1e-300))

    # functional Jacobi for the closed-form kernel and the truncated families
    jac = []
    kernels = [lambda x: poisson_center.structure_function_closed(x, params, cfg)]
    kernels += [
        mode_algebra.truncated_kernel(BracketFamily(k=k, q=params.q, s_cutoff=5))
        for k in range(0, min(config.k_max, 2) + 1)
    ]
    for _ in range(50):
        z = 1.1 * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        w = 1.3 * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        v = 0.9 * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        for kernel in kernels:
            rep = mode_algebra.check_jacobi_functional(z, w, v, kernel)
            jac.extend(c.max_residual for c in rep.checks)
    report.checks.append(make_check("jacobi_functional", jac, 1e-9))

    # symmetrized contours against the structure constants, per sector
    contour, error = [], None
    aq = abs(params.q)
    try:
        for k in range(0, min(config.k_max, 2) + 1):
            fam = BracketFamily(k=k, q=params.q, s_cutoff=config.s_cutoff)
            radius = (
                config.contour_radius
                if config.contour_radius is not None
                else aq ** (-k - 0.5)
            )
            for s in range(-config.s_max, config.s_max + 1):
                rep = mode_algebra.check_contour_match(fam, s, radius, params, cfg)
                contour.extend(c.max_residual for c in rep.checks)
    except ToolkitError as exc:
        error = f"{type(exc).__name__}: {exc}"
    report.checks.append(make_check("contour_match", contour, 1e-8, error))
    return report


def run_suite(config: RunConfig, suite: str) -> CheckReport:
    cfg = config.tolerance_config()
    params = config.params()
    if suite == "rmatrix":
        return rmatrix.verify_rmatrix_properties(params, cfg, config.samples, config.seed)
    if suite == "center":
        return _center_suite(params, cfg, config.samples, config.seed)
    if suite == "modes":
        return _modes_suite(params, cfg, config)
    if suite == "all":
        merged = CheckReport(
            suite="all",
            params_echo=rmatrix._params_echo(params, cfg),
            seed=config.seed,
        )
        for name in ("rmatrix", "center", "modes"):
            sub = run_suite(config, name)
            for check in sub.checks:
                merged.checks.append(replace(check, name=f"{name}.{check.name}"))
        return merged
    raise DomainError(f"unknown suite {suite!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _emit(text: str, config: RunConfig) -> None:
    if config.output:
        with open(config.output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def cmd_verify(config: RunConfig, suite: str) -> int:
    report = run_suite(config, suite)
    _emit(report.to_json(), config)
    return 0 if report.all_passed else CHECK_FAILURE


def _format_scalar(value: complex) -> str:
    return f"{value.real!r} {value.imag!r}"


def _format_matrix(matrix) -> str:
    rows = []
    for row in matrix.entries:
        rows.append("  ".join(_format_scalar(complex(v)) for v in row))
    return "\n".join(rows)


def cmd_eval(config: RunConfig, target: str, args: argparse.Namespace) -> int:
    cfg = config.tolerance_config()
    x = args.x if args.x is not None else complex(1.2)
    c = args.c if args.c is not None else -2.0
    if target == "theta":
        p2 = args.p2 if args.p2 is not None else complex(0.09)
        value = jacobi_theta(x, p2, cfg)
        print(_format_scalar(value))
        return 0
    params = config.params()
    if target == "R":
        print(_format_matrix(rmatrix.R(x, params, cfg)))
    elif target == "Rplus":
        print(_format_matrix(rmatrix.Rplus(x, params, cfg)))
    elif target == "Y":
        print(_format_matrix(poisson_center.Y_matrix(x, c, params, cfg)))
    elif target == "T":
        print(_format_scalar(poisson_center.T_prefactor(x, c, params, cfg)))
    elif target == "tau":
        print(_format_scalar(rmatrix.tau(x, params, cfg)))
    elif target == "f_closed":
        print(_format_scalar(poisson_center.structure_function_closed(x, params, cfg)))
    elif target == "f_series":
        print(_format_scalar(poisson_center.structure_function_series(x, params, cfg)))
    else:
        raise DomainError(f"unknown eval target {target!r}")
    return 0


def cmd_table(config: RunConfig, obj: str, args: argparse.Namespace) -> int:
    cfg = config.tolerance_config()
    k = args.k if args.k is not None else 0
    s_max = args.smax if args.smax is not None else config.s_max
    if s_max > config.s_cutoff:
        raise DomainError("smax must not exceed s_cutoff")
    rows = []
    failed = False
    if obj == "Fk":
        base = args.table_q if args.table_q is not None else config.mode_q
        fam = BracketFamily(k=k, q=base, s_cutoff=config.s_cutoff)
        print(f"# F_k(s) for k={k}, q={base}")
        print(f"{'s':>4s}  {'re':>24s}  {'im':>24s}")
        for s in range(-s_max, s_max + 1):
            value = F_coefficient(fam, s)
            rows.append({"s": s, "F": value})
            print(f"{s:>4d}  {value.real!r:>24s}  {value.imag!r:>24s}")
    elif obj == "contour":
        params = config.params()
        fam = BracketFamily(k=k, q=params.q, s_cutoff=config.s_cutoff)
        aq = abs(params.q)
        radius = (
            config.contour_radius
            if config.contour_radius is not None
            else aq ** (-k - 0.5)
        )
        print(f"# symmetrized contour coefficients vs F_k(s), k={k}, radius={radius}")
        print(f"{'s':>4s}  {'re(F)':>24s}  {'im(F)':>24s}  {'residual':>12s}")
        for s in range(-s_max, s_max + 1):
            rep = mode_algebra.check_contour_match(fam, s, radius, params, cfg)
            value = F_coefficient(fam, s)
            residual = rep.checks[0].max_residual
            failed = failed or not rep.checks[0].passed
            rows.append({"s": s, "F": value, "residual": residual})
            print(f"{s:>4d}  {value.real!r:>24s}  {value.imag!r:>24s}  {residual:12.3e}")
    else:
        raise DomainError(f"unknown table object {obj!r}")
    payload = json.dumps(encode_value({"object": obj, "k": k, "rows": rows}), sort_keys=True)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
    else:
        print(payload)
    return CHECK_FAILURE if failed else 0


def cmd_bracket(config: RunConfig, args: argparse.Namespace) -> int:
    n, m = args.n, args.m
    k = args.k if args.k is not None else 0
    if n % 2 != 0 or m % 2 != 0:
        raise DomainError("mode indices must be even")
    if max(abs(n), abs(m)) > config.window:
        raise DomainError("mode indices must lie within the window")
    fam = BracketFamily(k=k, q=config.mode_q, s_cutoff=config.s_cutoff)
    window = config.window + 2 * config.s_cutoff
    bracket = poisson_bracket(
        ModePolynomial.generator(n), ModePolynomial.generator(m), fam, window=window
    )
    triples = []
    for mono, coeff in sorted(bracket.terms.items()):
        a, b = mono
        triples.append({"a": a, "b": b, "coefficient": coeff})
        print(f"t_{a} t_{b}  {coeff.real!r} {coeff.imag!r}")
    if not triples:
        print("0")
    payload = json.dumps(
        encode_value({"n": n, "m": m, "k": k, "terms": triples}), sort_keys=True
    )
    if config.output:
        with open(config.output, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with RunConfig fields")
    parser.add_argument("--p", type=_parse_complex, help="elliptic nome")
    parser.add_argument("--q", type=_parse_complex, help="deformation parameter")
    parser.add_argument("--modulus", type=float, help="elliptic modulus (with --lam)")
    parser.add_argument("--lam", type=float, help="crossing parameter (with --modulus)")
    parser.add_argument("--trunc-eps", dest="trunc_eps", type=float)
    parser.add_argument("--test-tol", dest="test_tol", type=float)
    parser.add_argument("--diff-step", dest="diff_step", type=float)
    parser.add_argument("--max-terms", dest="max_terms", type=int)
    parser.add_argument("--contour-points", dest="contour_points", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--k-max", dest="k_max", type=int)
    parser.add_argument("--s-cutoff", dest="s_cutoff", type=int)
    parser.add_argument("--window", type=int)
    parser.add_argument("--mode-q", dest="mode_q", type=float)
    parser.add_argument("--contour-radius", dest="contour_radius", type=float)
    parser.add_argument("--output", help="write the JSON document to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eightvertex",
        description="Verification and computation toolkit for the elliptic "
        "eight-vertex R-matrix and its critical-level Poisson structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", choices=("rmatrix", "center", "modes", "all"),
                          default="all")
    _add_common(p_verify)

    p_eval = sub.add_parser("eval", help="evaluate one object at a point")
    p_eval.add_argument("target",
                        choices=("R", "Rplus", "Y", "T", "f_closed", "f_series",
                                 "tau", "theta"))
    p_eval.add_argument("--x", type=_parse_complex)
    p_eval.add_argument("--c", type=float)
    p_eval.add_argument("--p2", type=_parse_complex)
    _add_common(p_eval)

    p_table = sub.add_parser("table", help="emit coefficient tables")
    p_table.add_argument("object", choices=("Fk", "contour"))
    p_table.add_argument("--k", type=int)
    p_table.add_argument("--smax", type=int)
    p_table.add_argument("--table-q", dest="table_q", type=float,
                         help="base for the Fk table (defaults to mode_q)")
    _add_common(p_table)

    p_bracket = sub.add_parser("bracket", help="print a generator bracket")
    p_bracket.add_argument("--n", type=int, required=True)
    p_bracket.add_argument("--m", type=int, required=True)
    p_bracket.add_argument("--k", type=int)
    _add_common(p_bracket)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        if args.command == "verify":
            return cmd_verify(config, args.suite)
        if args.command == "eval":
            return cmd_eval(config, args.target, args)
        if args.command == "table":
            return cmd_table(config, args.object, args)
        if args.command == "bracket":
            return cmd_bracket(config, args)
        parser.error(f"unknown command {args.command!r}")
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return CHECK_FAILURE
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
