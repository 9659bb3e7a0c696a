"""Verification and computation toolkit for the elliptic eight-vertex
R-matrix, the Poisson structure it induces on the critical-level center, and
the sector-indexed family of quadratic Poisson brackets on even modes."""

from .errors import (
    ConditioningError,
    ContourError,
    ConvergenceError,
    DomainError,
    ModeWindowError,
    SingularityError,
    ToolkitError,
)
from .mode_algebra import (
    BracketFamily,
    F_coefficient,
    ModePolynomial,
    check_contour_match,
    check_jacobi_functional,
    check_telescoping,
    delta_step_contribution,
    poisson_bracket,
    truncated_kernel,
)
from .poisson_center import (
    CriticalProbe,
    M_matrix,
    Rcal_matrix,
    StructureFunctionEval,
    T_prefactor,
    Y_matrix,
    check_mu_identities,
    check_snh_identities,
    critical_probe,
    dRcal_dc_at_critical,
    dY_dc_at_critical,
    evaluate_structure_function,
    m_diagonal_derivative_closed,
    m_entry_derivatives,
    mu_identity_residuals,
    snh_identity_residuals,
    structure_function_closed,
    structure_function_series,
)
from .report import CheckReport, CheckResult, make_check
from .rmatrix import (
    ModularParams,
    R,
    Rplus,
    Rplus_star,
    SpectralPoint,
    TensorMatrix,
    baxter_entries,
    invert,
    make_params,
    normalization_mu,
    partial_transpose,
    permute_spaces,
    sample_spectral_points,
    sigma_conjugate,
    tau,
    tau_log_x_derivative,
    verify_rmatrix_properties,
    yang_baxter_residual,
)
from .special_functions import (
    DEFAULT_CONFIG,
    ToleranceConfig,
    contour_coefficient,
    elliptic_K,
    jacobi_theta,
    modulus_from_nome,
    numeric_log_derivative,
    qpochhammer_multi,
    snh,
    snh_from_x,
    snh_log_x_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BracketFamily",
    "CheckReport",
    "CheckResult",
    "ConditioningError",
    "ContourError",
    "ConvergenceError",
    "CriticalProbe",
    "DEFAULT_CONFIG",
    "DomainError",
    "F_coefficient",
    "M_matrix",
    "ModePolynomial",
    "ModeWindowError",
    "ModularParams",
    "R",
    "Rcal_matrix",
    "Rplus",
    "Rplus_star",
    "SingularityError",
    "SpectralPoint",
    "StructureFunctionEval",
    "T_prefactor",
    "TensorMatrix",
    "ToleranceConfig",
    "ToolkitError",
    "Y_matrix",
    "baxter_entries",
    "check_contour_match",
    "check_jacobi_functional",
    "check_mu_identities",
    "check_snh_identities",
    "check_telescoping",
    "contour_coefficient",
    "critical_probe",
    "dRcal_dc_at_critical",
    "dY_dc_at_critical",
    "delta_step_contribution",
    "elliptic_K",
    "evaluate_structure_function",
    "invert",
    "jacobi_theta",
    "m_diagonal_derivative_closed",
    "m_entry_derivatives",
    "make_check",
    "make_params",
    "modulus_from_nome",
    "mu_identity_residuals",
    "normalization_mu",
    "numeric_log_derivative",
    "partial_transpose",
    "permute_spaces",
    "poisson_bracket",
    "qpochhammer_multi",
    "sample_spectral_points",
    "sigma_conjugate",
    "snh",
    "snh_from_x",
    "snh_identity_residuals",
    "snh_log_x_derivative",
    "structure_function_closed",
    "structure_function_series",
    "tau",
    "tau_log_x_derivative",
    "truncated_kernel",
    "verify_rmatrix_properties",
    "yang_baxter_residual",
]
