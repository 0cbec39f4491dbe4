"""Exact chi-square trajectories for renormalized sums in the Hermite domain.

The package tracks the density of the renormalized sum of independent
innovations as a finite Hermite coefficient vector, propagates it with
the exact banded convolution operator, and certifies every claimed
decay rate against operator bounds, quadrature oracles, and Monte Carlo
sampling.

Command-line entry points (installed as ``hermclt``):

- ``hermclt check``  admissibility report per density
- ``hermclt run``    trajectory, envelope, rate fit, margins, figures
- ``hermclt verify`` operator-bound verification over an a-grid
- ``hermclt oracle`` quadrature and Monte Carlo cross-checks
"""

from .bounds import (
    BoundCheck,
    alternative_bound,
    calibrate_cr,
    derivative_norm,
    er_inequality,
    gershgorin_chain,
    gershgorin_row_sum,
    improved_poincare,
    poincare_like_bound,
    primitive_norm,
    row_sum_sup,
    row_sum_sup_bound,
)
from .clt import (
    ChainTrajectory,
    DiagnosticsReport,
    InnovationSchedule,
    RateFit,
    default_window,
    er_margins,
    fit_rate,
    mass_and_moment_diagnostics,
    n_zero,
    run_chain,
    scaled_chi2,
    theorem1_envelope,
)
from .density import (
    PolynomialDensity,
    build_cdf_table,
    build_density,
    load_density,
    moments,
    relative_entropy,
    sample,
    tv_distance,
)
from .hermite import (
    QuadratureRule,
    chi_square,
    eval_hermite,
    eval_series,
    from_monomial,
    gauss_hermite,
    hermite_table,
    to_monomial,
)
from .hypothesis import (
    CheckResult,
    HypothesisReport,
    a_phi,
    d_phi,
    d_phi_limit,
    double_prod_check,
    h_function,
    hypothesis_report,
    lemma_polynom_predicate,
)
from .operators import (
    BandedOperator,
    HSSum,
    adjoint_convolve,
    apply_adjoint,
    build_m_matrix,
    build_ou_matrix,
    build_q_matrix,
    build_qstar_matrix,
    hilbert_schmidt_sum,
    operator_norm_on_vk,
)
from .oracle import (
    McEstimates,
    OracleComparison,
    compare_mc,
    mc_coefficients,
    q_matrix_comparisons,
    qstar_suite,
    quadrature_q,
    quadrature_qstar,
)

__version__ = "0.1.0"

__all__ = [
    "BandedOperator",
    "BoundCheck",
    "ChainTrajectory",
    "CheckResult",
    "DiagnosticsReport",
    "HSSum",
    "HypothesisReport",
    "InnovationSchedule",
    "McEstimates",
    "OracleComparison",
    "PolynomialDensity",
    "QuadratureRule",
    "RateFit",
    "a_phi",
    "adjoint_convolve",
    "alternative_bound",
    "apply_adjoint",
    "build_cdf_table",
    "build_density",
    "build_m_matrix",
    "build_ou_matrix",
    "build_q_matrix",
    "build_qstar_matrix",
    "calibrate_cr",
    "chi_square",
    "compare_mc",
    "d_phi",
    "d_phi_limit",
    "default_window",
    "derivative_norm",
    "double_prod_check",
    "er_inequality",
    "er_margins",
    "eval_hermite",
    "eval_series",
    "fit_rate",
    "from_monomial",
    "gauss_hermite",
    "gershgorin_chain",
    "gershgorin_row_sum",
    "h_function",
    "hermite_table",
    "hilbert_schmidt_sum",
    "hypothesis_report",
    "improved_poincare",
    "lemma_polynom_predicate",
    "load_density",
    "mass_and_moment_diagnostics",
    "mc_coefficients",
    "moments",
    "n_zero",
    "operator_norm_on_vk",
    "poincare_like_bound",
    "primitive_norm",
    "q_matrix_comparisons",
    "qstar_suite",
    "quadrature_q",
    "quadrature_qstar",
    "relative_entropy",
    "row_sum_sup",
    "row_sum_sup_bound",
    "run_chain",
    "sample",
    "scaled_chi2",
    "theorem1_envelope",
    "to_monomial",
    "tv_distance",
]
