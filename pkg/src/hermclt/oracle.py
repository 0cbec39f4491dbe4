"""Independent verification paths for the coefficient-domain computations.

Two oracles: Gauss-Hermite quadrature of the explicit integral kernels

    Q[f](x)  = int f(a x + s y) phi(y) dmu(y),          s = sqrt(1 - a^2),
    Q*[f](x) = int f(a x - s y) phi(s x + a y) dmu(y),

exact for polynomial integrands at sufficient order, and Monte Carlo
estimation of Hermite coefficients through f_{n,k} = E[Hb_k(Y_n)]. Both
never touch the coefficient recursion they are checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clt import InnovationSchedule
from .density import CdfTable, PolynomialDensity, build_cdf_table
from .errors import OrderTooSmall
from .hermite import eval_series, gauss_hermite, hermite_table, trim_coeffs
from .operators import adjoint_convolve, build_q_matrix

__all__ = [
    "McEstimates",
    "OracleComparison",
    "compare_mc",
    "mc_coefficients",
    "q_matrix_comparisons",
    "qstar_suite",
    "quadrature_q",
    "quadrature_q_matrix",
    "quadrature_qstar",
]


@dataclass(frozen=True)
class OracleComparison:
    """One spectral-vs-oracle value pair with its acceptance tolerance."""

    quantity: str
    spectral: float
    oracle: float
    abs_diff: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance


def _comparison(quantity: str, spectral: float, oracle: float, tolerance: float) -> OracleComparison:
    return OracleComparison(
        quantity=quantity,
        spectral=float(spectral),
        oracle=float(oracle),
        abs_diff=abs(float(spectral) - float(oracle)),
        tolerance=float(tolerance),
    )


def _min_order(degree: int, n_top: int) -> int:
    return math.ceil((degree + n_top) / 2.0 + 1.0)


def quadrature_qstar(f, phi: PolynomialDensity, a: float, x: float, order: int) -> float:
    """Pointwise adjoint kernel value by quadrature, exact for polynomials.

    order must be at least (degree(f) + N)/2 + 1 so the degree
    degree(f) + N integrand in y is within quadrature exactness.
    """
    coeffs = trim_coeffs(np.asarray(f, dtype=float))
    needed = _min_order(coeffs.size - 1, phi.N)
    if order < needed:
        raise OrderTooSmall(f"order {order} below required {needed}")
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    rule = gauss_hermite(order)
    s = math.sqrt(max(0.0, 1.0 - a * a))
    vals = eval_series(coeffs, a * x - s * rule.nodes)
    vals = vals * eval_series(phi.coeffs, s * x + a * rule.nodes)
    return float(np.sum(rule.weights * vals))


def quadrature_q(f, phi: PolynomialDensity, a: float, x: float, order: int) -> float:
    """Pointwise forward kernel value by quadrature, exact for polynomials."""
    coeffs = trim_coeffs(np.asarray(f, dtype=float))
    needed = _min_order(coeffs.size - 1, phi.N)
    if order < needed:
        raise OrderTooSmall(f"order {order} below required {needed}")
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    rule = gauss_hermite(order)
    s = math.sqrt(max(0.0, 1.0 - a * a))
    vals = eval_series(coeffs, a * x + s * rule.nodes) * eval_series(phi.coeffs, rule.nodes)
    return float(np.sum(rule.weights * vals))


def qstar_suite(f, phi: PolynomialDensity, a: float, xs=None, order: int | None = None,
                tolerance: float = 1e-9) -> list[OracleComparison]:
    """Adjoint convolution evaluated spectrally vs by quadrature at many points."""
    coeffs = trim_coeffs(np.asarray(f, dtype=float))
    if xs is None:
        xs = np.linspace(-4.0, 4.0, 21)
    if order is None:
        order = _min_order(coeffs.size - 1, phi.N) + 4
    conv = adjoint_convolve(coeffs, phi.coeffs, a)
    out = []
    for x in np.asarray(xs, dtype=float):
        spectral = float(eval_series(conv, x))
        oracle = quadrature_qstar(coeffs, phi, a, float(x), order)
        out.append(_comparison(f"qstar(a={a:g}, x={x:g})", spectral, oracle, tolerance))
    return out


def quadrature_q_matrix(phi: PolynomialDensity, a: float, size: int, order: int | None = None) -> np.ndarray:
    """(size+1) x (size+1) forward-operator matrix by double quadrature.

    Entry (m, n) = int Hb_m(x) [int Hb_n(a x + s y) phi(y) dmu(y)] dmu(x);
    the outer integrand has degree up to 2*size, so order must be at
    least size + 1 as well as the kernel requirement.
    """
    needed = max(_min_order(size, phi.N), size + 1)
    if order is None:
        order = needed
    if order < needed:
        raise OrderTooSmall(f"order {order} below required {needed}")
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    rule = gauss_hermite(order)
    s = math.sqrt(max(0.0, 1.0 - a * a))
    grid = a * rule.nodes[:, None] + s * rule.nodes[None, :]
    table_inner = hermite_table(size, grid.ravel()).reshape(size + 1, order, order)
    phi_weights = rule.weights * eval_series(phi.coeffs, rule.nodes)
    inner = table_inner @ phi_weights
    table_outer = hermite_table(size, rule.nodes)
    return np.einsum("mx,nx,x->mn", table_outer, inner, rule.weights)


def q_matrix_comparisons(phi: PolynomialDensity, a: float, size: int,
                         tolerance: float = 1e-8) -> list[OracleComparison]:
    """Entrywise closed-form vs quadrature comparison of the forward matrix."""
    spectral = build_q_matrix(phi, a, size + 1).matrix
    oracle = quadrature_q_matrix(phi, a, size)
    out = []
    for m in range(size + 1):
        for n in range(size + 1):
            out.append(
                _comparison(
                    f"Q(m={m}, n={n}, a={a:g})",
                    float(spectral[m, n]),
                    float(oracle[m, n]),
                    tolerance,
                )
            )
    return out


@dataclass(frozen=True)
class McEstimates:
    """Monte Carlo Hermite-coefficient estimates with standard errors."""

    ks: np.ndarray
    means: np.ndarray
    ses: np.ndarray
    reps: int
    seed: int


def mc_coefficients(schedule, n: int, k_max: int, reps: int, seed: int) -> McEstimates:
    """Estimate f_{n,k} = E[Hb_k(Y_n)] by simulating reps sums.

    All innovations draw from one seeded stream, one density column at a
    time, so a fixed (seed, n, reps) triple reproduces every replication.
    """
    if isinstance(schedule, PolynomialDensity):
        schedule = InnovationSchedule.constant(schedule)
    if reps < 10_000:
        raise ValueError(f"reps must be at least 10^4, got {reps}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    rng = np.random.default_rng(seed)
    draws = np.empty((reps, n))
    tables: dict[int, CdfTable] = {}
    for j in range(n):
        dens = schedule.density_at(j + 1)
        key = id(dens)
        if key not in tables:
            tables[key] = build_cdf_table(dens)
        table = tables[key]
        u = rng.random(reps)
        draws[:, j] = np.interp(u, table.cdf, table.abscissae)
    y = draws.sum(axis=1) / math.sqrt(n)
    ht = hermite_table(k_max, y)
    means = ht.mean(axis=1)
    ses = ht.std(axis=1, ddof=1) / math.sqrt(reps)
    return McEstimates(ks=np.arange(k_max + 1), means=means, ses=ses, reps=reps, seed=seed)


def compare_mc(estimates: McEstimates, reference, factor: float = 5.0,
               label: str = "mc") -> list[OracleComparison]:
    """Compare exact coefficients against MC estimates at factor*SE tolerance.

    reference is the exact coefficient array; missing indices count as 0.
    """
    ref = np.asarray(reference, dtype=float)
    out = []
    for k in estimates.ks:
        exact = float(ref[k]) if k < ref.size else 0.0
        tol = factor * float(estimates.ses[k])
        out.append(_comparison(f"{label}(k={int(k)})", exact, float(estimates.means[k]), tol))
    return out
