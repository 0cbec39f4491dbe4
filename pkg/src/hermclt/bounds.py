"""Computable forms of the contraction inequalities.

Every comparison is returned as a BoundCheck carrying both sides.
improved_poincare is the spectral-gap contraction of the diagonal
semigroup on expansions with vanishing low coefficients.
gershgorin_row_sum and row_sum_sup control the reversibilized operator's
spectral radius row by row; poincare_like_bound and row_sum_sup_bound
are the certified contraction factors in their two published forms
(single and doubled exponent; both are exposed rather than reconciled).
er_inequality is the one-step barycentric convolution bound driving the
chain, alternative_bound its variant with a calibrated cross-term
constant, and calibrate_cr reports the smallest constant that makes the
latter hold on supplied samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import PolynomialDensity
from .errors import (
    BarycenterOutOfRange,
    DimensionTooSmall,
    HypothesisNotSatisfied,
    PreconditionViolated,
    SpectralGapViolation,
)
from .hermite import chi_square
from .hypothesis import a_phi, d_phi, gamma_table, hypothesis_report
from .operators import adjoint_convolve, m_entry, operator_norm_on_vk

__all__ = [
    "BoundCheck",
    "alternative_bound",
    "calibrate_cr",
    "derivative_norm",
    "er_inequality",
    "gershgorin_chain",
    "gershgorin_row_sum",
    "improved_poincare",
    "poincare_like_bound",
    "primitive_norm",
    "row_sum_sup",
    "row_sum_sup_bound",
]

_HOLD_REL = 1e-10
_HOLD_ABS = 1e-14


@dataclass(frozen=True)
class BoundCheck:
    """One evaluated inequality: lhs <= rhs up to fixed round-off slack."""

    lhs: float
    rhs: float
    margin: float
    holds: bool
    context: dict

    def __str__(self) -> str:
        verdict = "holds" if self.holds else "VIOLATED"
        return f"{self.lhs:.12g} <= {self.rhs:.12g} ({verdict}, margin {self.margin:.3g})"


def _make_check(lhs: float, rhs: float, context: dict) -> BoundCheck:
    return BoundCheck(
        lhs=float(lhs),
        rhs=float(rhs),
        margin=float(rhs) - float(lhs),
        holds=lhs <= rhs * (1.0 + _HOLD_REL) + _HOLD_ABS,
        context=dict(context),
    )


def _require_certified(phi: PolynomialDensity, a: float) -> None:
    threshold = a_phi(phi)
    if not threshold < a < 1.0:
        raise BarycenterOutOfRange(
            f"a must lie in ({threshold:.6g}, 1), got {a}"
        )
    if not hypothesis_report(phi).overall:
        raise HypothesisNotSatisfied(
            "density fails an applicable admissibility check"
        )


def improved_poincare(f, t: float, r: int) -> BoundCheck:
    """Semigroup contraction: sum_{k>r} f_k^2 e^{-2kt} vs e^{-2(r+1)t} times the variance.

    f must have vanishing coefficients on indices 1..r. Equality holds
    exactly when f is supported on index r+1 alone or t = 0.
    """
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    coeffs = np.asarray(f, dtype=float)
    for k in range(1, min(r, coeffs.size - 1) + 1):
        if coeffs[k] != 0.0:
            raise SpectralGapViolation(
                f"coefficient {k} must vanish below the spectral gap, got {coeffs[k]}"
            )
    if coeffs.size <= r + 1:
        return _make_check(0.0, 0.0, {"t": t, "r": r})
    ks = np.arange(r + 1, coeffs.size)
    sq = coeffs[r + 1 :] ** 2
    lhs = float(np.sum(sq * np.exp(-2.0 * ks * t)))
    rhs = math.exp(-2.0 * (r + 1) * t) * float(np.sum(sq))
    return _make_check(lhs, rhs, {"t": t, "r": r})


def gershgorin_row_sum(phi: PolynomialDensity, a: float, l: int) -> float:
    """Row sum sum_j |M(l,j)| over the band j in [max(K, l-N), l+N].

    The Gaussian degenerates to the diagonal value a^{2l}.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError(f"a must lie in [0, 1), got {a}")
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    if phi.is_gaussian:
        return a ** (2 * l)
    K, n_top = int(phi.K), phi.N
    if l < K:
        raise PreconditionViolated(f"row index l must be >= K = {K}, got {l}")
    total = 0.0
    for j in range(max(K, l - n_top), l + n_top + 1):
        total += abs(m_entry(phi, a, l, j))
    return total


def _decay_constant(phi: PolynomialDensity) -> float:
    """B with row_sum(l) <= B^2 a^{l-N} above the contraction threshold.

    Comes from bounding the row-sum majorant: e^{-u}(1 + sum gamma_k
    (2u)^{k/2}) <= B e^{-u/2} with B = 1 + sum_k gamma_k (2k/e)^{k/2},
    each summand maximized at u = k.
    """
    g = gamma_table(phi)
    total = 1.0
    for k in range(int(phi.K), phi.N + 1):
        total += g[k] * (2.0 * k / math.e) ** (k / 2.0)
    return total


def row_sum_sup(phi: PolynomialDensity, a: float, dim: int) -> tuple[float, int]:
    """Max over l in [K, dim] of gershgorin_row_sum, with its argmax.

    Above the contraction threshold the scan stops early once the
    certified geometric envelope B^2 a^{l-N} falls below the running
    max, so the returned value is the supremum over all l >= K, not
    just the scanned range.
    """
    if phi.is_gaussian:
        raise PreconditionViolated("the Gaussian has no admissible rows to scan")
    K, n_top = int(phi.K), phi.N
    if dim < K:
        raise DimensionTooSmall(f"dim must be >= K = {K}, got {dim}")
    certified = a_phi(phi) < a < 1.0
    envelope = _decay_constant(phi) ** 2 if certified else math.inf
    best = -math.inf
    best_l = K
    for l in range(K, dim + 1):
        s = gershgorin_row_sum(phi, a, l)
        if s > best:
            best, best_l = s, l
        if certified and l >= n_top and envelope * a ** (l - n_top) < best:
            break
    return best, best_l


def poincare_like_bound(phi: PolynomialDensity, a: float) -> float:
    """Certified squared-norm contraction factor a^K (1 + d_phi(a))^2.

    Published with the single exponent; the doubled-exponent form the
    row-sum argument actually proves is row_sum_sup_bound.
    """
    _require_certified(phi, a)
    return a**phi.K * (1.0 + d_phi(phi, a)) ** 2 if not phi.is_gaussian else 0.0


def row_sum_sup_bound(phi: PolynomialDensity, a: float) -> float:
    """Row-sum supremum bound a^{2K} (1 + d_phi(a))^2."""
    _require_certified(phi, a)
    return a ** (2.0 * phi.K) * (1.0 + d_phi(phi, a)) ** 2 if not phi.is_gaussian else 0.0


def gershgorin_chain(phi: PolynomialDensity, a: float, dim: int) -> tuple[BoundCheck, BoundCheck]:
    """Dominance chain operator_norm^2 <= row-sum sup <= a^{2K}(1+d)^2.

    Returns the two links as BoundChecks; the power-iteration value is a
    lower bound on the true norm, so the first link must hold whenever
    the implementation is correct.
    """
    _require_certified(phi, a)
    K = int(phi.K)
    norm = operator_norm_on_vk(phi, a, K, dim)
    sup, arg = row_sum_sup(phi, a, dim)
    bound = row_sum_sup_bound(phi, a)
    first = _make_check(norm**2, sup, {"a": a, "stage": "norm-vs-rows", "argmax_l": arg})
    second = _make_check(sup, bound, {"a": a, "stage": "rows-vs-factor", "argmax_l": arg})
    return first, second


def er_inequality(f, phi: PolynomialDensity, a: float) -> BoundCheck:
    """One-step convolution contraction of the chi-square distance.

    lhs is the exact distance of the convolved density; rhs is
    a^{r+1}(1+d_phi(a))chi2(f) + (1-a^2)^{(r+1)/2}chi2(phi). A failed
    check indicates an implementation bug, not new mathematics.
    """
    if phi.is_gaussian:
        raise PreconditionViolated("er_inequality needs a non-Gaussian innovation")
    coeffs = np.asarray(f, dtype=float)
    if coeffs.size == 0 or coeffs[0] != 1.0:
        raise PreconditionViolated("f must be a density expansion with unit constant term")
    r = int(phi.r)
    for k in range(1, min(r, coeffs.size - 1) + 1):
        if coeffs[k] != 0.0:
            raise PreconditionViolated(
                f"f must have vanishing coefficients on 1..{r}, found index {k}"
            )
    _require_certified(phi, a)
    lhs = chi_square(adjoint_convolve(coeffs, phi.coeffs, a))
    fa = chi_square(coeffs)
    rhs = a ** (r + 1) * (1.0 + d_phi(phi, a)) * fa
    rhs += (1.0 - a * a) ** ((r + 1) / 2.0) * phi.chi2
    return _make_check(lhs, rhs, {"a": a, "r": r})


def derivative_norm(f, order: int) -> float:
    """Norm of the order-th derivative: sqrt(sum_k k(k-1)...(k-order+1) f_k^2).

    Derivatives shift the expansion down, so index k contributes the
    falling factorial of length order.
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    coeffs = np.asarray(f, dtype=float)
    total = 0.0
    for k in range(order, coeffs.size):
        weight = 1.0
        for j in range(order):
            weight *= k - j
        total += weight * coeffs[k] ** 2
    return math.sqrt(total)


def primitive_norm(f, order: int) -> float:
    """Norm of the order-th vanishing-mean primitive:
    sqrt(sum_{k>=1} f_k^2 / ((k+order)...(k+1))).

    Each primitive shifts the expansion up and drops the constant, so
    the k = 0 term never contributes.
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    coeffs = np.asarray(f, dtype=float)
    total = 0.0
    for k in range(1, coeffs.size):
        weight = 1.0
        for j in range(1, order + 1):
            weight *= k + j
        total += coeffs[k] ** 2 / weight
    return math.sqrt(total)


def alternative_bound(f, phi: PolynomialDensity, a: float, r: int, c_r: float) -> BoundCheck:
    """Convolution bound with a cross term weighted by the supplied c_r:

        a^{r+1} chi2(f) + (1-a^2)^{(r+1)/2} chi2(phi)
          + c_r (1-a^2)^{(r+1)/2} (chi2(f) chi2(phi)
                                   + derivative_norm(f, r+1) primitive_norm(phi, r+1))

    c_r comes from the caller (see calibrate_cr); it is reported, never
    asserted as universal.
    """
    if not 0.0 < a < 1.0:
        raise BarycenterOutOfRange(f"a must lie in (0, 1), got {a}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    coeffs = np.asarray(f, dtype=float)
    if coeffs.size == 0 or coeffs[0] != 1.0:
        raise PreconditionViolated("f must be a density expansion with unit constant term")
    for k in range(1, min(r, coeffs.size - 1) + 1):
        if coeffs[k] != 0.0:
            raise PreconditionViolated(
                f"f must have vanishing coefficients on 1..{r}, found index {k}"
            )
    if not phi.is_gaussian and phi.K < r + 1:
        raise PreconditionViolated(
            f"phi must match moments to order {r}, its first index is {int(phi.K)}"
        )
    lhs = chi_square(adjoint_convolve(coeffs, phi.coeffs, a))
    fa = chi_square(coeffs)
    scale = (1.0 - a * a) ** ((r + 1) / 2.0)
    cross = fa * phi.chi2 + derivative_norm(coeffs, r + 1) * primitive_norm(phi.coeffs, r + 1)
    rhs = a ** (r + 1) * fa + scale * phi.chi2 + c_r * scale * cross
    return _make_check(lhs, rhs, {"a": a, "r": r, "c_r": c_r})


def calibrate_cr(f_list, phi: PolynomialDensity, a_values, r: int) -> float:
    """Smallest c_r >= 0 making alternative_bound hold on all given samples.

    Purely empirical: the value describes these inputs only.
    """
    worst = 0.0
    for f in f_list:
        coeffs = np.asarray(f, dtype=float)
        fa = chi_square(coeffs)
        cross0 = derivative_norm(coeffs, r + 1) * primitive_norm(phi.coeffs, r + 1)
        for a in a_values:
            lhs = chi_square(adjoint_convolve(coeffs, phi.coeffs, a))
            scale = (1.0 - a * a) ** ((r + 1) / 2.0)
            base = a ** (r + 1) * fa + scale * phi.chi2
            cross = scale * (fa * phi.chi2 + cross0)
            if lhs > base and cross > 0.0:
                worst = max(worst, (lhs - base) / cross)
    return worst
