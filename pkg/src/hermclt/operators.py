"""Hermite-domain matrices of the convolution operators.

For the mixture aU + sqrt(1-a^2)V with U ~ f*dmu and V ~ phi*dmu, the
forward operator Q acts on test functions and its adjoint Q* maps the
density f of U to the density of the mixture. On the renormalized basis:

    Qhat(m, n) = C(n, m)^(1/2) * a^m * (1-a^2)^((n-m)/2) * phi_{n-m},  m <= n,

upper-triangular with band width N. The adjoint matrix is the transpose,
and M = Q Q* is symmetric with bandwidth N; its entry at (l, l-i) is

    a^(2l-i) * sum_k C(k+l,k)^(1/2) C(k+l,k+i)^(1/2) (1-a^2)^((2k+i)/2) phi_{k+i} phi_k.

All powers and binomial square roots are assembled in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import PolynomialDensity
from .errors import DimensionTooSmall, NoConvergence, TruncationOverflow
from .hermite import log_binomial_array, trim_coeffs

__all__ = [
    "BandedOperator",
    "D_MAX",
    "HSSum",
    "UNDERFLOW_FLOOR",
    "apply_adjoint",
    "build_m_matrix",
    "build_ou_matrix",
    "build_q_matrix",
    "build_qstar_matrix",
    "hilbert_schmidt_sum",
    "m_diagonal",
    "m_entry",
    "operator_norm_on_vk",
    "ou_apply",
]

D_MAX = 512
UNDERFLOW_FLOOR = 1e-300

_POWER_TOL = 1e-12
_POWER_MAX_ITER = 100_000


@dataclass(frozen=True)
class BandedOperator:
    """Dense storage of a banded Hermite-domain operator truncation.

    kind is one of "Q", "Qstar", "M", "OU". band is the bandwidth N of the
    generating density (0 for OU). phi/a/t record the build parameters.
    """

    matrix: np.ndarray
    kind: str
    dim: int
    band: int
    a: float | None = None
    phi: np.ndarray | None = None
    t: float | None = None


def _log_one_minus_a2(a: float) -> float:
    # log(1-a^2) as log1p(-a) + log1p(a): accurate when a is close to 1.
    return math.log1p(-a) + math.log1p(a)


def build_q_matrix(phi: PolynomialDensity, a: float, dim: int) -> BandedOperator:
    """Truncated matrix of the forward operator, shape (dim, dim)."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must be in [0, 1], got {a}")
    c = trim_coeffs(phi.coeffs)
    n_band = c.size - 1
    if dim < n_band + 1:
        raise DimensionTooSmall(f"dim must be >= N + 1 = {n_band + 1}, got {dim}")
    mat = np.zeros((dim, dim))
    log_1ma2 = _log_one_minus_a2(a) if a < 1.0 else -math.inf
    for j in range(n_band + 1):
        if c[j] == 0.0:
            continue
        m = np.arange(dim - j)
        if a == 0.0:
            vals = np.zeros(m.size)
            vals[0] = c[j]
        elif a == 1.0:
            vals = np.zeros(m.size)
            if j == 0:
                vals[:] = c[0]
        else:
            log_mag = (
                0.5 * log_binomial_array(m + j, m)
                + m * math.log(a)
                + 0.5 * j * log_1ma2
            )
            vals = np.exp(log_mag) * c[j]
        mat[m, m + j] = vals
    return BandedOperator(matrix=mat, kind="Q", dim=dim, band=n_band, a=a, phi=c)


def build_qstar_matrix(phi: PolynomialDensity, a: float, dim: int) -> BandedOperator:
    """Adjoint matrix: transpose of the forward truncation."""
    q = build_q_matrix(phi, a, dim)
    return BandedOperator(
        matrix=q.matrix.T.copy(), kind="Qstar", dim=dim, band=q.band, a=a, phi=q.phi
    )


def _m_offset_values(c: np.ndarray, a: float, i: int, ls: np.ndarray) -> np.ndarray:
    """Values of M(l, l-i) for the requested rows l (all >= i)."""
    n_band = c.size - 1
    out = np.zeros(ls.size, dtype=float)
    if i > n_band:
        return out
    if a == 0.0:
        # a^(2l-i) survives only at l = i = 0.
        if i == 0:
            out[ls == 0] = float(np.sum(c**2))
        return out
    log_a = math.log(a)
    log_1ma2 = _log_one_minus_a2(a)
    for k in range(n_band - i + 1):
        if c[k] == 0.0 or c[k + i] == 0.0:
            continue
        log_mag = (
            0.5 * log_binomial_array(k + ls, k)
            + 0.5 * log_binomial_array(k + ls, k + i)
            + (2 * ls - i) * log_a
            + 0.5 * (2 * k + i) * log_1ma2
        )
        out += np.exp(log_mag) * (c[k] * c[k + i])
    return out


def m_entry(phi: PolynomialDensity, a: float, l: int, j: int) -> float:
    """Closed-form entry M(l, j); zero outside the band |l - j| <= N."""
    c = trim_coeffs(phi.coeffs)
    row = max(l, j)
    i = abs(l - j)
    return float(_m_offset_values(c, a, i, np.array([row]))[0])


def m_diagonal(phi: PolynomialDensity, a: float, dim: int) -> np.ndarray:
    """Diagonal entries M(n, n) for n = 0..dim-1 from the closed form."""
    c = trim_coeffs(phi.coeffs)
    return _m_offset_values(c, a, 0, np.arange(dim))


def build_m_matrix(phi: PolynomialDensity, a: float, dim: int) -> BandedOperator:
    """Symmetric matrix of Q Q* from the closed form, shape (dim, dim)."""
    if not 0.0 <= a < 1.0:
        raise ValueError(f"a must be in [0, 1), got {a}")
    c = trim_coeffs(phi.coeffs)
    n_band = c.size - 1
    if dim < n_band + 1:
        raise DimensionTooSmall(f"dim must be >= N + 1 = {n_band + 1}, got {dim}")
    mat = np.zeros((dim, dim))
    for i in range(n_band + 1):
        ls = np.arange(i, dim)
        vals = _m_offset_values(c, a, i, ls)
        mat[ls, ls - i] = vals
        if i > 0:
            mat[ls - i, ls] = vals
    return BandedOperator(matrix=mat, kind="M", dim=dim, band=n_band, a=a, phi=c)


def build_ou_matrix(t: float, dim: int) -> BandedOperator:
    """Diagonal semigroup matrix with entries e^{-nt}."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    mat = np.diag(np.exp(-t * np.arange(dim, dtype=float)))
    return BandedOperator(matrix=mat, kind="OU", dim=dim, band=0, t=t)


def ou_apply(f, t: float) -> np.ndarray:
    """Semigroup action on coefficients: entry k scaled by e^{-kt}."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    f = np.asarray(f, dtype=float)
    return f * np.exp(-t * np.arange(f.size, dtype=float))


def adjoint_convolve(f, phi_coeffs, a: float) -> np.ndarray:
    """Coefficients of the mixture density, full length degree(f) + N + 1.

    out_l = sum_{j<=N} C(l, j)^(1/2) a^(l-j) (1-a^2)^(j/2) f_{l-j} phi_j.
    """
    f = np.asarray(f, dtype=float)
    c = np.asarray(phi_coeffs, dtype=float)
    n_band = c.size - 1
    if a == 1.0:
        return f.copy() * c[0]
    if a == 0.0:
        out = np.zeros(max(f.size, c.size))
        out[: c.size] = c * f[0]
        return out
    out = np.zeros(f.size + n_band)
    log_a = math.log(a)
    log_1ma2 = _log_one_minus_a2(a)
    for j in range(n_band + 1):
        if c[j] == 0.0:
            continue
        ls = np.arange(j, j + f.size)
        log_mag = 0.5 * log_binomial_array(ls, j) + (ls - j) * log_a + 0.5 * j * log_1ma2
        out[j : j + f.size] += np.exp(log_mag) * f * c[j]
    return out


def apply_adjoint(op: BandedOperator, f) -> np.ndarray:
    """Adjoint action on a coefficient vector; exact degree growth by N."""
    if op.kind != "Q":
        raise ValueError(f"apply_adjoint expects a kind-Q operator, got {op.kind}")
    f = trim_coeffs(f)
    degree = f.size - 1
    if degree + op.band > op.dim - 1:
        raise TruncationOverflow(
            f"degree {degree} + band {op.band} exceeds truncation {op.dim - 1}"
        )
    return adjoint_convolve(f, op.phi, op.a)


@dataclass(frozen=True)
class HSSum:
    """Partial Hilbert-Schmidt diagonal sum with a geometric tail estimate."""

    partial_sum: float
    tail_estimate: float
    converged: bool

    @property
    def total(self) -> float:
        return self.partial_sum + self.tail_estimate


def hilbert_schmidt_sum(phi: PolynomialDensity, a: float, dim: int) -> HSSum:
    """Sum of M(n, n) over n < dim, with a certified geometric tail bound.

    The full series equals ||phi||^2 / (1-a^2). Consecutive diagonal terms
    have ratio at most a^2 * (1 + N/(dim+1)) for n >= dim; when that ratio
    reaches 1 the tail cannot be bounded and the result is flagged.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError(f"a must be in [0, 1), got {a}")
    diag = m_diagonal(phi, a, dim + 1)
    partial = float(np.sum(diag[:dim]))
    n_band = trim_coeffs(phi.coeffs).size - 1
    ratio = a * a * (1.0 + n_band / (dim + 1.0))
    if ratio >= 1.0:
        return HSSum(partial_sum=partial, tail_estimate=math.inf, converged=False)
    tail = float(diag[dim]) / (1.0 - ratio)
    converged = tail <= 1e-8 * max(partial, 1e-300)
    return HSSum(partial_sum=partial, tail_estimate=tail, converged=converged)


def operator_norm_on_vk(phi: PolynomialDensity, a: float, K: int, dim: int) -> float:
    """Operator norm of the adjoint restricted to span{Hb_k : k >= K}.

    Power iteration on the symmetric restriction (M(i,j))_{K <= i,j < dim}
    returns sqrt of its top eigenvalue. Rayleigh quotients of a positive
    semidefinite matrix never exceed the true eigenvalue, so the result is
    a certified lower bound that increases with dim.
    """
    n_band = trim_coeffs(phi.coeffs).size - 1
    if dim < K + 4 * n_band:
        raise DimensionTooSmall(f"dim must be >= K + 4N = {K + 4 * n_band}, got {dim}")
    block = build_m_matrix(phi, a, dim).matrix[K:, K:]
    size = block.shape[0]
    v = np.full(size, 1.0 / math.sqrt(size))
    lam_prev = math.inf
    for _ in range(_POWER_MAX_ITER):
        w = block @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        lam = float(np.dot(v, w))
        v = w / norm_w
        if abs(lam - lam_prev) <= _POWER_TOL * max(abs(lam), 1e-300):
            return math.sqrt(max(lam, 0.0))
        lam_prev = lam
    raise NoConvergence(
        f"power iteration did not meet tolerance {_POWER_TOL} in {_POWER_MAX_ITER} steps"
    )
