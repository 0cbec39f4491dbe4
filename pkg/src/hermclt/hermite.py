"""Renormalized Hermite basis machinery.

Everything in this package works with the probabilists' convention: the
reference measure is mu = N(0,1) with weight e^{-x^2/2}/sqrt(2*pi), the
polynomials He_n satisfy He_{n+1} = x*He_n - n*He_{n-1}, and the
renormalized family Hb_n = He_n/sqrt(n!) is orthonormal in L^2(mu).
Coefficient sequences are indexed from 0, entry k multiplying Hb_k, and
the L^2(mu) norm of a function equals the Euclidean norm of its
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import DegreeTooLarge, IndexOutOfRange, OrderOutOfRange

__all__ = [
    "QuadratureRule",
    "chi_square",
    "eval_hermite",
    "eval_series",
    "from_monomial",
    "gauss_hermite",
    "hermite_table",
    "log_binomial",
    "to_monomial",
    "trim_coeffs",
]

# Exact integer combinatorics are reserved for small indices; everything
# larger goes through log-gamma (matrix entries need binomials up to ~512).
_EXACT_BINOM_MAX = 30
_MONOMIAL_DEGREE_MAX = 64


def eval_hermite(n: int, x):
    """Value of Hb_n at x (scalar or ndarray), by the normalized recurrence.

    Hb_{n+1}(x) = (x*Hb_n(x) - sqrt(n)*Hb_{n-1}(x)) / sqrt(n+1), which keeps
    every intermediate on the orthonormal scale and never forms a factorial.
    """
    if n < 0:
        raise IndexOutOfRange(f"Hermite index must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        prev, cur = cur, (x * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
    return cur if cur.ndim else float(cur)


def hermite_table(n_max: int, x) -> np.ndarray:
    """Array of shape (n_max+1, len(x)) with row k holding Hb_k at the points x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max + 1, x.size))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def eval_series(coeffs, x):
    """Value of sum_k coeffs[k]*Hb_k at x (scalar or ndarray)."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    acc = np.full_like(xv, coeffs[0] if coeffs.size else 0.0)
    prev = np.zeros_like(xv)
    cur = np.ones_like(xv)
    for k in range(1, coeffs.size):
        prev, cur = cur, (xv * cur - math.sqrt(k - 1) * prev) / math.sqrt(k)
        if coeffs[k] != 0.0:
            acc = acc + coeffs[k] * cur
    return float(acc[0]) if scalar else acc


def trim_coeffs(coeffs) -> np.ndarray:
    """Copy of coeffs with trailing exact zeros removed (at least length 1)."""
    c = np.asarray(coeffs, dtype=float)
    nz = np.nonzero(c)[0]
    end = int(nz[-1]) + 1 if nz.size else 1
    return c[:end].copy()


def chi_square(coeffs) -> float:
    """Distance to the constant 1 in L^2(mu): sqrt(sum_{k>=1} coeffs[k]^2)."""
    c = np.asarray(coeffs, dtype=float)
    return float(np.sqrt(np.sum(c[1:] ** 2))) if c.size > 1 else 0.0


def _monomial_rows(n: int) -> list[tuple[int, ...]]:
    """Exact integer monomial coefficients (ascending) of He_0 .. He_n."""
    rows: list[tuple[int, ...]] = [(1,), (0, 1)]
    while len(rows) <= n:
        k = len(rows) - 1
        shifted = (0,) + rows[k]
        prev = rows[k - 1]
        nxt = tuple(
            shifted[j] - (k * prev[j] if j < len(prev) else 0)
            for j in range(k + 2)
        )
        rows.append(nxt)
    return rows[: n + 1]


def to_monomial(coeffs) -> np.ndarray:
    """Monomial coefficients (ascending powers) of sum_k coeffs[k]*Hb_k.

    Exact integer expansion of He_k divided by sqrt(k!); capped at degree 64
    where the integer recurrence and double conversion are still safe.
    """
    c = trim_coeffs(coeffs)
    degree = c.size - 1
    if degree > _MONOMIAL_DEGREE_MAX:
        raise DegreeTooLarge(
            f"monomial conversion supports degree <= {_MONOMIAL_DEGREE_MAX}, got {degree}"
        )
    rows = _monomial_rows(degree)
    out = np.zeros(degree + 1)
    for k in range(degree + 1):
        if c[k] == 0.0:
            continue
        scale = c[k] / math.sqrt(math.factorial(k))
        row = rows[k]
        out[: len(row)] += scale * np.asarray(row, dtype=float)
    return out


def from_monomial(mono) -> np.ndarray:
    """Hermite coefficients of a polynomial given by ascending monomial coefficients."""
    m = np.asarray(mono, dtype=float).copy()
    nz = np.nonzero(m)[0]
    degree = int(nz[-1]) if nz.size else 0
    if degree > _MONOMIAL_DEGREE_MAX:
        raise DegreeTooLarge(
            f"monomial conversion supports degree <= {_MONOMIAL_DEGREE_MAX}, got {degree}"
        )
    rows = _monomial_rows(degree)
    out = np.zeros(degree + 1)
    for k in range(degree, -1, -1):
        lead = 1.0 / math.sqrt(math.factorial(k))
        g = m[k] / lead
        out[k] = g
        row = np.asarray(rows[k], dtype=float)
        m[: k + 1] -= (g * lead) * row
    return out


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k); exact integer path for n <= 30, log-gamma beyond."""
    if k < 0 or n < 0 or k > n:
        raise IndexOutOfRange(f"binomial index out of range: n={n}, k={k}")
    if n <= _EXACT_BINOM_MAX:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_binomial_array(n, k) -> np.ndarray:
    """Vectorized ln C(n, k) via log-gamma; no range checking."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for mu: nodes, positive weights summing to 1, node count."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values) -> float:
        """Weighted sum of integrand values at the nodes."""
        return float(np.dot(self.weights, values))


def gauss_hermite(order: int) -> QuadratureRule:
    """Probabilists' Gauss-Hermite rule of the given order.

    Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
    Jacobi matrix with zero diagonal and off-diagonals sqrt(1..order-1);
    weights are the squared first components of the normalized eigenvectors
    (total mass of mu is 1). Exact for polynomials of degree 2*order - 1.
    """
    if not 1 <= order <= 256:
        raise OrderOutOfRange(f"order must be in [1, 256], got {order}")
    if order == 1:
        return QuadratureRule(np.zeros(1), np.ones(1), 1)
    diag = np.zeros(order)
    off = np.sqrt(np.arange(1.0, order))
    nodes, vecs = eigh_tridiagonal(diag, off)
    weights = vecs[0] ** 2
    # The rule is symmetric about 0; enforce it exactly against round-off.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights /= weights.sum()
    return QuadratureRule(nodes, weights, order)
