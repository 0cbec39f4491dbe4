"""Polynomial densities relative to the standard Gaussian.

A density here is phi = 1 + sum_{k=K}^{N} phi_k*Hb_k with phi nonnegative
on all of R. The constant coefficient 1 is the unit mass; vanishing
coefficients on 1..K-1 mean the first K-1 moments match the Gaussian
ones. The Gaussian itself is the edge case {1} with the convention
K = r = +inf, N = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .errors import MassNotOne, NotADensity
from .hermite import (
    chi_square,
    eval_series,
    gauss_hermite,
    hermite_table,
    to_monomial,
    trim_coeffs,
)

__all__ = [
    "CdfTable",
    "PolynomialDensity",
    "build_density",
    "load_density",
    "moments",
    "relative_entropy",
    "sample",
    "tv_distance",
]

_MASS_TOL = 1e-12
_ROOT_PAIR_TOL = 1e-7
_GRID_POINTS = 10_000
_NEG_TOL_SCALE = 1e-10
_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class PolynomialDensity:
    """Certified polynomial density: coefficients plus derived structure.

    K is the first nonzero coefficient index >= 1, N the last, r = K - 1
    the matched-moment order, chi2 the distance to the Gaussian. For the
    Gaussian K and r are +inf and N = 0.
    """

    coeffs: np.ndarray
    K: float
    N: int
    r: float
    chi2: float

    @property
    def is_gaussian(self) -> bool:
        return self.N == 0

    def __call__(self, x):
        return eval_series(self.coeffs, x)


@dataclass(frozen=True)
class CdfTable:
    """Tabulated cumulative distribution of phi*dmu on [-R, R]."""

    abscissae: np.ndarray
    cdf: np.ndarray
    tail_bound: float


def _find_negative_point(coeffs: np.ndarray, radius: float) -> float | None:
    """A point where the series is negative, searching a grid then the tails."""
    grid = np.linspace(-radius, radius, _GRID_POINTS)
    vals = eval_series(coeffs, grid)
    idx = int(np.argmin(vals))
    if vals[idx] < 0.0:
        return float(grid[idx])
    for j in range(1, 41):
        for x in (-radius * 2.0**j, radius * 2.0**j):
            if eval_series(coeffs, x) < 0.0:
                return x
    return None


def _certify_nonnegative(coeffs: np.ndarray, n_last: int) -> None:
    """Raise NotADensity unless the series is nonnegative on R.

    Algebraic part: all real roots (companion-matrix eigenvalues of the
    monomial form) must pair up to even multiplicity within 1e-7, so the
    function never changes sign. Numeric part: values on a 10^4-point grid
    over [-R, R] must stay above -1e-10 * (1 + max|coeff|), tolerating
    round-off at genuine double roots.
    """
    radius = 2.0 * math.sqrt(2.0 * n_last + 2.0)
    scale = 1.0 + float(np.max(np.abs(coeffs)))
    if n_last % 2 == 1:
        witness = _find_negative_point(coeffs, radius)
        raise NotADensity(
            f"odd leading Hermite degree {n_last} forces negativity at infinity",
            witness=witness,
        )
    mono = to_monomial(coeffs)
    if mono[-1] < 0.0:
        witness = _find_negative_point(coeffs, radius)
        raise NotADensity(
            "negative leading monomial coefficient forces negativity at infinity",
            witness=witness,
        )
    roots = np.roots(mono[::-1])
    real_roots = np.sort(roots[np.abs(roots.imag) <= _ROOT_PAIR_TOL].real)
    i = 0
    while i < real_roots.size:
        j = i + 1
        while j < real_roots.size and real_roots[j] - real_roots[j - 1] <= _ROOT_PAIR_TOL:
            j += 1
        if (j - i) % 2 == 1:
            x0 = float(real_roots[i])
            witness = _find_negative_point(coeffs, radius)
            raise NotADensity(
                f"real root of odd multiplicity near x = {x0:.6g}",
                witness=witness if witness is not None else x0,
            )
        i = j
    grid = np.linspace(-radius, radius, _GRID_POINTS)
    vals = eval_series(coeffs, grid)
    idx = int(np.argmin(vals))
    if vals[idx] < -_NEG_TOL_SCALE * scale:
        raise NotADensity(
            f"negative value {vals[idx]:.3e} at x = {grid[idx]:.6g}",
            witness=float(grid[idx]),
        )


def build_density(raw) -> PolynomialDensity:
    """Validate raw Hermite coefficients and return a certified density.

    raw[0] must be 1 (unit mass). Trailing zeros are trimmed; K, N, r and
    chi2 are derived; nonnegativity is certified by root isolation plus a
    grid check. {1} builds the Gaussian with the K = r = +inf convention.
    """
    c = np.asarray(raw, dtype=float)
    if c.size == 0 or abs(c[0] - 1.0) > _MASS_TOL:
        got = "empty" if c.size == 0 else f"{c[0]!r}"
        raise MassNotOne(f"constant coefficient must be 1, got {got}")
    c = trim_coeffs(c)
    c[0] = 1.0
    if c.size == 1:
        return PolynomialDensity(coeffs=c, K=math.inf, N=0, r=math.inf, chi2=0.0)
    n_last = c.size - 1
    k_first = int(np.nonzero(c[1:])[0][0]) + 1
    _certify_nonnegative(c, n_last)
    return PolynomialDensity(
        coeffs=c, K=k_first, N=n_last, r=k_first - 1, chi2=chi_square(c)
    )


def load_density(path: str | Path) -> PolynomialDensity:
    """Build a density from a JSON file {"coeffs": [1.0, ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    return build_density(data["coeffs"])


def moments(phi: PolynomialDensity, up_to: int) -> np.ndarray:
    """Raw moments int x^k phi dmu for k = 0..up_to, by exact quadrature."""
    if up_to > 2 * phi.N + 8:
        raise ValueError(f"moment order {up_to} beyond supported 2N+8 = {2 * phi.N + 8}")
    order = max((phi.N + up_to) // 2 + 1, 1)
    rule = gauss_hermite(order)
    dens = eval_series(phi.coeffs, rule.nodes)
    powers = np.vander(rule.nodes, up_to + 1, increasing=True).T
    return powers @ (rule.weights * dens)


def _cdf_radius(phi: PolynomialDensity) -> float:
    norm = math.sqrt(1.0 + phi.chi2**2)
    r_tail = 2.0 * math.sqrt(max(math.log(math.sqrt(2.0) * norm / _TAIL_MASS), 1.0))
    r_grid = 2.0 * math.sqrt(2.0 * phi.N + 2.0)
    return max(r_tail, r_grid, 8.0)


def build_cdf_table(phi: PolynomialDensity, points: int = 8193) -> CdfTable:
    """Cumulative distribution of phi*dmu tabulated on [-R, R].

    The antiderivative is available in closed form: integrating Hb_k
    against the Gaussian kernel gives -Hb_{k-1}(x)*pdf(x)/sqrt(k), so the
    cdf is evaluated exactly at every abscissa instead of by panel sums.
    R is chosen so the mass outside [-R, R] is below 1e-12. Duplicate cdf
    values (tail round-off) are dropped to keep the table strictly
    increasing.
    """
    radius = _cdf_radius(phi)
    xs = np.linspace(-radius, radius, points)
    pdf = np.exp(-0.5 * xs**2) / math.sqrt(2.0 * math.pi)
    cdf = ndtr(xs)
    c = phi.coeffs
    if c.size > 1:
        table = hermite_table(c.size - 2, xs)
        correction = np.zeros_like(xs)
        for k in range(1, c.size):
            if c[k] != 0.0:
                correction += c[k] / math.sqrt(k) * table[k - 1]
        cdf = cdf - correction * pdf
    cdf = np.clip(cdf, 0.0, 1.0)
    np.maximum.accumulate(cdf, out=cdf)
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    norm = math.sqrt(1.0 + phi.chi2**2)
    tail = math.sqrt(2.0) * norm * math.exp(-0.25 * radius**2)
    return CdfTable(abscissae=xs[keep], cdf=cdf[keep], tail_bound=tail)


def sample(phi: PolynomialDensity, count: int, seed: int | np.random.Generator) -> np.ndarray:
    """i.i.d. draws from phi*dmu via inverse-CDF lookup.

    seed may be an integer (fresh deterministic stream) or an existing
    Generator to draw from a shared stream.
    """
    table = build_cdf_table(phi)
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    return np.interp(u, table.cdf, table.abscissae)


def _dense_grid(phi: PolynomialDensity, points: int = 200_001):
    radius = _cdf_radius(phi)
    xs = np.linspace(-radius, radius, points)
    pdf = np.exp(-0.5 * xs**2) / math.sqrt(2.0 * math.pi)
    return xs, eval_series(phi.coeffs, xs), pdf


def tv_distance(phi: PolynomialDensity) -> float:
    """Total variation distance to the Gaussian, normalized as int |phi - 1| dmu."""
    xs, dens, pdf = _dense_grid(phi)
    return float(np.trapezoid(np.abs(dens - 1.0) * pdf, xs))


def relative_entropy(phi: PolynomialDensity) -> float:
    """Entropy of phi*dmu relative to mu: int phi*log(phi) dmu."""
    xs, dens, pdf = _dense_grid(phi)
    dens = np.maximum(dens, 0.0)
    integrand = np.where(dens > 0.0, dens * np.log(np.maximum(dens, 1e-300)), 0.0)
    return float(np.trapezoid(integrand * pdf, xs))
