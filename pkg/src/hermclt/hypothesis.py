"""Admissibility checks and proof-side predicates for polynomial densities.

For phi = 1 + sum_{k=K}^N phi_k*Hb_k the contraction machinery needs the
weighted coefficients

    gamma_k = C_k |phi_k| / sqrt(k!),      C_k = (1 + N/K)^{k/2},

to decay fast enough. check_h1 and check_h1prime test the geometric-decay
conditions, check_h2 the leading-coefficient size condition, and
hypothesis_report bundles all of them. d_phi is the geometric defect that
enters the contraction factor, h_function the row-sum majorant whose
monotonicity the spectral bound rests on. lemma_polynom_predicate and
double_prod_check expose the two combinatorial inequalities behind those
bounds for direct property testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import PolynomialDensity
from .errors import PreconditionViolated
from .hermite import log_binomial

__all__ = [
    "FAIL",
    "NOT_APPLICABLE",
    "PASS",
    "CheckResult",
    "HypothesisReport",
    "a_phi",
    "c_factor",
    "check_h1",
    "check_h1prime",
    "check_h2",
    "d_phi",
    "d_phi_gamma_form",
    "d_phi_limit",
    "double_prod_check",
    "gamma_table",
    "h1prime_ratio",
    "h_function",
    "hypothesis_report",
    "lemma_polynom_predicate",
]

_REL_TOL = 1e-12

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one admissibility predicate.

    lhs and rhs hold the two sides of the binding comparison: the first
    violating pair when status is "fail", the tightest passing pair
    otherwise. first_violation is the first index k breaking the
    condition, when one exists.
    """

    name: str
    status: str
    first_violation: int | None = None
    lhs: float | None = None
    rhs: float | None = None
    note: str = ""

    @property
    def failed(self) -> bool:
        return self.status == FAIL


@dataclass(frozen=True)
class HypothesisReport:
    """Full admissibility report for one density.

    gammas and C map k -> gamma_k and k -> C_k for K <= k <= N (empty for
    the Gaussian). overall is true when no applicable check among h1,
    h2a, h2b fails; h1prime is informational only.
    """

    a_phi: float
    gammas: dict[int, float]
    C: dict[int, float]
    h1: CheckResult
    h1prime: CheckResult
    h2a: CheckResult
    h2b: CheckResult
    overall: bool


def a_phi(phi: PolynomialDensity) -> float:
    """Contraction threshold (1 + N/K)^{-1/4}, or 0.0 for the Gaussian."""
    if phi.is_gaussian:
        return 0.0
    return (1.0 + phi.N / phi.K) ** -0.25


def c_factor(phi: PolynomialDensity, k: int) -> float:
    """Coefficient weight C_k = (1 + N/K)^{k/2}."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return (1.0 + phi.N / phi.K) ** (k / 2.0)


def gamma_table(phi: PolynomialDensity) -> np.ndarray:
    """Weights gamma_k = C_k|phi_k|/sqrt(k!) for k = 0..N.

    Entries strictly between 0 and K vanish with the coefficients; the
    constant index carries gamma_0 = 1.
    """
    c = phi.coeffs
    out = np.empty(c.size)
    base = 1.0 + phi.N / phi.K
    for k in range(c.size):
        out[k] = base ** (k / 2.0) * abs(c[k]) / math.sqrt(math.factorial(k))
    return out


def h1prime_ratio(phi: PolynomialDensity) -> float:
    """One-step ratio bound sqrt(sqrt(1 - 1/(K+2)) / (1 + N/K))."""
    return math.sqrt(math.sqrt(1.0 - 1.0 / (phi.K + 2.0)) / (1.0 + phi.N / phi.K))


def check_h1(phi: PolynomialDensity) -> CheckResult:
    """Two-step decay condition (k+2)*gamma_{k+2} <= gamma_k on K..N-2.

    Not applicable to the Gaussian or when K > N - 2.
    """
    if phi.is_gaussian or phi.K > phi.N - 2:
        return CheckResult("h1", NOT_APPLICABLE, note="requires K <= N - 2")
    g = gamma_table(phi)
    K = int(phi.K)
    tight: tuple[float, float] | None = None
    for k in range(K, phi.N - 1):
        lhs = (k + 2.0) * g[k + 2]
        rhs = g[k]
        if lhs > rhs * (1.0 + _REL_TOL):
            return CheckResult(
                "h1",
                FAIL,
                first_violation=k,
                lhs=lhs,
                rhs=rhs,
                note=f"(k+2)*gamma_(k+2) exceeds gamma_k at k = {k}",
            )
        if tight is None or lhs - rhs > tight[0] - tight[1]:
            tight = (lhs, rhs)
    assert tight is not None
    return CheckResult("h1", PASS, lhs=tight[0], rhs=tight[1])


def check_h1prime(phi: PolynomialDensity) -> CheckResult:
    """One-step ratio condition |phi_{k+1}| <= rho*|phi_k| on K..N.

    Sufficient for the two-step condition of check_h1, not necessary.
    Not applicable to the Gaussian or when K > N - 2.
    """
    if phi.is_gaussian or phi.K > phi.N - 2:
        return CheckResult("h1prime", NOT_APPLICABLE, note="requires K <= N - 2")
    rho = h1prime_ratio(phi)
    K, N = int(phi.K), phi.N
    c = np.abs(phi.coeffs)
    tight: tuple[float, float] | None = None
    for k in range(K, N + 1):
        lhs = float(c[k + 1]) if k + 1 <= N else 0.0
        rhs = rho * float(c[k])
        if lhs > rhs * (1.0 + _REL_TOL):
            return CheckResult(
                "h1prime",
                FAIL,
                first_violation=k,
                lhs=lhs,
                rhs=rhs,
                note=f"|phi_(k+1)| exceeds rho*|phi_k| at k = {k}",
            )
        if tight is None or lhs - rhs > tight[0] - tight[1]:
            tight = (lhs, rhs)
    assert tight is not None
    return CheckResult("h1prime", PASS, lhs=tight[0], rhs=tight[1])


def _log_h2_product(p: float, base: float, q: float, gamma_den: float) -> tuple[float, str]:
    """log of base^p * (q/(2*gamma_den))^q with a zero exponent meaning 1.

    Returns +inf with a note when the denominator weight vanishes under a
    positive exponent (the product is ill-defined and the check must
    fail), and -inf when the product is zero or carries a negative
    factor and therefore can never attain the maximum.
    """
    if q < 0.0:
        return -math.inf, "negative-exponent factor; product skipped"
    if q > 0.0 and gamma_den == 0.0:
        return math.inf, "vanishing gamma in an active denominator"
    log_val = 0.0
    if q > 0.0:
        log_val += q * (math.log(q) - math.log(2.0) - math.log(gamma_den))
    if base == 0.0:
        return -math.inf, ""
    return log_val + p * math.log(base), ""


def check_h2(phi: PolynomialDensity) -> CheckResult:
    """Leading-coefficient size condition, branch chosen by K versus N.

    For K <= N - 1 two log-domain products are compared against
    (N-K+1)^{-(N-K+1)}; for K = N the single weight gamma_N is compared
    against 1/(2(N-2)^{(N-2)/2}). Zero-exponent factors count as 1; a
    vanishing gamma under a positive exponent in a denominator is
    reported as a fail with an explanatory note rather than an error.
    """
    if phi.is_gaussian:
        return CheckResult("h2", NOT_APPLICABLE, note="Gaussian density")
    g = gamma_table(phi)
    K, N = int(phi.K), phi.N
    if K == N:
        lhs = float(g[N])
        rhs = 1.0 / (2.0 * (N - 2.0) ** ((N - 2.0) / 2.0))
        status = PASS if lhs <= rhs * (1.0 + _REL_TOL) else FAIL
        return CheckResult("h2b", status, lhs=lhs, rhs=rhs)
    log1, note1 = _log_h2_product(N, 2.0 * (K + 1) * g[K + 1] / N, K - 1.0, float(g[N]))
    log2, note2 = _log_h2_product(
        N - 1.0, 2.0 * K * g[K] / (N - 1.0), K - 2.0, float(g[N - 1])
    )
    log_lhs = max(log1, log2)
    log_rhs = -(N - K + 1.0) * math.log(N - K + 1.0)
    note = "; ".join(n for n in (note1, note2) if n)
    lhs = math.exp(log_lhs) if log_lhs < 700.0 else math.inf
    rhs = math.exp(log_rhs)
    if math.isinf(log_lhs) and log_lhs > 0.0:
        return CheckResult("h2a", FAIL, lhs=math.inf, rhs=rhs, note=note)
    status = PASS if log_lhs <= log_rhs + _REL_TOL else FAIL
    return CheckResult("h2a", status, lhs=lhs, rhs=rhs, note=note)


def hypothesis_report(phi: PolynomialDensity) -> HypothesisReport:
    """Run every admissibility check on phi and bundle the outcomes."""
    threshold = a_phi(phi)
    if phi.is_gaussian:
        note = "Gaussian density"
        return HypothesisReport(
            a_phi=threshold,
            gammas={},
            C={},
            h1=CheckResult("h1", NOT_APPLICABLE, note=note),
            h1prime=CheckResult("h1prime", NOT_APPLICABLE, note=note),
            h2a=CheckResult("h2a", NOT_APPLICABLE, note=note),
            h2b=CheckResult("h2b", NOT_APPLICABLE, note=note),
            overall=True,
        )
    g = gamma_table(phi)
    K, N = int(phi.K), phi.N
    gammas = {k: float(g[k]) for k in range(K, N + 1)}
    weights = {k: c_factor(phi, k) for k in range(K, N + 1)}
    h1 = check_h1(phi)
    h1p = check_h1prime(phi)
    h2 = check_h2(phi)
    if h2.name == "h2b":
        h2a = CheckResult("h2a", NOT_APPLICABLE, note="requires K <= N - 1")
        h2b = h2
    else:
        h2a = h2
        h2b = CheckResult("h2b", NOT_APPLICABLE, note="requires K = N")
    overall = not (h1.failed or h2a.failed or h2b.failed)
    return HypothesisReport(
        a_phi=threshold,
        gammas=gammas,
        C=weights,
        h1=h1,
        h1prime=h1p,
        h2a=h2a,
        h2b=h2b,
        overall=overall,
    )


def d_phi(phi: PolynomialDensity, a: float) -> float:
    """Geometric defect sum_{k=K}^N |phi_k|/sqrt(k!)*(-2(K+N)(1+N/K)log a)^{k/2}.

    Continuous and strictly decreasing in a on (0, 1) with limit 0 at 1;
    identically 0 for the Gaussian.
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if phi.is_gaussian:
        return 0.0
    K, N = int(phi.K), phi.N
    base = -2.0 * (K + N) * (1.0 + phi.N / phi.K) * math.log(a)
    total = 0.0
    for k in range(K, N + 1):
        weight = abs(phi.coeffs[k]) / math.sqrt(math.factorial(k))
        total += weight * base ** (k / 2.0)
    return total


def d_phi_gamma_form(phi: PolynomialDensity, a: float) -> float:
    """Equivalent form sum_{k=K}^N gamma_k*(-2(K+N)log a)^{k/2} of d_phi."""
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if phi.is_gaussian:
        return 0.0
    g = gamma_table(phi)
    K, N = int(phi.K), phi.N
    base = -2.0 * (K + N) * math.log(a)
    return float(sum(g[k] * base ** (k / 2.0) for k in range(K, N + 1)))


def d_phi_limit(phi: PolynomialDensity) -> float:
    """Limit of |log a|^{-K/2}*d_phi(a) as a -> 1: gamma_K*(2(K+N))^{K/2}."""
    if phi.is_gaussian:
        return 0.0
    g = gamma_table(phi)
    K, N = int(phi.K), phi.N
    return float(g[K] * (2.0 * (K + N)) ** (K / 2.0))


def h_function(phi: PolynomialDensity, u):
    """Row-sum majorant h(u) = e^{-u}*(1 + sum_{k=K}^N gamma_k*(2u)^{k/2}).

    Accepts a scalar or an array of nonnegative u. Non-increasing on
    [0, inf) whenever the full admissibility report passes.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("u must be nonnegative")
    poly = np.ones_like(arr)
    if not phi.is_gaussian:
        g = gamma_table(phi)
        for k in range(int(phi.K), phi.N + 1):
            poly = poly + g[k] * (2.0 * arr) ** (k / 2.0)
    out = np.exp(-arr) * poly
    if arr.ndim == 0:
        return float(out)
    return out


def lemma_polynom_predicate(m: int, q: int, alpha: float, beta: float) -> bool:
    """Whether -alpha*x^m + beta*x^q - 1 <= 0 holds on all of [0, inf).

    Equivalent to (beta/m)^m*(q/alpha)^q <= (m-q)^{-(m-q)}, evaluated as
    a sum of logarithms. Requires m > q >= 1 and positive alpha, beta.
    """
    if not m > q >= 1:
        raise ValueError(f"need m > q >= 1, got m = {m}, q = {q}")
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("alpha and beta must be positive")
    log_lhs = m * (math.log(beta) - math.log(m)) + q * (math.log(q) - math.log(alpha))
    log_rhs = -(m - q) * math.log(m - q)
    return log_lhs <= log_rhs + _REL_TOL


def double_prod_check(K: int, N: int, i: int, k: int, l: int, a: float) -> bool:
    """Two-sided binomial inequality behind the off-diagonal row bounds.

    Checks, with C_j = (1+N/K)^{j/2} and [..] the indicator,

        a^{-i}*C(k+l,k)^{1/2}*C(k+l,k+i)^{1/2}*[l >= i+K]
          + a^{i}*C(k+l+i,k)^{1/2}*C(k+l+i,k+i)^{1/2}
        <= 2*C_k*C_{k+i}*C(k+l,k)^{1/2}*C(k+l+i,k+i)^{1/2}

    for 0 <= k <= N-1, K <= i+k <= N, 1 <= i <= N, l >= K, and a inside
    the contraction range ((1+N/K)^{-1/4}, 1).
    """
    if not 0 <= k <= N - 1:
        raise PreconditionViolated(f"need 0 <= k <= N-1, got k = {k}, N = {N}")
    if not K <= i + k <= N:
        raise PreconditionViolated(f"need K <= i+k <= N, got i+k = {i + k}")
    if not 1 <= i <= N:
        raise PreconditionViolated(f"need 1 <= i <= N, got i = {i}")
    if l < K:
        raise PreconditionViolated(f"need l >= K, got l = {l}, K = {K}")
    threshold = (1.0 + N / K) ** -0.25
    if not threshold < a < 1.0:
        raise PreconditionViolated(f"need a in ({threshold:.6g}, 1), got {a}")
    log_a = math.log(a)
    lhs = math.exp(i * log_a + 0.5 * (log_binomial(k + l + i, k) + log_binomial(k + l + i, k + i)))
    if l >= i + K:
        lhs += math.exp(-i * log_a + 0.5 * (log_binomial(k + l, k) + log_binomial(k + l, k + i)))
    log_weight = 0.5 * (2 * k + i) * math.log1p(N / K)
    rhs = math.exp(
        math.log(2.0) + log_weight + 0.5 * (log_binomial(k + l, k) + log_binomial(k + l + i, k + i))
    )
    return lhs <= rhs * (1.0 + _REL_TOL)
