"""Renormalized-sum chain: exact trajectories, proof envelope, rate fit.

The density of Y_n = (X_1 + ... + X_n)/sqrt(n) obeys the recursion
f_{n+1} = K_{a_{n+1}}(f_n, phi_{n+1}) with a_{n+1} = sqrt(1 - 1/(n+1)),
which in the coefficient domain is one banded adjoint application per
step. run_chain iterates it exactly (up to monitored truncation),
theorem1_envelope evaluates the recursive bound

    E_n = c_n E_{n-1} + d_n,   c_n = (1-1/n)^{(r+1)/2} max_j (1+d_phi_j(a_n)),
                               d_n = n^{-(r+1)/2} max_j chi2(phi_j),

seeded with the exact chi2(f_{n0-1}), and fit_rate extracts the log-log
slope whose target is -(r-1)/2. Schedules cover the constant,
round-robin, and explicit-assignment innovation patterns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bounds import BoundCheck, er_inequality
from .density import PolynomialDensity
from .errors import (
    BarycenterOutOfRange,
    DegenerateWindow,
    DimensionTooSmall,
    HypothesisNotSatisfied,
    PreconditionViolated,
    RateNotApplicable,
)
from .hermite import chi_square
from .hypothesis import a_phi, d_phi, hypothesis_report
from .operators import D_MAX, UNDERFLOW_FLOOR, adjoint_convolve

__all__ = [
    "ChainTrajectory",
    "DiagnosticsReport",
    "InnovationSchedule",
    "RateFit",
    "default_window",
    "er_margins",
    "fit_rate",
    "mass_and_moment_diagnostics",
    "n_zero",
    "run_chain",
    "scaled_chi2",
    "theorem1_envelope",
]

_DIAG_TOL = 1e-12
_TAIL_REL_TOL = 1e-12


@dataclass(frozen=True)
class InnovationSchedule:
    """Assignment of an innovation density to every step index i >= 1.

    assignment is "constant" (single density), "round-robin" (cycle
    through the list), or an explicit tuple of density indices applied
    cyclically.
    """

    densities: tuple[PolynomialDensity, ...]
    assignment: str | tuple[int, ...] = "constant"

    def __post_init__(self) -> None:
        if len(self.densities) == 0:
            raise ValueError("schedule needs at least one density")
        if isinstance(self.assignment, str):
            if self.assignment not in ("constant", "round-robin"):
                raise ValueError(f"unknown assignment rule {self.assignment!r}")
            if self.assignment == "constant" and len(self.densities) != 1:
                raise ValueError("constant assignment takes exactly one density")
        else:
            idx = tuple(self.assignment)
            if len(idx) == 0:
                raise ValueError("explicit assignment needs at least one index")
            for j in idx:
                if not 0 <= j < len(self.densities):
                    raise ValueError(f"assignment index {j} out of range")
            object.__setattr__(self, "assignment", idx)

    @classmethod
    def constant(cls, phi: PolynomialDensity) -> InnovationSchedule:
        return cls(densities=(phi,), assignment="constant")

    @classmethod
    def round_robin(cls, densities) -> InnovationSchedule:
        return cls(densities=tuple(densities), assignment="round-robin")

    def density_at(self, i: int) -> PolynomialDensity:
        """Innovation density for step i >= 1."""
        if i < 1:
            raise ValueError(f"step index must be >= 1, got {i}")
        if self.assignment == "constant":
            return self.densities[0]
        if self.assignment == "round-robin":
            return self.densities[(i - 1) % len(self.densities)]
        idx = self.assignment[(i - 1) % len(self.assignment)]
        return self.densities[idx]

    @property
    def max_degree(self) -> int:
        return max(d.N for d in self.densities)


def _as_schedule(schedule) -> InnovationSchedule:
    if isinstance(schedule, InnovationSchedule):
        return schedule
    if isinstance(schedule, PolynomialDensity):
        return InnovationSchedule.constant(schedule)
    raise TypeError(f"expected a schedule or density, got {type(schedule).__name__}")


@dataclass
class ChainTrajectory:
    """Exact chain record: one row per step n = 1..n_max.

    coeffs keeps the (possibly truncated) expansion of every f_n and is
    deliberately mutable so tests can inject faults. envelope entries
    are nan where the recursive bound is undefined or suppressed.
    """

    schedule: InnovationSchedule
    n: np.ndarray
    a: np.ndarray
    chi2: np.ndarray
    envelope: np.ndarray
    tail_dropped: np.ndarray
    coeffs: list[np.ndarray]
    n0: int
    notes: list[str] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return int(self.n[-1])


def n_zero(schedule) -> int:
    """First step index where the contraction argument engages:
    max_j ceil(1/(1 - a_phi_j^2)), at least 2."""
    sched = _as_schedule(schedule)
    worst = 2
    for dens in sched.densities:
        thr = a_phi(dens)
        worst = max(worst, math.ceil(1.0 / (1.0 - thr * thr)))
    return worst


def _shared_rate_order(sched: InnovationSchedule) -> float:
    """Common matched-moment order of the schedule (inf if all Gaussian)."""
    finite = sorted({int(d.r) for d in sched.densities if not d.is_gaussian})
    if not finite:
        return math.inf
    if len(finite) > 1:
        raise RateNotApplicable(
            f"schedule mixes matched-moment orders {finite}; the rate bound needs one"
        )
    return float(finite[0])


def run_chain(schedule, n_max: int, dim: int | None = None, with_envelope: bool = True) -> ChainTrajectory:
    """Iterate the exact coefficient recursion up to step n_max.

    dim caps the coefficient count per step (default min(n_max*N+1,
    512)); mass dropped beyond the cap is recorded per step as a
    relative l2 amount and flagged in notes when it exceeds 1e-12.
    Underflowing entries below 1e-300 are zeroed. The envelope is
    attached when the rate machinery applies, otherwise suppressed with
    a note.
    """
    sched = _as_schedule(schedule)
    if n_max < 2:
        raise PreconditionViolated(f"n_max must be >= 2, got {n_max}")
    n_top = sched.max_degree
    needed = min(n_max * n_top + 1, D_MAX)
    if dim is None:
        dim = needed
    elif dim < needed:
        raise DimensionTooSmall(f"dim must be >= {needed}, got {dim}")

    first = sched.density_at(1)
    f = np.array(first.coeffs, dtype=float)
    coeffs_list = [f]
    chi2s = [first.chi2]
    a_vals = [0.0]
    tails = [0.0]
    notes: list[str] = []
    for step in range(2, n_max + 1):
        phi_step = sched.density_at(step)
        a_step = math.sqrt(1.0 - 1.0 / step)
        out = adjoint_convolve(f, phi_step.coeffs, a_step)
        dropped = 0.0
        if out.size > dim:
            cut = out[dim:]
            dropped = math.sqrt(float(np.sum(cut * cut)))
            out = np.array(out[:dim])
        out[np.abs(out) < UNDERFLOW_FLOOR] = 0.0
        total = math.sqrt(float(np.sum(out * out)))
        rel = dropped / total if total > 0.0 else 0.0
        if rel >= _TAIL_REL_TOL:
            notes.append(f"step {step}: truncated relative tail {rel:.3e} at cap {dim}")
        f = out
        coeffs_list.append(f)
        chi2s.append(chi_square(f))
        a_vals.append(a_step)
        tails.append(rel)

    traj = ChainTrajectory(
        schedule=sched,
        n=np.arange(1, n_max + 1),
        a=np.array(a_vals),
        chi2=np.array(chi2s),
        envelope=np.full(n_max, np.nan),
        tail_dropped=np.array(tails),
        coeffs=coeffs_list,
        n0=n_zero(sched),
        notes=notes,
    )
    if with_envelope:
        try:
            traj.envelope = theorem1_envelope(sched, n_max, trajectory=traj)
        except (RateNotApplicable, HypothesisNotSatisfied) as exc:
            traj.notes.append(f"envelope suppressed: {exc}")
    return traj


def theorem1_envelope(schedule, n_max: int, trajectory: ChainTrajectory | None = None) -> np.ndarray:
    """Recursive chain bound, aligned with steps 1..n_max (nan below n0-1).

    Seeds with the exact chi2(f_{n0-1}) (from the supplied trajectory,
    or a fresh short chain) and then applies E_n = c_n E_{n-1} + d_n
    with the max-form constants over the schedule's densities. Requires
    a common matched order r >= 2 and every density to pass its
    admissibility report.
    """
    sched = _as_schedule(schedule)
    r_env = _shared_rate_order(sched)
    if r_env < 2:
        raise RateNotApplicable(
            f"matched-moment order r = {r_env:g} is below 2; the rate bound needs r >= 2"
        )
    for dens in sched.densities:
        if not hypothesis_report(dens).overall:
            raise HypothesisNotSatisfied("a scheduled density fails its admissibility report")
    n0 = n_zero(sched)
    env = np.full(n_max, np.nan)
    if n0 - 1 > n_max:
        return env
    if trajectory is None:
        trajectory = run_chain(sched, max(n0 - 1, 2), with_envelope=False)
    if len(trajectory.chi2) < n0 - 1:
        raise ValueError(f"trajectory too short to seed the envelope at step {n0 - 1}")
    seed = float(trajectory.chi2[n0 - 2])
    env[n0 - 2] = seed
    chi_max = max(d.chi2 for d in sched.densities)
    running = seed
    for n in range(n0, n_max + 1):
        a_n = math.sqrt(1.0 - 1.0 / n)
        defect = max(1.0 + d_phi(dens, a_n) for dens in sched.densities)
        c_n = (1.0 - 1.0 / n) ** ((r_env + 1.0) / 2.0) * defect
        d_n = n ** (-(r_env + 1.0) / 2.0) * chi_max
        running = c_n * running + d_n
        env[n - 1] = running
    return env


class RateFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


def fit_rate(trajectory: ChainTrajectory, n_lo: int, n_hi: int) -> RateFit:
    """Least-squares slope of log chi2 against log n over [n_lo, n_hi].

    The slope estimates -(r-1)/2. Raises DegenerateWindow when any
    chi2 on the window vanishes or underflows.
    """
    if not 1 <= n_lo < n_hi <= trajectory.n_max:
        raise ValueError(f"need 1 <= n_lo < n_hi <= {trajectory.n_max}, got [{n_lo}, {n_hi}]")
    window = trajectory.chi2[n_lo - 1 : n_hi]
    if not np.all(np.isfinite(window)) or np.any(window <= 0.0):
        raise DegenerateWindow("chi2 must be positive and finite over the fit window")
    xs = np.log(np.arange(n_lo, n_hi + 1, dtype=float))
    ys = np.log(window)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((np.polyval([slope, intercept], xs) - ys) ** 2)))
    return RateFit(float(slope), float(intercept), resid)


def default_window(schedule, n_max: int) -> tuple[int, int]:
    """Fit window [max(20, 2*n0), min(200, n_max)] clear of transients."""
    lo = max(20, 2 * n_zero(schedule))
    hi = min(200, n_max)
    if hi <= lo:
        raise DegenerateWindow(f"window [{lo}, {hi}] is empty; increase n_max")
    return lo, hi


def scaled_chi2(trajectory: ChainTrajectory, r: float) -> np.ndarray:
    """n^{(r-1)/2} chi2(f_n) for every step: bounded iff the rate holds."""
    return trajectory.n.astype(float) ** ((r - 1.0) / 2.0) * trajectory.chi2


def er_margins(trajectory: ChainTrajectory) -> list[tuple[int, BoundCheck]]:
    """Per-step contraction checks (step index, BoundCheck).

    Step s checks chi2 of Q*[f_{s-1}] against the one-step bound for the
    innovation at s. Steps whose innovation is Gaussian, fails its
    admissibility report, or has a_s at or below its threshold are
    skipped, matching the inequality's domain.
    """
    out: list[tuple[int, BoundCheck]] = []
    for s in range(2, trajectory.n_max + 1):
        phi_s = trajectory.schedule.density_at(s)
        if phi_s.is_gaussian:
            continue
        a_s = float(trajectory.a[s - 1])
        if a_s <= a_phi(phi_s):
            continue
        try:
            check = er_inequality(trajectory.coeffs[s - 2], phi_s, a_s)
        except (HypothesisNotSatisfied, BarycenterOutOfRange):
            continue
        out.append((s, check))
    return out


@dataclass(frozen=True)
class DiagnosticsReport:
    """Mass and matched-moment conservation audit of a trajectory."""

    mass_ok: bool
    moments_ok: bool
    max_mass_error: float
    max_moment_error: float
    first_failure: tuple[int, int] | None

    @property
    def ok(self) -> bool:
        return self.mass_ok and self.moments_ok


def mass_and_moment_diagnostics(trajectory: ChainTrajectory) -> DiagnosticsReport:
    """Check f_{n,0} = 1 and f_{n,k} = 0 for 1 <= k <= r at every step.

    The convolution index structure preserves both exactly; any drift
    beyond 1e-12 indicates a fault. first_failure is the first (step,
    coefficient index) pair that trips.
    """
    finite = [int(d.r) for d in trajectory.schedule.densities if not d.is_gaussian]
    r_eff = min(finite) if finite else 0
    max_mass = 0.0
    max_moment = 0.0
    first: tuple[int, int] | None = None
    for idx, f in enumerate(trajectory.coeffs):
        step = idx + 1
        mass_err = abs(float(f[0]) - 1.0)
        max_mass = max(max_mass, mass_err)
        if mass_err > _DIAG_TOL and first is None:
            first = (step, 0)
        top = min(r_eff, f.size - 1)
        for k in range(1, top + 1):
            err = abs(float(f[k]))
            max_moment = max(max_moment, err)
            if err > _DIAG_TOL and first is None:
                first = (step, k)
    return DiagnosticsReport(
        mass_ok=max_mass <= _DIAG_TOL,
        moments_ok=max_moment <= _DIAG_TOL,
        max_mass_error=max_mass,
        max_moment_error=max_moment,
        first_failure=first,
    )
