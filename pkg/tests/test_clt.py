"""Tests for the renormalized-sum chain, envelope, and rate fitting."""

import math
from fractions import Fraction
from math import factorial
from pathlib import Path

import numpy as np
import pytest

from hermclt.clt import (
    ChainTrajectory,
    InnovationSchedule,
    default_window,
    er_margins,
    fit_rate,
    mass_and_moment_diagnostics,
    n_zero,
    run_chain,
    scaled_chi2,
    theorem1_envelope,
)
from hermclt.density import build_density, load_density
from hermclt.errors import (
    DegenerateWindow,
    DimensionTooSmall,
    HypothesisNotSatisfied,
    PreconditionViolated,
    RateNotApplicable,
)
from hermclt.hermite import to_monomial
from hermclt.hypothesis import d_phi

DENSITY_DIR = Path(__file__).resolve().parent.parent / "densities"


def corpus(name):
    return load_density(DENSITY_DIR / f"{name}.json")


def test_schedule_constant_and_round_robin():
    q = corpus("quartic025")
    m = corpus("mixed24")
    const = InnovationSchedule.constant(q)
    assert const.density_at(1) is q
    assert const.density_at(57) is q
    rr = InnovationSchedule.round_robin([q, m])
    assert rr.density_at(1) is q
    assert rr.density_at(2) is m
    assert rr.density_at(3) is q
    assert rr.max_degree == 4


def test_schedule_validation():
    q = corpus("quartic025")
    m = corpus("mixed24")
    with pytest.raises(ValueError):
        InnovationSchedule(())
    with pytest.raises(ValueError):
        InnovationSchedule((q, m), "constant")
    with pytest.raises(ValueError):
        InnovationSchedule((q,), (0, 1))
    explicit = InnovationSchedule((q, m), (0, 0, 1))
    assert explicit.density_at(3) is m


def test_n_zero_values():
    assert n_zero(corpus("quartic025")) == 4
    assert n_zero(corpus("x2")) == 4
    assert n_zero(corpus("mixed24")) == 3
    assert n_zero(corpus("cubic6")) == 3
    assert n_zero(build_density([1.0])) == 2
    rr = InnovationSchedule.round_robin([corpus("quartic025"), corpus("mixed24")])
    assert n_zero(rr) == 4


def test_chain_first_steps_closed_form():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 10)
    assert trajectory.n[0] == 1
    assert trajectory.chi2[0] == pytest.approx(0.25, rel=1e-15)
    f2 = trajectory.coeffs[1]
    assert f2[4] == pytest.approx(0.125, rel=1e-14)
    assert f2[8] == pytest.approx(0.03268203228648735, rel=1e-13)
    expected = math.sqrt(0.125**2 + 70.0 * 0.25**4 / 256.0)
    assert trajectory.chi2[1] == pytest.approx(expected, rel=1e-14)
    assert trajectory.chi2[1] == pytest.approx(0.12920183912922834, rel=1e-14)


def test_chain_moment_normalization_exact():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 30)
    for f in trajectory.coeffs:
        assert f[0] == 1.0
        np.testing.assert_array_equal(f[1 : min(4, f.size)], 0.0)
    diag = mass_and_moment_diagnostics(trajectory)
    assert diag.ok
    assert diag.max_mass_error == 0.0


def test_chain_barycenters():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 5)
    np.testing.assert_allclose(
        trajectory.a, [0.0] + [math.sqrt(1.0 - 1.0 / n) for n in range(2, 6)], rtol=1e-15
    )


def test_chain_against_exact_moment_oracle():
    """Three-fold sum of the quadratic innovation, by exact moment algebra.

    The innovation has density x^2 phi, whose raw moments are odd double
    factorials. The coefficients of the renormalized three-fold sum follow
    from multinomial moment expansion, fully independent of the operator
    path.
    """

    def double_factorial(k):
        out = 1
        while k > 1:
            out *= k
            k -= 2
        return out

    mu = [
        Fraction(double_factorial(m + 1)) if m % 2 == 0 else Fraction(0)
        for m in range(25)
    ]

    def s3_moment(m):
        total = Fraction(0)
        for i in range(m + 1):
            for j in range(m - i + 1):
                l = m - i - j
                weight = Fraction(factorial(m), factorial(i) * factorial(j) * factorial(l))
                total += weight * mu[i] * mu[j] * mu[l]
        return total

    trajectory = run_chain(corpus("x2"), 3, with_envelope=False)
    f3 = trajectory.coeffs[2]
    assert f3.size == 7, "degree of the three-fold quadratic sum is exactly six"
    for k in range(7):
        basis = np.zeros(k + 1)
        basis[k] = 1.0
        expected = sum(
            cm * float(s3_moment(m)) / 3.0 ** (m / 2.0)
            for m, cm in enumerate(to_monomial(basis))
            if cm != 0.0
        )
        assert f3[k] == pytest.approx(expected, abs=1e-13)


def test_quadratic_innovation_keeps_second_coefficient():
    trajectory = run_chain(corpus("x2"), 50, with_envelope=False)
    assert trajectory.coeffs[49][2] == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert trajectory.chi2[49] > trajectory.chi2[9], "no contraction without the decay checks"


def test_envelope_seeded_and_recursive():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 10)
    assert trajectory.n0 == 4
    assert np.isnan(trajectory.envelope[0])
    assert np.isnan(trajectory.envelope[1])
    assert trajectory.envelope[2] == pytest.approx(trajectory.chi2[2], rel=1e-15)
    a4 = math.sqrt(0.75)
    expected_e4 = (0.75**2) * (1.0 + d_phi(phi, a4)) * trajectory.chi2[2] + 0.25 / 16.0
    assert trajectory.envelope[3] == pytest.approx(expected_e4, rel=1e-14)
    assert trajectory.envelope[3] == pytest.approx(0.11588934208975132, rel=1e-14)


def test_envelope_dominates_chain():
    cases = [
        corpus("quartic025"),
        corpus("quartic020"),
        InnovationSchedule.round_robin([corpus("quartic025"), corpus("quartic020")]),
    ]
    for case in cases:
        trajectory = run_chain(case, 150)
        tail = slice(trajectory.n0 - 1, None)
        assert np.all(
            trajectory.envelope[tail] * (1.0 + 1e-12) >= trajectory.chi2[tail]
        )


def test_envelope_gaussian_is_zero():
    trajectory = run_chain(build_density([1.0]), 10)
    assert np.all(trajectory.chi2 == 0.0)
    np.testing.assert_array_equal(trajectory.envelope[trajectory.n0 - 1 :], 0.0)


def test_envelope_refuses_low_rate_order():
    with pytest.raises(RateNotApplicable):
        theorem1_envelope(corpus("x2"), 20)


def test_envelope_refuses_unverified_density():
    with pytest.raises(HypothesisNotSatisfied):
        theorem1_envelope(corpus("quartic050"), 20)


def test_envelope_suppression_recorded_in_notes():
    trajectory = run_chain(corpus("x2"), 10)
    assert np.all(np.isnan(trajectory.envelope))
    assert any("envelope suppressed" in note for note in trajectory.notes)


def test_envelope_mixed_rate_orders_not_applicable():
    schedule = InnovationSchedule.round_robin([corpus("quartic025"), corpus("cubic6")])
    with pytest.raises(RateNotApplicable):
        theorem1_envelope(schedule, 20)


def test_run_chain_guards():
    phi = corpus("quartic025")
    with pytest.raises(PreconditionViolated):
        run_chain(phi, 1)
    with pytest.raises(DimensionTooSmall):
        run_chain(phi, 20, dim=12)


def test_truncation_mass_recorded_but_small():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 200)
    assert trajectory.tail_dropped.max() > 0.0
    assert trajectory.tail_dropped.max() < 1e-100
    assert not any("truncation" in note for note in trajectory.notes)


def test_fit_rate_quartic_slope():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 200)
    fit = fit_rate(trajectory, 20, 200)
    assert fit.slope == pytest.approx(-1.0003076634141912, rel=1e-10)
    assert -1.15 <= fit.slope <= -0.90
    assert fit.residual < 0.01


def test_fit_rate_synthetic_power_law():
    n = np.arange(1, 101)
    chi2 = 3.0 * n**-1.5
    trajectory = ChainTrajectory(
        schedule=InnovationSchedule.constant(corpus("quartic025")),
        n=n,
        a=np.sqrt(1.0 - 1.0 / n),
        chi2=chi2,
        envelope=np.full(100, np.nan),
        tail_dropped=np.zeros(100),
        coeffs=[],
        n0=2,
        notes=[],
    )
    fit = fit_rate(trajectory, 10, 100)
    assert fit.slope == pytest.approx(-1.5, rel=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)


def test_fit_rate_window_validation():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 50)
    with pytest.raises(ValueError):
        fit_rate(trajectory, 30, 20)
    with pytest.raises(ValueError):
        fit_rate(trajectory, 10, 80)


def test_fit_rate_degenerate_on_zero_chain():
    trajectory = run_chain(build_density([1.0]), 50)
    with pytest.raises(DegenerateWindow):
        fit_rate(trajectory, 10, 50)


def test_default_window():
    phi = corpus("quartic025")
    assert default_window(phi, 200) == (20, 200)
    assert default_window(phi, 320) == (20, 200)
    assert default_window(phi, 30) == (20, 30)
    with pytest.raises(DegenerateWindow):
        default_window(phi, 15)


def test_scaled_chi2_flat_for_quartic():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 200)
    scaled = scaled_chi2(trajectory, 3.0)
    window = scaled[19:200]
    assert window.max() / window.min() < 1.3
    assert scaled[3:].max() == pytest.approx(0.2550214212624286, rel=1e-10)
    assert window.max() == pytest.approx(0.25031045429026283, rel=1e-10)


def test_round_robin_chain_rate():
    schedule = InnovationSchedule.round_robin(
        [corpus("quartic025"), corpus("quartic020")]
    )
    trajectory = run_chain(schedule, 200)
    fit = fit_rate(trajectory, 20, 200)
    assert -1.15 <= fit.slope <= -0.90
    tail = slice(trajectory.n0 - 1, None)
    assert np.all(trajectory.envelope[tail] * (1.0 + 1e-12) >= trajectory.chi2[tail])


def test_er_margins_all_hold_for_certified_density():
    phi = corpus("quartic025")
    trajectory = run_chain(phi, 60)
    margins = er_margins(trajectory)
    assert len(margins) == 57, "steps from n0 onward once a exceeds the threshold"
    assert all(check.holds for _, check in margins)


def test_er_margins_skip_uncertified():
    trajectory = run_chain(corpus("x2"), 30, with_envelope=False)
    assert er_margins(trajectory) == []
