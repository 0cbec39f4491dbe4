"""Tests for the quadrature and Monte Carlo cross-check oracles."""

import math
from pathlib import Path

import numpy as np
import pytest

from hermclt.clt import InnovationSchedule, run_chain
from hermclt.density import build_density, load_density
from hermclt.errors import OrderTooSmall
from hermclt.hermite import eval_series
from hermclt.operators import adjoint_convolve, build_q_matrix
from hermclt.oracle import (
    compare_mc,
    mc_coefficients,
    q_matrix_comparisons,
    qstar_suite,
    quadrature_q,
    quadrature_qstar,
)

DENSITY_DIR = Path(__file__).resolve().parent.parent / "densities"


def corpus(name):
    return load_density(DENSITY_DIR / f"{name}.json")


def test_quadrature_qstar_frozen_point():
    phi = corpus("quartic025")
    value = quadrature_qstar(phi.coeffs, phi, 0.3, -4.0, 12)
    assert value == pytest.approx(7.9205031245092243, rel=1e-12)


def test_quadrature_qstar_matches_spectral_map():
    phi = corpus("mixed24")
    f = phi.coeffs
    xs = np.linspace(-4.0, 4.0, 17)
    for a in (0.3, 0.6, 0.9):
        direct = np.array([quadrature_qstar(f, phi, a, x, 16) for x in xs])
        spectral = eval_series(adjoint_convolve(f, phi.coeffs, a), xs)
        np.testing.assert_allclose(direct, spectral, atol=1e-12)


def test_quadrature_q_matches_forward_matrix():
    phi = corpus("quartic025")
    a = 0.6
    f = np.array([1.0, 0.0, 0.0, 0.0, 0.25, 0.0, -0.1])
    xs = np.linspace(-3.0, 3.0, 9)
    dense = build_q_matrix(phi, a, 16).matrix
    padded = np.zeros(16)
    padded[: f.size] = f
    spectral = eval_series(dense @ padded, xs)
    direct = np.array([quadrature_q(f, phi, a, x, 16) for x in xs])
    np.testing.assert_allclose(direct, spectral, atol=1e-12)


def test_quadrature_order_guard():
    phi = corpus("quartic025")
    with pytest.raises(OrderTooSmall):
        quadrature_qstar(phi.coeffs, phi, 0.5, 0.0, 2)


def test_qstar_suite_passes_for_corpus():
    for name in ("gauss", "x2", "quartic025"):
        phi = corpus(name)
        for a in (0.3, 0.6, 0.9):
            comparisons = qstar_suite(phi.coeffs, phi, a)
            assert len(comparisons) == 21
            assert all(c.passed for c in comparisons), f"{name} at a={a}"
            assert max(c.abs_diff for c in comparisons) < 1e-12


def test_quadrature_oracle_distinguishes_wrong_operator():
    phi = corpus("quartic025")
    f = phi.coeffs
    broken = adjoint_convolve(f, phi.coeffs, 0.6)
    broken[4] = -broken[4]
    xs = np.linspace(-4.0, 4.0, 21)
    diffs = [
        abs(float(eval_series(broken, x)) - quadrature_qstar(f, phi, 0.6, float(x), 16))
        for x in xs
    ]
    assert max(diffs) > 1e-2


def test_q_matrix_comparisons_pass():
    for name in ("gauss", "x2", "quartic025"):
        phi = corpus(name)
        for a in (0.3, 0.6, 0.9):
            comparisons = q_matrix_comparisons(phi, a, 10)
            assert len(comparisons) == 121
            assert all(c.passed for c in comparisons), f"{name} at a={a}"


def test_mc_deterministic_for_fixed_seed():
    phi = corpus("quartic025")
    first = mc_coefficients(phi, 2, 6, 20_000, seed=9)
    second = mc_coefficients(phi, 2, 6, 20_000, seed=9)
    np.testing.assert_array_equal(first.means, second.means)
    np.testing.assert_array_equal(first.ses, second.ses)
    third = mc_coefficients(phi, 2, 6, 20_000, seed=10)
    assert not np.array_equal(first.means, third.means)


def test_mc_requires_enough_replications():
    phi = corpus("quartic025")
    with pytest.raises(ValueError):
        mc_coefficients(phi, 2, 6, 5_000, seed=0)


def test_mc_matches_chain_reference():
    phi = corpus("quartic025")
    estimates = mc_coefficients(phi, 2, 8, 100_000, seed=0)
    trajectory = run_chain(phi, 2, with_envelope=False)
    comparisons = compare_mc(estimates, trajectory.coeffs[1], factor=5.0)
    assert len(comparisons) == 9
    assert all(c.passed for c in comparisons)


def test_mc_gaussian_innovation():
    phi = build_density([1.0])
    estimates = mc_coefficients(phi, 5, 6, 50_000, seed=4)
    comparisons = compare_mc(estimates, np.array([1.0]), factor=5.0)
    assert all(c.passed for c in comparisons)
    assert estimates.means[0] == pytest.approx(1.0, rel=1e-15)


def test_mc_round_robin_schedule():
    schedule = InnovationSchedule.round_robin(
        [corpus("quartic025"), corpus("mixed24")]
    )
    estimates = mc_coefficients(schedule, 3, 6, 50_000, seed=2)
    trajectory = run_chain(schedule, 3, with_envelope=False)
    comparisons = compare_mc(estimates, trajectory.coeffs[2], factor=5.0)
    assert all(c.passed for c in comparisons)


def test_compare_mc_pads_missing_reference():
    phi = corpus("quartic025")
    estimates = mc_coefficients(phi, 2, 8, 20_000, seed=1)
    short_reference = np.array([1.0, 0.0, 0.0, 0.0, 0.125])
    comparisons = compare_mc(estimates, short_reference, factor=5.0)
    assert len(comparisons) == 9
    assert comparisons[8].spectral == 0.0


def test_mc_standard_errors_shrink():
    phi = corpus("quartic025")
    small = mc_coefficients(phi, 2, 4, 10_000, seed=3)
    large = mc_coefficients(phi, 2, 4, 160_000, seed=3)
    assert np.all(large.ses[1:] < small.ses[1:])
