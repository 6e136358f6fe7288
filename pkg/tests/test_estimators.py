"""
Tests for the robust mean estimators and the minimum-distance fit.
"""

import math

import numpy as np
import pytest
from scipy.optimize import linprog, minimize

from htb.algorithms.estimators import (
    ArmEstimates,
    TruncationConfig,
    deviation_bound,
    fit_in_value_space,
    fit_objective,
    ips_samples,
    median_of_means,
    min_distance_fit,
    mom_blocks,
    robust_mean,
    truncated_mean,
    truncation_threshold,
)
from htb.core.context import make_generator
from htb.core.enums import EstimatorKind, NoiseKind
from htb.core.errors import DomainError
from htb.core.models import ActionSet, NoiseSpec
from htb.environments.noise import noise_moment, sample_noise


# ==================== TRUNCATED MEAN ====================


def test_truncated_mean_without_truncation_is_the_mean():
    cfg = TruncationConfig(u=1e6, epsilon=1.0, delta=0.5)
    assert truncated_mean([1.0, 2.0, 3.0], cfg) == pytest.approx(2.0)


def test_truncated_mean_zeroes_large_samples():
    cfg = TruncationConfig(u=1.0, epsilon=1.0, delta=math.exp(-1))
    assert truncation_threshold(cfg, 4) == pytest.approx(2.0)
    assert truncated_mean([1.0, 3.0, 1.0, 3.0], cfg) == pytest.approx(0.5)


def test_truncated_mean_of_zeros():
    assert truncated_mean(np.zeros(10), TruncationConfig(u=1.0, epsilon=0.5, delta=0.1)) == 0.0


def test_truncated_mean_errors():
    cfg = TruncationConfig(u=1.0, epsilon=1.0, delta=0.1)
    with pytest.raises(DomainError):
        truncated_mean([], cfg)
    with pytest.raises(ValueError):
        TruncationConfig(u=1.0, epsilon=1.0, delta=1.0)
    with pytest.raises(ValueError):
        TruncationConfig(u=1.0, epsilon=1.0, delta=0.0)


def test_truncated_mean_matches_mean_below_threshold(rng):
    cfg = TruncationConfig(u=4.0, epsilon=0.5, delta=0.05)
    samples = rng.uniform(-1.0, 1.0, size=50)
    assert np.abs(samples).max() <= truncation_threshold(cfg, samples.size)
    assert truncated_mean(samples, cfg) == pytest.approx(samples.mean())


# ==================== MEDIAN OF MEANS ====================


def test_median_of_means_single_block():
    assert mom_blocks(3, 0.9) == 1
    assert median_of_means([1.0, 2.0, 3.0], 0.9) == pytest.approx(2.0)


def test_median_of_means_three_blocks():
    assert mom_blocks(6, 0.7) == 3
    assert median_of_means([0, 0, 0, 0, 100, 100], 0.7) == 0.0


def test_median_of_means_constant_samples():
    for delta in (0.9, 0.3, 1e-6):
        assert median_of_means([2.5] * 40, delta) == pytest.approx(2.5)


def test_mom_blocks_clipped_to_sample_count():
    assert mom_blocks(2, 1e-6) == 2
    with pytest.raises(DomainError):
        mom_blocks(10, 1.5)


def test_robust_mean_dispatch():
    cfg = TruncationConfig(u=1e6, epsilon=1.0, delta=0.9)
    samples = [1.0, 2.0, 6.0]
    assert robust_mean(EstimatorKind.TRUNCATED_MEAN, samples, cfg) == pytest.approx(3.0)
    assert robust_mean(EstimatorKind.MEDIAN_OF_MEANS, samples, cfg) == pytest.approx(3.0)


# ==================== IPS SAMPLES ====================


def test_ips_identity_transport():
    np.testing.assert_allclose(ips_samples([1.0, 0.0], np.eye(2), [((1.0, 0.0), 2.0)]), [2.0])


def test_ips_two_draws():
    draws = [((1.0, 0.0), 1.5), ((0.0, 1.0), 7.0)]
    np.testing.assert_allclose(ips_samples([1.0, 0.0], 2 * np.eye(2), draws), [3.0, 0.0])


def test_ips_zero_rewards_and_errors():
    draws = [((0.3, 0.4), 0.0), ((1.0, -1.0), 0.0)]
    np.testing.assert_array_equal(ips_samples([0.2, 0.7], np.eye(2), draws), [0.0, 0.0])
    assert ips_samples([1.0, 0.0], np.eye(2), []).size == 0
    with pytest.raises(DomainError):
        ips_samples([1.0, 0.0], np.eye(3), draws)
    with pytest.raises(DomainError):
        ips_samples([1.0, 0.0], np.eye(2), [((1.0, 0.0, 0.0), 1.0)])


# ==================== MINIMUM-DISTANCE FIT ====================


def test_fit_interpolates_at_a_basis(basis2):
    estimates = ArmEstimates(values={0: 0.3, 1: -0.2})
    theta = min_distance_fit(basis2, estimates)
    np.testing.assert_allclose(theta, [0.3, -0.2], atol=1e-9)
    assert fit_objective(basis2, estimates, theta) == pytest.approx(0.0, abs=1e-9)


def test_fit_single_arm_takes_minimum_norm():
    arms = ActionSet.from_vectors([[1.0, 0.0]])
    theta = min_distance_fit(arms, ArmEstimates(values={0: 0.5}))
    np.testing.assert_allclose(theta, [0.5, 0.0], atol=1e-9)


def test_fit_one_dimensional_minimax():
    arms = ActionSet.from_vectors([[1.0], [-1.0]])
    estimates = ArmEstimates(values={0: 1.0, 1: 0.0})
    theta = min_distance_fit(arms, estimates)
    assert theta[0] == pytest.approx(0.5, abs=1e-9)
    assert fit_objective(arms, estimates, theta) == pytest.approx(0.5, abs=1e-9)


def test_fit_beats_least_squares(rng):
    arms = ActionSet.from_vectors(rng.standard_normal((12, 3)) / 2.0)
    values = rng.standard_normal(12)
    estimates = ArmEstimates(values=dict(zip(arms.labels, values)))
    theta = min_distance_fit(arms, estimates)
    lstsq = np.linalg.lstsq(arms.vectors, values, rcond=None)[0]
    assert fit_objective(arms, estimates, theta) <= fit_objective(arms, estimates, lstsq) + 1e-9


def test_value_space_fit_reports_objective():
    fit = fit_in_value_space(np.eye(3), np.array([0.1, 0.2, 0.3]))
    np.testing.assert_allclose(fit.values, [0.1, 0.2, 0.3], atol=1e-9)
    assert fit.objective == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DomainError):
        fit_in_value_space(np.eye(2), np.zeros(3))


def test_arm_estimates_validation(basis2):
    with pytest.raises(ValueError):
        ArmEstimates(values={})
    with pytest.raises(ValueError):
        ArmEstimates(values={0: float("nan")})
    with pytest.raises(DomainError):
        ArmEstimates(values={0: 1.0}).aligned(basis2)


def test_fit_breaks_ties_toward_minimum_norm():
    # theta_2 is free on the optimal face; the tie-break must pin it at 0
    arms = ActionSet.from_vectors([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    estimates = ArmEstimates(values={0: 1.0, 1: 0.0, 2: 0.0})
    theta = min_distance_fit(arms, estimates)
    np.testing.assert_allclose(theta, [0.5, 0.0], atol=1e-8)
    assert np.linalg.norm(theta) == pytest.approx(0.5, abs=1e-8)
    assert fit_objective(arms, estimates, theta) == pytest.approx(0.5, abs=1e-9)


def _chebyshev_level(x: np.ndarray, w: np.ndarray) -> float:
    n, d = x.shape
    ones = np.ones((n, 1))
    result = linprog(
        np.r_[np.zeros(d), 1.0],
        A_ub=np.block([[x, -ones], [-x, -ones]]),
        b_ub=np.r_[w, -w],
        bounds=[(None, None)] * d + [(0, None)],
        method="highs",
    )
    assert result.status == 0
    return float(result.x[-1])


def _reference_min_norm(x: np.ndarray, w: np.ndarray, level: float) -> np.ndarray:
    constraints = [
        {"type": "ineq", "fun": lambda t: level - (x @ t - w), "jac": lambda t: -x},
        {"type": "ineq", "fun": lambda t: level + (x @ t - w), "jac": lambda t: x},
    ]
    start = np.linalg.lstsq(x, w, rcond=None)[0]
    result = minimize(
        lambda t: float(t @ t),
        start,
        jac=lambda t: 2.0 * t,
        constraints=constraints,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    return result.x if result.success else None


def test_fit_is_minimum_norm_on_the_optimal_face():
    # Integer arms and half-integer targets make the optimal face a segment or larger
    rng = np.random.default_rng(2024)
    compared = 0
    for _ in range(40):
        x = rng.integers(-1, 2, size=(5, 3)).astype(float)
        w = rng.integers(-2, 3, size=5) / 2.0
        arms = ActionSet.from_vectors(x)
        estimates = ArmEstimates(values=dict(zip(arms.labels, w)))
        theta = min_distance_fit(arms, estimates)
        level = _chebyshev_level(x, w)
        assert fit_objective(arms, estimates, theta) <= level + 1e-8
        reference = _reference_min_norm(x, w, level + 1e-11)
        if reference is None:
            continue
        compared += 1
        assert np.linalg.norm(theta) <= np.linalg.norm(reference) + 1e-6
    assert compared >= 30


def test_fit_objective_is_at_most_the_largest_estimate(rng):
    for _ in range(20):
        arms = ActionSet.from_vectors(rng.standard_normal((6, 3)) / 2.0)
        values = rng.uniform(-2.0, 2.0, 6)
        estimates = ArmEstimates(values=dict(zip(arms.labels, values)))
        theta = min_distance_fit(arms, estimates)
        assert fit_objective(arms, estimates, theta) <= np.max(np.abs(values)) + 1e-9


def test_fit_is_shift_equivariant(rng):
    arms = ActionSet.from_vectors(rng.standard_normal((7, 3)) / 2.0)
    values = rng.uniform(-1.0, 1.0, 7)
    shift = np.array([0.3, -0.1, 0.25])
    base = ArmEstimates(values=dict(zip(arms.labels, values)))
    moved = ArmEstimates(values=dict(zip(arms.labels, values + arms.vectors @ shift)))

    theta = min_distance_fit(arms, base)
    theta_moved = min_distance_fit(arms, moved)
    level = fit_objective(arms, base, theta)
    assert fit_objective(arms, moved, theta_moved) == pytest.approx(level, abs=1e-8)
    # theta_moved - shift is optimal for the unshifted targets
    assert fit_objective(arms, base, theta_moved - shift) == pytest.approx(level, abs=1e-8)


# ==================== COVERAGE ====================


@pytest.mark.slow
@pytest.mark.parametrize("n", [100, 1000])
def test_truncated_mean_coverage_under_pareto_noise(n):
    epsilon, delta, trials = 0.5, 0.05, 10_000
    spec = NoiseSpec(kind=NoiseKind.CENTERED_PARETO, alpha=2.0, sigma=1.0)
    cfg = TruncationConfig(u=noise_moment(spec, epsilon), epsilon=epsilon, delta=delta)
    bound = deviation_bound(cfg, n)
    threshold = truncation_threshold(cfg, n)

    samples = sample_noise(spec, make_generator(7 + n), size=trials * n).reshape(trials, n)
    estimates = np.where(np.abs(samples) <= threshold, samples, 0.0).mean(axis=1)
    np.testing.assert_allclose(estimates[:5], [truncated_mean(row, cfg) for row in samples[:5]], rtol=1e-12)

    violations = np.mean(np.abs(estimates) > bound)
    assert violations <= 2 * delta
