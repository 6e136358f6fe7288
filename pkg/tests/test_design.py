"""
Tests for the experimental-design layer.
"""

import math

import numpy as np
import pytest

from htb.algorithms.design import (
    Design,
    DesignProblem,
    g_optimal_design,
    lemma_bound_certificate,
    minimize_moment_objective,
    moment_objective,
    moment_terms,
    project_to_simplex,
    quadratic_forms,
    regularized_gram,
    special_case_design,
)
from htb.core.errors import DomainError, SingularityError
from htb.core.models import ActionSet
from htb.environments.action_sets import signed_basis, simplex_basis, sphere_random


# ==================== DESIGN TYPE ====================


def test_design_must_be_a_probability_vector(basis2):
    with pytest.raises(ValueError):
        Design(labels=(0, 1), weights=[0.6, 0.6])
    with pytest.raises(ValueError):
        Design(labels=(0, 1), weights=[1.5, -0.5])
    with pytest.raises(DomainError):
        Design.from_weights((0, 1), [0.0, 0.0])
    design = Design.from_weights((0, 1), [2.0, 6.0])
    np.testing.assert_allclose(design.weights, [0.25, 0.75])
    assert Design.point_mass(basis2, 1).support() == (1,)


def test_project_to_simplex():
    for v in ([0.2, 0.3, 0.5], [3.0, -1.0, 0.5], [-2.0, -2.0, -2.0]):
        w = project_to_simplex(np.array(v))
        assert w.min() >= 0.0
        assert w.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(project_to_simplex(np.array([0.2, 0.3, 0.5])), [0.2, 0.3, 0.5])


# ==================== REGULARIZED GRAM ====================


def test_regularized_gram_diagonal_case(basis2):
    problem = DesignProblem(arms=basis2, gamma=0.0)
    a, inverse = regularized_gram(problem, Design.uniform(basis2))
    np.testing.assert_allclose(a, np.diag([0.5, 0.5]))
    np.testing.assert_allclose(inverse, np.diag([2.0, 2.0]))


def test_regularized_gram_rank_one_plus_identity(basis2):
    problem = DesignProblem(arms=basis2, gamma=1.0)
    a, _ = regularized_gram(problem, Design.point_mass(basis2, 0))
    np.testing.assert_allclose(a, np.diag([2.0, 1.0]))


def test_regularized_gram_singular():
    arms = ActionSet.from_vectors([[1.0, 0.0]])
    with pytest.raises(SingularityError) as info:
        regularized_gram(DesignProblem(arms=arms, gamma=0.0), Design.uniform(arms))
    assert info.value.deficiency == 1


# ==================== OBJECTIVE ====================


def test_moment_objective_finite_variance(basis2):
    problem = DesignProblem(arms=basis2, gamma=0.0, beta=0.0, epsilon=1.0)
    assert moment_objective(problem, Design.uniform(basis2)) == pytest.approx(2.0)


def test_moment_objective_with_norm_term(basis2):
    problem = DesignProblem(arms=basis2, gamma=0.0, beta=1.0, epsilon=0.5)
    value = moment_objective(problem, Design.uniform(basis2))
    assert value == pytest.approx(math.sqrt(2.0) + 2.0**0.75)
    assert value == pytest.approx(3.09602, abs=1e-5)


def test_moment_objective_decreases_in_gamma(basis2):
    design = Design.uniform(basis2)
    values = [
        moment_objective(DesignProblem(arms=basis2, gamma=g, beta=0.0, epsilon=0.5), design)
        for g in (0.1, 1.0, 10.0, 100.0)
    ]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    assert values[-1] < 1e-2


def test_finite_variance_objective_against_leverage():
    arms = sphere_random(3, 7, seed=2)
    design = Design.from_weights(arms.labels, np.linspace(1.0, 2.0, 7))
    exact = DesignProblem(arms=arms, gamma=0.0, beta=0.0, epsilon=1.0)
    q = quadratic_forms(exact, design)
    assert moment_objective(exact, design) == pytest.approx(np.diag(q).max())
    regularized = DesignProblem(arms=arms, gamma=0.3, beta=0.0, epsilon=1.0)
    q_reg = quadratic_forms(regularized, design)
    assert moment_objective(regularized, design) <= np.diag(q_reg).max() + 1e-12


# ==================== G-OPTIMAL DESIGN ====================


def test_g_optimal_on_orthonormal_basis():
    arms = simplex_basis(3)
    design = g_optimal_design(arms, tol=1e-6)
    np.testing.assert_allclose(design.weights, np.full(3, 1 / 3), atol=1e-6)
    q = quadratic_forms(DesignProblem(arms=arms), design)
    assert np.diag(q).max() == pytest.approx(3.0, rel=1e-6)


def test_g_optimal_single_arm():
    arms = ActionSet.from_vectors([[1.0]])
    design = g_optimal_design(arms)
    np.testing.assert_allclose(design.weights, [1.0])


def test_g_optimal_duplicated_direction():
    arms = ActionSet.from_vectors([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    design = g_optimal_design(arms, tol=1e-4)
    assert design.weights[0] + design.weights[1] == pytest.approx(0.5, abs=1e-3)
    q = quadratic_forms(DesignProblem(arms=arms), design)
    assert np.diag(q).max() <= 2.0 * (1 + 1e-4)


def test_g_optimal_needs_spanning_arms():
    with pytest.raises(SingularityError):
        g_optimal_design(ActionSet.from_vectors([[1.0, 0.0]]))


def test_g_optimal_kiefer_wolfowitz_value():
    arms = sphere_random(3, 20, seed=5)
    design = g_optimal_design(arms, tol=1e-3, max_iters=5000)
    q = quadratic_forms(DesignProblem(arms=arms), design)
    assert np.diag(q).max() <= 3.0 * (1 + 1e-3) + 1e-9


# ==================== DIRECT MINIMIZATION ====================


def test_minimize_on_orthonormal_basis(basis2):
    problem = DesignProblem(arms=basis2, gamma=0.0, beta=0.0, epsilon=1.0)
    design = minimize_moment_objective(problem)
    assert moment_objective(problem, design) <= 2.0 + 1e-4


def test_minimize_single_arm():
    arms = ActionSet.from_vectors([[0.6, 0.8]])
    design = minimize_moment_objective(DesignProblem(arms=arms, gamma=0.1))
    np.testing.assert_allclose(design.weights, [1.0])


def test_minimize_simplex_basis_epsilon_power():
    arms = simplex_basis(3)
    problem = DesignProblem(arms=arms, gamma=0.0, beta=0.0, epsilon=0.5)
    design = minimize_moment_objective(problem)
    assert moment_objective(problem, design) <= 3**0.5 + 1e-4


def test_minimize_never_worse_than_init():
    arms = signed_basis(3)
    problem = DesignProblem(arms=arms, gamma=1e-3, beta=1.0, epsilon=0.5)
    init = Design.from_weights(arms.labels, [0.4, 0.1, 0.2, 0.1, 0.1, 0.1])
    design = minimize_moment_objective(problem, init=init, max_iters=50)
    assert moment_objective(problem, design) <= moment_objective(problem, init) + 1e-12


# ==================== CLOSED FORMS AND CERTIFICATE ====================


def test_special_case_simplex():
    support, design = special_case_design("simplex", 3)
    np.testing.assert_array_equal(support.vectors, np.eye(3))
    np.testing.assert_allclose(design.weights, np.full(3, 1 / 3))
    _, point = special_case_design("simplex", 1)
    np.testing.assert_allclose(point.weights, [1.0])


def test_special_case_lp_ball():
    support, design = special_case_design("lp_ball", 2, r=0.5)
    np.testing.assert_allclose(support.vectors, 0.5 * np.eye(2))
    a, _ = regularized_gram(DesignProblem(arms=support, gamma=0.0), design)
    np.testing.assert_allclose(a, 0.125 * np.eye(2))
    with pytest.raises(DomainError):
        special_case_design("lp_ball", 2, r=0.0)


def test_lemma_bound_certificate_passes():
    for arms in (signed_basis(4), sphere_random(3, 15, seed=9)):
        certificate = lemma_bound_certificate(arms, epsilon=0.5, T=10_000)
        assert certificate.passes
        assert certificate.bound == pytest.approx(2 * arms.dim**0.75)
        assert certificate.value <= certificate.bound
        assert certificate.bound < certificate.tolerance_bound
        assert certificate.max_leverage <= arms.dim * (1 + 1e-6)


def test_lemma_certificate_drives_leverage_under_d():
    # a loose tolerance stops Frank-Wolfe early; the certificate keeps going
    arms = sphere_random(6, 30, seed=4)
    certificate = lemma_bound_certificate(arms, epsilon=1.0, T=1000, tol=0.2)
    assert certificate.max_leverage <= 6 * (1 + 1e-6)
    assert certificate.value <= certificate.bound
    assert certificate.passes


@pytest.mark.slow
@pytest.mark.parametrize("epsilon", [0.5, 1.0])
@pytest.mark.parametrize("d", [2, 5, 10, 20])
def test_design_bound_on_random_spanning_sets(d, epsilon):
    for seed in range(50):
        arms = sphere_random(d, 2 * d + 4, seed=1000 * d + seed)
        certificate = lemma_bound_certificate(arms, epsilon=epsilon, T=100_000)
        assert certificate.value <= 2 * d ** ((1 + epsilon) / 2)
        assert certificate.passes


def test_uniform_basis_moment_term_is_at_most_d_to_the_eps(rng):
    for epsilon in (0.3, 0.5, 1.0):
        for d in range(1, 65):
            support, design = special_case_design("simplex", d)
            weights = design.aligned(support)
            q = quadratic_forms(DesignProblem(arms=support, gamma=0.0), design)
            terms = moment_terms(q, weights, epsilon, 0.0)
            assert terms.max() <= d**epsilon + 1e-9

            # any point of the simplex, by summing over the d support arms
            _, inverse = regularized_gram(DesignProblem(arms=support, gamma=0.0), design)
            points = rng.dirichlet(np.ones(d), size=8)
            values = (np.abs(points @ inverse @ support.vectors.T) ** (1 + epsilon)) @ weights
            assert np.all(values <= d**epsilon + 1e-9)
