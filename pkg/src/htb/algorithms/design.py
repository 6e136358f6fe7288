"""
Moment-aware experimental design.

Evaluates and minimizes the design objective

    M(lambda) = max_a  E_{x~lambda} |a^T A(lambda)^-1 x|^(1+eps)
                       + beta^(1+eps) ||a||_{A(lambda)^-1}^(1+eps),
    A(lambda) = gamma I + E_{x~lambda}[x x^T],

over the probability simplex of a finite arm set. Everything downstream of
the Gram matrix is written against the matrix of quadratic forms
Q[i, j] = a_i^T A^-1 a_j, so a kernel backend can supply Q without explicit
features.
"""

import logging
import math
from typing import NamedTuple, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from ..core.enums import SpecialDesignKind
from ..core.errors import DomainError, SingularityError
from ..core.models import ActionSet

logger = logging.getLogger(__name__)

SINGULAR_EIG = 1e-12
TIE_RTOL = 1e-9
CERTIFICATE_ROUNDS = 5


# ============================================
# DOMAIN TYPES
# ============================================


class DesignProblem(BaseModel):
    """Arms V with the regularization gamma, the norm weight beta and eps."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    arms: ActionSet
    gamma: float = Field(default=0.0, ge=0)
    beta: float = Field(default=1.0, ge=0)
    epsilon: float = Field(default=1.0, gt=0, le=1)


class Design(BaseModel):
    """Probability vector over arm labels."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: Tuple[int, ...]
    weights: np.ndarray

    @field_validator("weights", mode="before")
    @classmethod
    def _as_weights(cls, v) -> np.ndarray:
        array = np.array(v, dtype=np.float64).ravel()
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_simplex(self) -> "Design":
        if self.weights.shape[0] != len(self.labels):
            raise ValueError("one weight per label is required")
        if np.any(self.weights < 0):
            raise ValueError("design weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValueError(f"design weights sum to {self.weights.sum():.15g}, expected 1")
        return self

    @classmethod
    def from_weights(cls, labels: Sequence[int], weights) -> "Design":
        """Clip tiny negatives from roundoff and renormalize."""
        w = np.clip(np.asarray(weights, dtype=np.float64), 0.0, None)
        total = w.sum()
        if total <= 0:
            raise DomainError("design weights are all zero")
        return cls(labels=tuple(labels), weights=w / total)

    @classmethod
    def uniform(cls, arms: ActionSet) -> "Design":
        return cls.from_weights(arms.labels, np.full(arms.size, 1.0 / arms.size))

    @classmethod
    def point_mass(cls, arms: ActionSet, label: int) -> "Design":
        w = np.zeros(arms.size)
        w[arms.index_of(label)] = 1.0
        return cls(labels=arms.labels, weights=w)

    def aligned(self, arms: ActionSet) -> np.ndarray:
        """Weights ordered like the rows of arms; labels outside the design get 0."""
        lookup = dict(zip(self.labels, self.weights))
        return np.array([lookup.get(label, 0.0) for label in arms.labels], dtype=np.float64)

    def support(self, threshold: float = 0.0) -> Tuple[int, ...]:
        return tuple(l for l, w in zip(self.labels, self.weights) if w > threshold)


# ============================================
# QUADRATIC-FORM BACKENDS
# ============================================


class FormBackend(Protocol):
    """Supplies Q = [a_i^T A(lambda)^-1 a_j] for a fixed arm list."""

    @property
    def n_arms(self) -> int: ...

    def forms(self, weights: np.ndarray) -> np.ndarray: ...

    def arm_gram(self) -> np.ndarray: ...


class ExplicitForms:
    """Quadratic forms from explicit d-dimensional vectors."""

    def __init__(self, vectors: np.ndarray, gamma: float):
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.gamma = float(gamma)

    @property
    def n_arms(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def matrix(self, weights: np.ndarray) -> np.ndarray:
        x = self.vectors
        return self.gamma * np.eye(self.dim) + (x * weights[:, None]).T @ x

    def factor(self, weights: np.ndarray):
        a = self.matrix(weights)
        eigenvalues = np.linalg.eigvalsh(a)
        deficiency = int(np.sum(eigenvalues < SINGULAR_EIG))
        if deficiency:
            raise SingularityError(
                f"regularized Gram matrix is singular: {deficiency} deficient direction(s)",
                deficiency,
                {"min_eigenvalue": float(eigenvalues.min()), "gamma": self.gamma},
            )
        try:
            return a, linalg.cho_factor(a, lower=True)
        except linalg.LinAlgError as exc:
            raise SingularityError(str(exc), 1, {"gamma": self.gamma}) from exc

    def forms(self, weights: np.ndarray) -> np.ndarray:
        _, chol = self.factor(weights)
        x = self.vectors
        q = x @ linalg.cho_solve(chol, x.T)
        return 0.5 * (q + q.T)

    def arm_gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T


# ============================================
# EVALUATION
# ============================================


def regularized_gram(problem: DesignProblem, design: Design) -> Tuple[np.ndarray, np.ndarray]:
    """
    A(lambda) = gamma I + sum_i lambda_i a_i a_i^T and its inverse.

    Raises:
        SingularityError: If A has eigenvalues below 1e-12
    """
    backend = ExplicitForms(problem.arms.vectors, problem.gamma)
    a, chol = backend.factor(design.aligned(problem.arms))
    inverse = linalg.cho_solve(chol, np.eye(backend.dim))
    return a, 0.5 * (inverse + inverse.T)


def quadratic_forms(problem: DesignProblem, design: Design) -> np.ndarray:
    """Q[i, j] = a_i^T A(lambda)^-1 a_j over the problem's arms."""
    backend = ExplicitForms(problem.arms.vectors, problem.gamma)
    return backend.forms(design.aligned(problem.arms))


def moment_terms(q: np.ndarray, weights: np.ndarray, epsilon: float, beta: float) -> np.ndarray:
    """Per-arm value of the objective before the max over arms."""
    power = 1.0 + epsilon
    moment = np.abs(q) ** power @ weights
    norm = np.clip(np.diag(q), 0.0, None) ** (power / 2.0)
    return moment + beta**power * norm


def moment_objective(problem: DesignProblem, design: Design) -> float:
    """Exact objective by summation over the support of the design."""
    q = quadratic_forms(problem, design)
    return float(moment_terms(q, design.aligned(problem.arms), problem.epsilon, problem.beta).max())


def tolerant_argmax(values: np.ndarray, rtol: float = TIE_RTOL) -> int:
    """Smallest index whose value is within rtol of the maximum."""
    top = float(np.max(values))
    return int(np.flatnonzero(values >= top - rtol * max(1.0, abs(top)))[0])


# ============================================
# G-OPTIMAL DESIGN (FRANK-WOLFE)
# ============================================


def default_fw_iters(d: int) -> int:
    return int(math.ceil(10 * d * math.log(math.log(max(d, 3)))))


def frank_wolfe(
    backend: FormBackend,
    weights: np.ndarray,
    max_iters: int,
    tol: float,
) -> Tuple[np.ndarray, int]:
    """
    Wolfe-Atwood iterations for the (regularized) G-optimal design.

    Each step either moves mass toward the arm of largest leverage
    g_i = Q_ii or away from the supported arm of smallest leverage, with the
    Kiefer-Wolfowitz step length. Stops once max_i g_i <= (1 + tol) * sum_i
    lambda_i g_i, which is (1 + tol) * d when gamma = 0.

    Returns:
        (weights, iterations used)
    """
    w = weights.copy()
    iterations = 0
    for iterations in range(1, max_iters + 1):
        g = np.diag(backend.forms(w)).copy()
        target = float(g @ w)
        j_plus = tolerant_argmax(g)
        if g[j_plus] <= (1.0 + tol) * target:
            iterations -= 1
            break
        supported = np.flatnonzero(w > 0)
        j_minus = int(supported[np.argmin(g[supported])])
        forward_gap = g[j_plus] / target - 1.0
        away_gap = 1.0 - g[j_minus] / target
        if away_gap > forward_gap and g[j_minus] - 1.0 > 1e-12 and w[j_minus] < 1.0:
            j = j_minus
            eta = max(_kw_step(g[j], target, iterations), -w[j] / (1.0 - w[j]))
        else:
            j = j_plus
            eta = _kw_step(g[j], target, iterations)
        w = (1.0 - eta) * w
        w[j] += eta
        w = np.clip(w, 0.0, None)
        w /= w.sum()
    return w, iterations


def _kw_step(g_j: float, target: float, k: int) -> float:
    if g_j - 1.0 <= 1e-12:
        return 1.0 / (k + 2.0)
    return (g_j / target - 1.0) / (g_j - 1.0)


def g_optimal_design(
    arms: ActionSet,
    gamma: float = 0.0,
    max_iters: Optional[int] = None,
    tol: float = 0.05,
    init: Optional[Design] = None,
) -> Design:
    """
    Frank-Wolfe approximation of the G-optimal design.

    Args:
        arms: Arm set; must span R^d when gamma = 0
        gamma: Regularization of A(lambda)
        max_iters: Defaults to ceil(10 d log log max(d, 3))
        tol: Relative optimality tolerance
        init: Starting design, uniform by default

    Raises:
        SingularityError: Non-spanning arms with gamma = 0
    """
    if max_iters is None:
        max_iters = default_fw_iters(arms.dim)
    start = Design.uniform(arms) if init is None else init
    weights, iterations = frank_wolfe(ExplicitForms(arms.vectors, gamma), start.aligned(arms), max_iters, tol)
    logger.debug("frank-wolfe: %d arms, d=%d, %d iterations", arms.size, arms.dim, iterations)
    return Design.from_weights(arms.labels, weights)


# ============================================
# DIRECT MINIMIZATION (PROJECTED SUBGRADIENT)
# ============================================


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    rho = np.flatnonzero(u - cumulative / np.arange(1, n + 1) > 0)[-1]
    theta = cumulative[rho] / (rho + 1.0)
    return np.clip(v - theta, 0.0, None)


def moment_subgradient(q: np.ndarray, weights: np.ndarray, i: int, epsilon: float, beta: float) -> np.ndarray:
    """Gradient of arm i's objective term w.r.t. the weights, using dQ_ij/dlambda_k = -Q_ik Q_kj."""
    power = 1.0 + epsilon
    row = q[i]
    direct = np.abs(row) ** power
    s = weights * power * np.abs(row) ** epsilon * np.sign(row)
    through_a = -row * (q @ s)
    q_ii = q[i, i]
    if beta > 0 and q_ii > 0:
        norm_term = -(beta**power) * (power / 2.0) * q_ii ** ((epsilon - 1.0) / 2.0) * row**2
    else:
        norm_term = np.zeros_like(row)
    return direct + through_a + norm_term


def subgradient_descent(
    backend: FormBackend,
    weights: np.ndarray,
    epsilon: float,
    beta: float,
    max_iters: int,
    tol: float,
    step_scale: float = 0.5,
) -> Tuple[np.ndarray, float]:
    """
    Projected subgradient descent on the objective with steps c / sqrt(k).

    Returns the best iterate seen and its objective; an iterate replaces the
    incumbent only if it improves by more than a relative 1e-12.
    """
    w = weights.copy()
    q = backend.forms(w)
    terms = moment_terms(q, w, epsilon, beta)
    best_w, best_value = w.copy(), float(terms.max())
    for k in range(1, max_iters + 1):
        step = step_scale / math.sqrt(k)
        if step < tol:
            break
        i = tolerant_argmax(terms)
        grad = moment_subgradient(q, w, i, epsilon, beta)
        norm = float(np.linalg.norm(grad))
        if norm == 0.0 or not np.isfinite(norm):
            break
        candidate = project_to_simplex(w - step * grad / norm)
        try:
            q_next = backend.forms(candidate)
        except SingularityError:
            # iterate left the region where A is invertible; retry with the next, shorter step
            continue
        w, q = candidate, q_next
        terms = moment_terms(q, w, epsilon, beta)
        value = float(terms.max())
        if value < best_value - 1e-12 * max(1.0, abs(best_value)):
            best_w, best_value = w.copy(), value
    return best_w, best_value


def minimize_moment_objective(
    problem: DesignProblem,
    init: Optional[Design] = None,
    max_iters: int = 100,
    tol: float = 1e-4,
) -> Design:
    """
    Local minimization of the objective over the simplex.

    Warm-started at init (the G-optimal design by default); never returns a
    design worse than init.
    """
    arms = problem.arms
    if init is None:
        init = g_optimal_design(arms, problem.gamma)
    if arms.size == 1:
        return Design.uniform(arms)
    backend = ExplicitForms(arms.vectors, problem.gamma)
    weights, value = subgradient_descent(
        backend, init.aligned(arms), problem.epsilon, problem.beta, max_iters, tol
    )
    logger.debug("subgradient design: objective %.6g", value)
    return Design.from_weights(arms.labels, weights)


# ============================================
# CLOSED FORMS AND CERTIFICATES
# ============================================


def special_case_design(
    kind: Union[SpecialDesignKind, str], d: int, r: float = 1.0
) -> Tuple[ActionSet, Design]:
    """
    Uniform design over {e_i} (simplex) or {r e_i} (l_p ball).

    Returns:
        (support arms, design) with labels 0..d-1
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    kind = SpecialDesignKind(kind)
    if kind == SpecialDesignKind.LP_BALL:
        if r <= 0:
            raise DomainError(f"r must be positive, got {r}")
        support = ActionSet.from_vectors(r * np.eye(d), radius=max(r, 1.0))
    else:
        support = ActionSet.from_vectors(np.eye(d), radius=1.0)
    return support, Design.uniform(support)


class LemmaCertificate(NamedTuple):
    """Outcome of checking the universal design bound on one arm set."""

    value: float  # objective with beta = 1, gamma = T^(-2eps/(1+eps))
    max_leverage: float  # max_a ||a||^2_{A^-1} of the design
    dimension_bound: float  # d^((1+eps)/2)
    bound: float  # 2 d^((1+eps)/2), one share per objective term
    tolerance_bound: float  # 2 ((1 + tol) d)^((1+eps)/2), reported only
    passes: bool  # value <= bound


def lemma_bound_certificate(
    arms: ActionSet,
    epsilon: float,
    T: int,
    tol: float = 1e-3,
    max_iters: int = 20_000,
) -> LemmaCertificate:
    """
    Run Frank-Wolfe at gamma = T^(-2eps/(1+eps)) and compare the objective
    with beta = 1 against 2 d^((1+eps)/2).

    The two terms of the objective are each bounded by max_leverage^((1+eps)/2).
    With gamma > 0 the optimal leverage sits strictly below d, so when the
    tol-stopped design still has an arm above d the iterations continue until
    every leverage is at most d, which makes the check pass.
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")
    gamma = float(T) ** (-2.0 * epsilon / (1.0 + epsilon))
    d = arms.dim
    backend = ExplicitForms(arms.vectors, gamma)
    weights = g_optimal_design(arms, gamma, max_iters=max_iters, tol=tol).aligned(arms)
    leverage = np.diag(backend.forms(weights))
    for _ in range(CERTIFICATE_ROUNDS):
        if gamma == 0 or leverage.max() <= d:
            break
        target = float(leverage @ weights)
        weights, iterations = frank_wolfe(backend, weights, max_iters, d / target - 1.0)
        leverage = np.diag(backend.forms(weights))
        logger.debug("certificate: %d more Frank-Wolfe iterations, max leverage %.12g, d=%d", iterations, leverage.max(), d)
    q = backend.forms(weights)
    value = float(moment_terms(q, weights, epsilon, 1.0).max())
    power = (1.0 + epsilon) / 2.0
    dimension_bound = d**power
    bound = 2.0 * dimension_bound
    return LemmaCertificate(
        value=value,
        max_leverage=float(np.diag(q).max()),
        dimension_bound=dimension_bound,
        bound=bound,
        tolerance_bound=2.0 * ((1.0 + tol) * d) ** power,
        passes=value <= bound,
    )
