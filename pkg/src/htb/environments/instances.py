"""
Hard instances behind the regret lower bounds.

Each constructor builds a finite action set together with a discrete reward
law whose mean is theta^T x and whose exact (1+eps)-central moment is
certified to be at most 1.
The adversarial parameter is chosen by the caller through an index or a
sign vector.
"""

import itertools
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator
from scipy.optimize import brentq

from ..core.context import make_generator
from ..core.enums import InstanceFlavor
from ..core.errors import ConstructionError, DomainError
from ..core.models import ActionSet
from ..core.models.entities import DomainModel, _frozen_array

logger = logging.getLogger(__name__)

MAX_INSTANCE_ACTIONS = 1_000_000
_PROB_TOL = 1e-12
_CALIBRATION_TARGET = 1.0 - 1e-12


# ============================================
# REWARD LAW
# ============================================


class BernoulliRewardInstance(DomainModel):
    """
    Finite-support reward law per action.

    support[i] and probabilities[i] describe y(x_i); every row of
    probabilities sums to one.
    """

    flavor: InstanceFlavor
    action_set: ActionSet
    theta: np.ndarray
    epsilon: float = Field(gt=0, le=1)
    delta: float = Field(gt=0, description="Gap scale of the construction")
    gamma_scale: float = Field(gt=0, description="gamma of the reward law")
    support: np.ndarray
    probabilities: np.ndarray

    @field_validator("theta", "support", "probabilities", mode="before")
    @classmethod
    def _as_array(cls, v) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check_shapes(self) -> "BernoulliRewardInstance":
        n = self.action_set.size
        if self.theta.shape != (self.action_set.dim,):
            raise ValueError("theta does not match the action dimension")
        if self.support.shape != self.probabilities.shape or self.support.shape[0] != n:
            raise ValueError("support and probabilities must be (n_actions, k) arrays")
        return self

    @property
    def action_space_size(self) -> int:
        return self.action_set.size

    def mean_rewards(self) -> np.ndarray:
        return np.sum(self.support * self.probabilities, axis=1)

    def draw(self, index: int, rng: np.random.Generator) -> float:
        cumulative = np.cumsum(self.probabilities[index])
        position = int(np.searchsorted(cumulative, rng.random(), side="right"))
        return float(self.support[index, min(position, self.support.shape[1] - 1)])

    def raw_moments(self, epsilon: Optional[float] = None) -> np.ndarray:
        """E|y(x)|^(1+eps) per action by exact summation."""
        power = 1.0 + (self.epsilon if epsilon is None else epsilon)
        return np.sum(np.abs(self.support) ** power * self.probabilities, axis=1)

    def central_moments(self, epsilon: Optional[float] = None) -> np.ndarray:
        """E|y(x) - theta^T x|^(1+eps) per action by exact summation."""
        power = 1.0 + (self.epsilon if epsilon is None else epsilon)
        centered = self.support - self.mean_rewards()[:, None]
        return np.sum(np.abs(centered) ** power * self.probabilities, axis=1)

    def central_moment(self, epsilon: float) -> float:
        return float(self.central_moments(epsilon).max())


def certify_moment(instance, epsilon: float) -> float:
    """
    Largest (1+eps)-central moment of the rewards over all actions.

    Works for every reward environment; hard instances sum over their exact
    support, linear instances report the moment of their noise law.
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")
    return float(instance.central_moment(epsilon))


# ==================== HELPERS ====================


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")


def _two_point_law(means: np.ndarray, gamma: float, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Value gamma^(-1/eps) w.p. gamma^(1/eps) * mean, else 0."""
    high = gamma ** (-1.0 / epsilon)
    p_high = gamma ** (1.0 / epsilon) * means
    if np.any(p_high < -_PROB_TOL) or np.any(p_high > 1 + _PROB_TOL):
        raise ConstructionError(
            f"probability {p_high.min():.3g}..{p_high.max():.3g} leaves [0, 1]; delta is too large"
        )
    p_high = np.clip(p_high, 0.0, 1.0)
    support = np.column_stack([np.full_like(means, high), np.zeros_like(means)])
    probabilities = np.column_stack([p_high, 1.0 - p_high])
    return support, probabilities


def _central_moment(support: np.ndarray, probabilities: np.ndarray, epsilon: float) -> float:
    means = np.sum(support * probabilities, axis=1)
    centered = np.abs(support - means[:, None]) ** (1 + epsilon)
    return float(np.max(np.sum(centered * probabilities, axis=1)))


def _calibrated_two_point_law(
    means: np.ndarray, gamma: float, epsilon: float
) -> Tuple[np.ndarray, np.ndarray, float, float]:
    """
    Two-point law whose exact (1+eps)-central moment is at most 1.

    The raw moment of the law is mean / gamma. For eps < 1 the central moment
    can exceed it; gamma is then raised to the smallest value that certifies
    the bound. Means are unchanged, only the tail value shrinks.

    Returns:
        (support, probabilities, gamma used, central moment)
    """
    support, probabilities = _two_point_law(means, gamma, epsilon)
    central = _central_moment(support, probabilities, epsilon)
    if central <= 1.0:
        return support, probabilities, gamma, central

    # the central moment decreases in gamma; at g_max the top arm's law is a point mass
    g_max = float(means.max()) ** (-epsilon)

    def excess(g: float) -> float:
        return _central_moment(*_two_point_law(means, g, epsilon), epsilon) - _CALIBRATION_TARGET

    if g_max <= gamma or excess(g_max) > 0:
        raise ConstructionError(f"central (1+eps)-moment {central:.6g} cannot be brought to 1")
    calibrated = brentq(excess, gamma, g_max, xtol=1e-15, rtol=1e-12)
    calibrated = min(calibrated * (1 + 1e-9), g_max)
    support, probabilities = _two_point_law(means, calibrated, epsilon)
    moment = _central_moment(support, probabilities, epsilon)
    if moment > 1 + 1e-9:
        raise ConstructionError(f"central (1+eps)-moment {moment:.6g} exceeds 1")
    logger.debug("gamma raised from %.6g to %.6g; central moment %.6g -> %.6g", gamma, calibrated, central, moment)
    return support, probabilities, calibrated, moment


# ==================== HYPERCUBE PAIRS ====================


def hypercube_pair_instance(
    d: int,
    T: int,
    theta_index: int = 0,
    epsilon: float = 1.0,
    delta: Optional[float] = None,
) -> BernoulliRewardInstance:
    """
    Pairwise hypercube instance in R^(2d).

    Actions are the 2^d vertices with x_(2i-1) + x_(2i) = 1; bit i of the
    label selects (1, 0) or (0, 1) in pair i. Bit i of theta_index places
    2*delta on the first (bit 0 gives (delta, 2*delta)) or second coordinate.

    Args:
        d: Number of coordinate pairs
        T: Horizon, used for the default delta and its precondition
        theta_index: Index into the 2^d admissible parameters
        epsilon: Tail exponent
        delta: Override of the default gap scale; skips the horizon check

    Raises:
        DomainError: T below 4^((1+eps)/eps) d^2, delta above 1/(4d) or a bad index
    """
    _check_epsilon(epsilon)
    if d < 1 or d > 20:
        raise DomainError(f"d must be in [1, 20], got {d}")
    if not 0 <= theta_index < 2**d:
        raise DomainError(f"theta_index must be in [0, 2^{d})")
    if delta is None:
        threshold = 4 ** ((1 + epsilon) / epsilon) * d**2
        if T < threshold:
            raise DomainError(f"T = {T} is below 4^((1+eps)/eps) d^2 = {threshold:.6g}")
        delta = 0.5 * d ** ((epsilon - 1) / (1 + epsilon)) * T ** (-epsilon / (1 + epsilon))
    if not 0 < delta <= 1 / (4 * d) + 1e-15:
        raise DomainError(f"delta = {delta:.6g} must be in (0, 1/(4d)]")

    theta = np.empty(2 * d)
    for i in range(d):
        flip = (theta_index >> i) & 1
        theta[2 * i], theta[2 * i + 1] = (2 * delta, delta) if flip else (delta, 2 * delta)

    vectors = np.zeros((2**d, 2 * d))
    for label in range(2**d):
        for i in range(d):
            vectors[label, 2 * i + ((label >> i) & 1)] = 1.0
    actions = ActionSet.from_vectors(vectors, radius=math.sqrt(d))

    support, probabilities, gamma, central = _calibrated_two_point_law(vectors @ theta, 2 * d * delta, epsilon)
    logger.debug("hypercube_pair d=%d delta=%.4g gamma=%.4g central moment=%.6f", d, delta, gamma, central)
    return BernoulliRewardInstance(
        flavor=InstanceFlavor.HYPERCUBE_PAIR,
        action_set=actions,
        theta=theta,
        epsilon=epsilon,
        delta=delta,
        gamma_scale=gamma,
        support=support,
        probabilities=probabilities,
    )


# ==================== GROUPED FINITE ====================


def group_size(d: int, n: int) -> int:
    """Smallest m in [min(4, d), d] with m / log2(m) >= d / log2(n)."""
    target = d / math.log2(n)
    for m in range(max(2, min(4, d)), d + 1):
        if m / math.log2(m) >= target:
            return m
    return d


def grouped_finite_instance(
    d: int,
    n: int,
    T: int,
    theta_index: int = 0,
    epsilon: float = 1.0,
    delta: Optional[float] = None,
    strict: bool = False,
) -> BernoulliRewardInstance:
    """
    Block-structured finite instance with at most n actions.

    Coordinates form d'/m blocks of size m (d' = d - d mod m, the rest is
    zero padding). Every action holds a single 1 per block; theta holds
    2*delta at one entry per block and delta elsewhere. theta_index read in
    base m picks the 2*delta entry of each block; action labels enumerate
    the one-hot choices the same way.

    Args:
        d: Dimension
        n: Action budget, n >= d
        T: Horizon
        theta_index: Index into the m^(d'/m) admissible parameters
        epsilon: Tail exponent
        delta: Override of the default gap scale; skips the horizon check
        strict: Also require n <= 2^floor(d/4)

    Raises:
        DomainError: n out of range, T too small, delta infeasible
    """
    _check_epsilon(epsilon)
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if n < d:
        raise DomainError(f"n = {n} must be >= d = {d}")
    if strict and n > 2 ** (d // 4):
        raise DomainError(f"n = {n} exceeds 2^floor(d/4) = {2 ** (d // 4)}")

    m = group_size(d, n)
    blocks = d // m
    d_used = blocks * m
    count = m**blocks
    if count > MAX_INSTANCE_ACTIONS:
        raise DomainError(f"{count} actions exceed the limit of {MAX_INSTANCE_ACTIONS}")
    if math.log2(count) > math.log2(n) + 1e-12:
        raise ConstructionError(f"|A| = {count} exceeds n = {n}")
    if not 0 <= theta_index < count:
        raise DomainError(f"theta_index must be in [0, {count})")

    if delta is None:
        threshold = 4 ** ((1 + epsilon) / epsilon) * d ** ((1 + epsilon) / epsilon)
        if T < threshold:
            raise DomainError(f"T = {T} is below 4^((1+eps)/eps) d^((1+eps)/eps) = {threshold:.6g}")
        delta = (
            (1 / 8)
            * (d_used / m) ** ((epsilon - 1) / (1 + epsilon))
            * (T / m) ** (-epsilon / (1 + epsilon))
        )
    limit = min(m / (4 * d_used), 1 / (4 * math.sqrt(d_used)))
    if not 0 < delta <= limit + 1e-15:
        raise DomainError(f"delta = {delta:.6g} must be in (0, {limit:.6g}]")

    theta = np.zeros(d)
    theta[:d_used] = delta
    for block, choice in enumerate(_base_digits(theta_index, m, blocks)):
        theta[block * m + choice] = 2 * delta

    vectors = np.zeros((count, d))
    for label, digits in enumerate(itertools.product(range(m), repeat=blocks)):
        # product() varies the last block fastest; read digits little-endian
        for block, choice in enumerate(reversed(digits)):
            vectors[label, block * m + choice] = 1.0
    actions = ActionSet.from_vectors(vectors, radius=math.sqrt(blocks))

    support, probabilities, gamma, central = _calibrated_two_point_law(vectors @ theta, 2 * delta * blocks, epsilon)
    logger.debug("grouped_finite d=%d n=%d m=%d |A|=%d central moment=%.6f", d, n, m, count, central)
    return BernoulliRewardInstance(
        flavor=InstanceFlavor.GROUPED_FINITE,
        action_set=actions,
        theta=theta,
        epsilon=epsilon,
        delta=delta,
        gamma_scale=gamma,
        support=support,
        probabilities=probabilities,
    )


def _base_digits(value: int, base: int, length: int) -> Sequence[int]:
    digits = []
    for _ in range(length):
        value, digit = divmod(value, base)
        digits.append(digit)
    return digits


# ==================== UNIT BALL ====================


def unit_ball_instance(
    d: int,
    T: int,
    theta_signs: Optional[Sequence[int]] = None,
    epsilon: float = 1.0,
    delta: Optional[float] = None,
    sphere_points: Optional[int] = None,
    seed: int = 0,
) -> BernoulliRewardInstance:
    """
    Three-point instance on a discretized unit ball.

    theta = delta * signs. The action set holds signs/sqrt(d) (the best
    action), its d single-sign flips, the signed basis and sphere_points
    random unit vectors (default 2d).

    Raises:
        DomainError: T < d^2, bad signs or delta above 1/(24 sqrt(d))
        ConstructionError: A probability leaves [0, 1]
    """
    _check_epsilon(epsilon)
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    signs = np.ones(d) if theta_signs is None else np.asarray(theta_signs, dtype=np.float64)
    if signs.shape != (d,) or not np.all(np.isin(signs, (-1.0, 1.0))):
        raise DomainError("theta_signs must be a length-d vector of +1/-1")
    if delta is None:
        if T < d**2:
            raise DomainError(f"T = {T} is below d^2 = {d**2}")
        delta = (
            24 ** (-1 / (1 + epsilon))
            * d ** ((3 * epsilon - 1) / (2 * (1 + epsilon)))
            * (288 * T) ** (-epsilon / (1 + epsilon))
        )
    if not 0 < delta <= 1 / (24 * math.sqrt(d)) + 1e-15:
        raise DomainError(f"delta = {delta:.6g} must be in (0, 1/(24 sqrt(d))]")

    theta = delta * signs
    best = signs / math.sqrt(d)
    flips = np.repeat(best[None, :], d, axis=0)
    flips[np.arange(d), np.arange(d)] *= -1
    basis = np.zeros((2 * d, d))
    for i in range(d):
        basis[2 * i, i] = 1.0
        basis[2 * i + 1, i] = -1.0
    count = 2 * d if sphere_points is None else sphere_points
    rng = make_generator(seed)
    raw = rng.standard_normal((count, d))
    raw /= np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-300)
    vectors = np.vstack([best[None, :], flips, basis, raw])
    actions = ActionSet.from_vectors(vectors, radius=1.0)

    gamma = 24 * math.sqrt(d) * delta
    shift = 2 * math.sqrt(d) * delta
    means = vectors @ theta
    p_high = gamma ** (1 / epsilon) * (means + shift)
    p_low = np.full_like(means, shift)
    p_zero = 1.0 - p_high - p_low
    if np.any(p_high < -_PROB_TOL) or np.any(p_zero < -_PROB_TOL):
        raise ConstructionError("three-point law has a probability outside [0, 1]; delta is too large")
    p_high = np.clip(p_high, 0.0, 1.0)
    p_zero = np.clip(p_zero, 0.0, 1.0)
    support = np.column_stack(
        [np.full_like(means, gamma ** (-1 / epsilon)), np.zeros_like(means), -np.ones_like(means)]
    )
    probabilities = np.column_stack([p_high, p_zero, p_low])

    instance = BernoulliRewardInstance(
        flavor=InstanceFlavor.UNIT_BALL3,
        action_set=actions,
        theta=theta,
        epsilon=epsilon,
        delta=delta,
        gamma_scale=gamma,
        support=support,
        probabilities=probabilities,
    )
    central = instance.central_moment(epsilon)
    if central >= 1:
        raise ConstructionError(f"central (1+eps)-moment {central:.6g} is not below 1")
    logger.debug("unit_ball d=%d delta=%.4g gamma=%.4g central moment=%.6f", d, delta, gamma, central)
    return instance
