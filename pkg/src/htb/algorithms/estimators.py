"""
Robust mean estimators and the minimum-distance parameter fit.

The truncated mean and median-of-means turn heavy-tailed per-arm samples
into confident scalar estimates; min_distance_fit turns those estimates into
a parameter by solving a Chebyshev (minimax) linear program.
"""

import logging
import math
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import linprog, nnls

from ..core.enums import EstimatorKind
from ..core.errors import DomainError, NumericError
from ..core.models import ActionSet

logger = logging.getLogger(__name__)

FIT_TOL = 1e-9
RANK_RTOL = 1e-12
FACE_TOL = 1e-11


# ============================================
# CONFIGURATION
# ============================================


class TruncationConfig(BaseModel):
    """Parameters of the truncated empirical mean.

    u bounds E|X|^(1+eps) of the samples; delta is the failure probability.
    """

    model_config = ConfigDict(frozen=True)

    u: float = Field(gt=0)
    epsilon: float = Field(gt=0, le=1)
    delta: float = Field(gt=0, lt=1)

    @field_validator("u")
    @classmethod
    def _finite_u(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("u must be finite")
        return v


class ArmEstimates(BaseModel):
    """Per-label robust estimates W^(a)."""

    model_config = ConfigDict(frozen=True)

    values: Dict[int, float]

    @model_validator(mode="after")
    def _check_finite(self) -> "ArmEstimates":
        if not self.values:
            raise ValueError("estimates must cover at least one arm")
        bad = [label for label, v in self.values.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite estimates for labels {bad}")
        return self

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(self.values)

    def aligned(self, arms: ActionSet) -> np.ndarray:
        """Estimates ordered like the rows of arms."""
        missing = [label for label in arms.labels if label not in self.values]
        if missing:
            raise DomainError(f"no estimate for arm labels {missing}")
        return np.array([self.values[label] for label in arms.labels], dtype=np.float64)


# ============================================
# ROBUST MEANS
# ============================================


def _as_samples(samples: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    array = np.asarray(samples, dtype=np.float64).ravel()
    if array.size == 0:
        raise DomainError("cannot estimate a mean from zero samples")
    return array


def truncation_threshold(cfg: TruncationConfig, n: int) -> float:
    """(u n / log(1/delta))^(1/(1+eps)) for n samples."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (cfg.u * n / math.log(1.0 / cfg.delta)) ** (1.0 / (1.0 + cfg.epsilon))


def deviation_bound(cfg: TruncationConfig, n: int) -> float:
    """High-probability deviation of the truncated mean from the true mean."""
    if n < 1:
        raise DomainError("n must be >= 1")
    eps = cfg.epsilon
    return 4.0 * cfg.u ** (1.0 / (1.0 + eps)) * (math.log(1.0 / cfg.delta) / n) ** (eps / (1.0 + eps))


def truncated_mean(samples: Union[Sequence[float], np.ndarray], cfg: TruncationConfig) -> float:
    """
    Empirical mean with samples above the threshold zeroed out.

    Args:
        samples: Non-empty sequence of reals
        cfg: Truncation parameters; the threshold uses n = len(samples)

    Returns:
        (1/n) * sum X_i 1{|X_i| <= threshold}
    """
    x = _as_samples(samples)
    threshold = truncation_threshold(cfg, x.size)
    return float(np.where(np.abs(x) <= threshold, x, 0.0).sum() / x.size)


def mom_blocks(n: int, delta: float) -> int:
    """ceil(8 log(1/delta)) clipped to [1, n]."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must be in (0, 1), got {delta}")
    return int(min(max(math.ceil(8.0 * math.log(1.0 / delta)), 1), n))


def median_of_means(samples: Union[Sequence[float], np.ndarray], delta: float) -> float:
    """
    Median of the means of k contiguous blocks.

    Blocks come from numpy.array_split, so their sizes differ by at most one.
    """
    x = _as_samples(samples)
    k = mom_blocks(x.size, delta)
    means = [block.mean() for block in np.array_split(x, k)]
    return float(np.median(means))


def robust_mean(kind: EstimatorKind, samples: Union[Sequence[float], np.ndarray], cfg: TruncationConfig) -> float:
    """Dispatch to the configured estimator; median-of-means only reads cfg.delta."""
    if kind == EstimatorKind.TRUNCATED_MEAN:
        return truncated_mean(samples, cfg)
    if kind == EstimatorKind.MEDIAN_OF_MEANS:
        return median_of_means(samples, cfg.delta)
    raise DomainError(f"unknown estimator {kind}")


# ============================================
# INVERSE-PROPENSITY SAMPLES
# ============================================


def ips_samples(a, inv_matrix, draws: Iterable[Tuple[Sequence[float], float]]) -> np.ndarray:
    """
    One-sample regularized least-squares estimates of <theta*, a>.

    Args:
        a: Target direction of length d
        inv_matrix: Precomputed inverse of the regularized design matrix
        draws: (x, y) pairs in observation order

    Returns:
        Array of a^T inv_matrix x_s y_s, one entry per draw
    """
    a = np.asarray(a, dtype=np.float64)
    inv_matrix = np.asarray(inv_matrix, dtype=np.float64)
    d = a.shape[0]
    if inv_matrix.shape != (d, d):
        raise DomainError(f"inv_matrix has shape {inv_matrix.shape}, expected ({d}, {d})")
    draws = list(draws)
    if not draws:
        return np.zeros(0)
    xs = np.array([np.asarray(x, dtype=np.float64) for x, _ in draws])
    if xs.ndim != 2 or xs.shape[1] != d:
        raise DomainError(f"draw vectors must have length {d}")
    ys = np.array([y for _, y in draws], dtype=np.float64)
    return (xs @ (inv_matrix @ a)) * ys


# ============================================
# MINIMUM-DISTANCE FIT
# ============================================


class ValueSpaceFit(BaseModel):
    """Solution of the minimax fit written as theta = sum_a alpha_a phi(a)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: np.ndarray
    values: np.ndarray = Field(description="Fitted theta^T a per arm, i.e. gram @ alpha")
    objective: float


def fit_in_value_space(gram: np.ndarray, targets: np.ndarray) -> ValueSpaceFit:
    """
    Minimax fit over the span of the arms, written against their Gram matrix.

    Solves min_alpha max_i |(G alpha)_i - W_i| with HiGHS, then picks the
    minimum-norm optimum: with G = Phi Phi^T (eigendecomposition, rank r) the
    optimal face is {z in R^r : |Phi z - W| <= s*} and its point closest to
    the origin is found as a least-distance program through NNLS. That point
    has the smallest alpha^T G alpha, i.e. the smallest ||theta||.

    Raises:
        NumericError: If the linear program does not converge
    """
    gram = np.asarray(gram, dtype=np.float64)
    w = np.asarray(targets, dtype=np.float64)
    n = w.shape[0]
    if gram.shape != (n, n):
        raise DomainError(f"gram has shape {gram.shape}, expected ({n}, {n})")

    c = np.zeros(n + 1)
    c[-1] = 1.0
    ones = np.ones((n, 1))
    a_ub = np.block([[gram, -ones], [-gram, -ones]])
    b_ub = np.concatenate([w, -w])
    bounds = [(None, None)] * n + [(0, None)]
    result = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0 or result.x is None:
        raise NumericError(
            "minimum-distance linear program failed",
            {"status": int(result.status), "message": str(result.message), "n_arms": n},
        )
    alpha_lp = result.x[:n]
    s_star = float(np.max(np.abs(gram @ alpha_lp - w)))
    level = s_star + FACE_TOL * max(1.0, s_star)

    alpha = _min_norm_on_face(gram, w, level)
    if alpha is None or np.max(np.abs(gram @ alpha - w)) > level + FIT_TOL * max(1.0, s_star):
        logger.debug("min-norm tie-break failed; keeping the LP vertex")
        alpha = alpha_lp
    values = gram @ alpha
    objective = float(np.max(np.abs(values - w)))
    return ValueSpaceFit(alpha=alpha, values=values, objective=objective)


def _min_norm_on_face(gram: np.ndarray, w: np.ndarray, level: float) -> Optional[np.ndarray]:
    """
    alpha of minimum alpha^T G alpha with |G alpha - w| <= level.

    Least-distance program min ||z|| s.t. E z >= f, solved by NNLS on
    [E^T; f^T] u ~ (0, ..., 0, 1), u >= 0; z = -r[:r] / r[r] with r the
    residual. Returns None when the face is empty to working precision.
    """
    eigvals, eigvecs = np.linalg.eigh((gram + gram.T) / 2.0)
    cutoff = RANK_RTOL * max(float(eigvals.max(initial=0.0)), 0.0)
    keep = eigvals > cutoff
    if not np.any(keep):
        return np.zeros(gram.shape[0]) if np.max(np.abs(w), initial=0.0) <= level else None
    roots = np.sqrt(eigvals[keep])
    phi = eigvecs[:, keep] * roots
    rank = phi.shape[1]

    e = np.vstack([phi, -phi])
    f = np.concatenate([w - level, -w - level])
    system = np.vstack([e.T, f[None, :]])
    rhs = np.zeros(rank + 1)
    rhs[-1] = 1.0
    try:
        u, _ = nnls(system, rhs, maxiter=50 * system.shape[1])
    except RuntimeError:
        return None
    residual = system @ u - rhs
    if abs(residual[-1]) < 1e-14:
        return None
    z = -residual[:rank] / residual[-1]
    return eigvecs[:, keep] @ (z / roots)


def min_distance_fit(arms: ActionSet, estimates: ArmEstimates) -> np.ndarray:
    """
    theta minimizing max_a |theta^T a - W^(a)| over the arms.

    Among optimal parameters the one of minimum Euclidean norm is returned.

    Args:
        arms: Active arms
        estimates: One estimate per arm label

    Returns:
        theta_hat of length arms.dim
    """
    w = estimates.aligned(arms)
    x = arms.vectors
    fit = fit_in_value_space(x @ x.T, w)
    return x.T @ fit.alpha


def fit_objective(arms: ActionSet, estimates: ArmEstimates, theta: np.ndarray) -> float:
    """max_a |theta^T a - W^(a)|."""
    return float(np.max(np.abs(arms.vectors @ np.asarray(theta) - estimates.aligned(arms))))
