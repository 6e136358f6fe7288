"""
Kernelized MED-PE.

Kernels (Matern, RBF, linear), the finite Woodbury form of
phi(psi)^T A(lambda)^-1 phi(rho) for an infinite-dimensional feature map,
and the MED-PE loop running on top of it. The inner matrix of the identity
is (K_lambda + gamma I).
"""

import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg, special
from scipy.spatial.distance import cdist

from ..core.context import SeedContext
from ..core.enums import KernelKind
from ..core.errors import DomainError, NumericError
from ..core.models import ActionSet, NoiseSpec, RunRecord
from ..core.models.entities import _frozen_array
from .design import frank_wolfe, moment_terms
from .medpe import MedPeConfig, run_phased_elimination

logger = logging.getLogger(__name__)


# ============================================
# KERNELS
# ============================================


class KernelSpec(BaseModel):
    """Kernel family with its smoothness nu and lengthscale."""

    model_config = ConfigDict(frozen=True)

    kind: KernelKind = KernelKind.MATERN
    nu: float = Field(default=2.5, gt=0)
    lengthscale: float = Field(default=1.0, gt=0)
    dim: int = Field(default=1, ge=1)

    @classmethod
    def matern(cls, nu: float, lengthscale: float, dim: int = 1) -> "KernelSpec":
        return cls(kind=KernelKind.MATERN, nu=nu, lengthscale=lengthscale, dim=dim)

    @classmethod
    def linear(cls, dim: int) -> "KernelSpec":
        return cls(kind=KernelKind.LINEAR, dim=dim)

    @classmethod
    def rbf(cls, lengthscale: float, dim: int = 1) -> "KernelSpec":
        return cls(kind=KernelKind.RBF, lengthscale=lengthscale, dim=dim)


def matern_from_distance(r: np.ndarray, nu: float, lengthscale: float) -> np.ndarray:
    """Matern correlation of distances r; closed forms for nu in {1/2, 3/2, 5/2}."""
    s = np.asarray(r, dtype=np.float64) / lengthscale
    if nu == 0.5:
        return np.exp(-s)
    if nu == 1.5:
        z = math.sqrt(3.0) * s
        return (1.0 + z) * np.exp(-z)
    if nu == 2.5:
        z = math.sqrt(5.0) * s
        return (1.0 + z + z**2 / 3.0) * np.exp(-z)
    z = math.sqrt(2.0 * nu) * s
    out = np.ones_like(z)
    positive = z > 0
    zp = z[positive]
    # log-space with the scaled Bessel function kve(nu, z) = kv(nu, z) e^z
    log_k = (1.0 - nu) * math.log(2.0) - special.gammaln(nu) + nu * np.log(zp) + np.log(special.kve(nu, zp)) - zp
    out[positive] = np.exp(log_k)
    return np.clip(out, 0.0, 1.0)


def kernel_gram(spec: KernelSpec, x, y) -> np.ndarray:
    """Matrix [K(x_i, y_j)]."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise DomainError(f"point dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    if spec.kind == KernelKind.LINEAR:
        return x @ y.T
    if spec.kind == KernelKind.RBF:
        sq = cdist(x, y, "sqeuclidean")
        return np.exp(-0.5 * sq / spec.lengthscale**2)
    return matern_from_distance(cdist(x, y), spec.nu, spec.lengthscale)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """K(x, y) for two points."""
    return float(kernel_gram(spec, x, y)[0, 0])


# ============================================
# DESIGN CACHE AND QUADRATIC FORMS
# ============================================


class KernelDesignCache(BaseModel):
    """
    Support points and weights of a design with the factorization of
    (K_lambda + gamma I), (K_lambda)_ij = sqrt(l_i l_j) K(x_i, x_j).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: KernelSpec
    points: np.ndarray
    weights: np.ndarray
    gamma: float = Field(gt=0)
    gram_lambda: np.ndarray
    factor: Tuple[np.ndarray, bool]

    @classmethod
    def build(cls, spec: KernelSpec, points, weights, gamma: float) -> "KernelDesignCache":
        """
        Raises:
            DomainError: gamma <= 0
            NumericError: The factorization fails
        """
        if gamma <= 0:
            raise DomainError("kernel quadratic forms need gamma > 0")
        points = _frozen_array(np.atleast_2d(points))
        weights = _frozen_array(weights)
        root = np.sqrt(weights)
        gram_lambda = root[:, None] * kernel_gram(spec, points, points) * root[None, :]
        factor = _factor(gram_lambda, gamma)
        return cls(spec=spec, points=points, weights=weights, gamma=gamma, gram_lambda=gram_lambda, factor=factor)

    def k_lambda(self, z) -> np.ndarray:
        """Columns sqrt(l_i) K(x_i, z_j) for each query point z_j."""
        return np.sqrt(self.weights)[:, None] * kernel_gram(self.spec, self.points, z)


def _factor(gram_lambda: np.ndarray, gamma: float) -> Tuple[np.ndarray, bool]:
    inner = gram_lambda + gamma * np.eye(gram_lambda.shape[0])
    try:
        return linalg.cho_factor(inner, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError(
            "factorization of K_lambda + gamma I failed",
            {"gamma": gamma, "min_eigenvalue": float(np.linalg.eigvalsh(inner).min())},
        ) from exc


def kernel_quadratic_form(cache: KernelDesignCache, gamma: float, psi, rho) -> float:
    """
    phi(psi)^T A(lambda)^-1 phi(rho) for A(lambda) = gamma I + E_lambda[phi phi^T].

    Computed as gamma^-1 K(psi, rho) - gamma^-1 k(psi)^T (K_lambda + gamma I)^-1 k(rho).
    """
    if not math.isclose(gamma, cache.gamma, rel_tol=1e-12):
        raise DomainError(f"cache was built for gamma={cache.gamma}, got {gamma}")
    psi = np.atleast_2d(np.asarray(psi, dtype=np.float64))
    rho = np.atleast_2d(np.asarray(rho, dtype=np.float64))
    k_psi = cache.k_lambda(psi)
    k_rho = cache.k_lambda(rho)
    correction = k_psi.T @ linalg.cho_solve(cache.factor, k_rho)
    return float((kernel_gram(cache.spec, psi, rho) - correction)[0, 0] / gamma)


def effective_dimension(cache: KernelDesignCache, gamma: Optional[float] = None) -> float:
    """Tr(K_lambda (K_lambda + gamma I)^-1)."""
    gamma = cache.gamma if gamma is None else gamma
    if math.isclose(gamma, cache.gamma, rel_tol=1e-12):
        solved = linalg.cho_solve(cache.factor, cache.gram_lambda)
    else:
        solved = linalg.solve(cache.gram_lambda + gamma * np.eye(len(cache.weights)), cache.gram_lambda, assume_a="pos")
    return float(np.trace(solved))


class KernelForms:
    """Quadratic-form backend over a fixed set of arms, served kernel-side."""

    def __init__(self, spec: KernelSpec, points: np.ndarray, gamma: float):
        if gamma <= 0:
            raise DomainError("kernel quadratic forms need gamma > 0")
        self.spec = spec
        self.points = points
        self.gamma = float(gamma)
        self._gram = kernel_gram(spec, points, points)

    @property
    def n_arms(self) -> int:
        return self._gram.shape[0]

    def forms(self, weights: np.ndarray) -> np.ndarray:
        root = np.sqrt(np.clip(weights, 0.0, None))
        k = self._gram
        scaled = root[:, None] * k
        factor = _factor(scaled * root[None, :], self.gamma)
        q = (k - scaled.T @ linalg.cho_solve(factor, scaled)) / self.gamma
        return 0.5 * (q + q.T)

    def arm_gram(self) -> np.ndarray:
        return self._gram


# ============================================
# ENVIRONMENT
# ============================================


class KernelExpansion(BaseModel):
    """f(x) = sum_j c_j K(z_j, x)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    anchors: np.ndarray
    coefficients: np.ndarray

    @field_validator("anchors", mode="before")
    @classmethod
    def _as_points(cls, v) -> np.ndarray:
        return _frozen_array(np.atleast_2d(np.asarray(v, dtype=np.float64)))

    @field_validator("coefficients", mode="before")
    @classmethod
    def _as_vector(cls, v) -> np.ndarray:
        return _frozen_array(np.ravel(np.asarray(v, dtype=np.float64)))

    @model_validator(mode="after")
    def _check_lengths(self) -> "KernelExpansion":
        if self.anchors.shape[0] != self.coefficients.shape[0]:
            raise ValueError("one coefficient per anchor is required")
        return self

    def evaluate(self, spec: KernelSpec, x) -> np.ndarray:
        return kernel_gram(spec, x, self.anchors) @ self.coefficients


class KernelInstance(BaseModel):
    """Reward environment y = f(x) + eta over finite domain points."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    action_set: ActionSet
    spec: KernelSpec
    f_star: KernelExpansion
    noise: NoiseSpec = Field(default_factory=NoiseSpec.zero)

    @model_validator(mode="after")
    def _check_bounded(self) -> "KernelInstance":
        peak = float(np.max(np.abs(self.mean_rewards())))
        if peak > 1 + 1e-9:
            raise ValueError(f"max |f(x)| = {peak:.6g} exceeds 1 over the domain points")
        return self

    def mean_rewards(self) -> np.ndarray:
        return self.f_star.evaluate(self.spec, self.action_set.vectors)

    def draw(self, index: int, rng: np.random.Generator) -> float:
        from ..environments.noise import sample_noise

        return float(self.mean_rewards()[index]) + sample_noise(self.noise, rng)

    def central_moment(self, epsilon: float) -> float:
        from ..environments.noise import noise_moment

        return noise_moment(self.noise, epsilon)


def run_kernel_medpe(
    domain_points: ActionSet,
    f_star: KernelExpansion,
    spec: KernelSpec,
    cfg: MedPeConfig,
    seed: Union[int, SeedContext] = 0,
    noise: Optional[NoiseSpec] = None,
) -> RunRecord:
    """
    MED-PE with every quadratic form served by the kernel identity.

    The minimax fit runs over coefficients on the active arms' features,
    an LP of size |A_l| written against the kernel Gram matrix.

    Args:
        domain_points: Finite domain, e.g. a grid of [0, 1]^d
        f_star: Mean function as a kernel expansion; |f| <= 1 on the domain
        spec: Kernel
        cfg: Algorithm parameters (gamma must resolve to > 0)
        seed: Integer seed or SeedContext
        noise: Additive noise, zero by default

    Returns:
        RunRecord of T rounds, regret against max f over the domain
    """
    if isinstance(seed, SeedContext):
        seed = seed.seed
    instance = KernelInstance(
        action_set=domain_points, spec=spec, f_star=f_star, noise=noise or NoiseSpec.zero()
    )
    return run_phased_elimination(
        _CachedMeans(instance),
        cfg,
        seed,
        lambda active, gamma: KernelForms(spec, active.vectors, gamma),
        domain_points.dim,
    )


class _CachedMeans:
    """KernelInstance with f evaluated once per run."""

    def __init__(self, instance: KernelInstance):
        self._instance = instance
        self._means = instance.mean_rewards()

    @property
    def action_set(self) -> ActionSet:
        return self._instance.action_set

    def mean_rewards(self) -> np.ndarray:
        return self._means

    def draw(self, index: int, rng: np.random.Generator) -> float:
        from ..environments.noise import sample_noise

        return float(self._means[index]) + sample_noise(self._instance.noise, rng)

    def central_moment(self, epsilon: float) -> float:
        return self._instance.central_moment(epsilon)


# ============================================
# GROWTH OF THE DESIGN OBJECTIVE
# ============================================


class MaternDesignBound(NamedTuple):
    exponent: float  # eps d / (2 nu + d)
    value: float  # T^exponent, the bound up to its constant


def matern_design_bound(nu: float, d: int, epsilon: float, T: float) -> MaternDesignBound:
    """Growth rate of the optimal design objective for a Matern kernel."""
    if nu <= 0 or d < 1 or epsilon <= 0 or T <= 0:
        raise DomainError("nu, d, epsilon and T must be positive")
    exponent = 0.0 if math.isinf(nu) else epsilon * d / (2.0 * nu + d)
    return MaternDesignBound(exponent=exponent, value=float(T) ** exponent)


class DesignGrowth(NamedTuple):
    horizons: List[int]
    values: List[float]
    slope: float  # fitted d log M / d log T
    bound_exponent: Optional[float]  # Matern exponent, None for other kernels


def empirical_design_growth(
    spec: KernelSpec,
    domain: ActionSet,
    epsilon: float,
    horizons: Sequence[int] = (1_000, 10_000, 100_000),
    max_iters: int = 1000,
    tol: float = 1e-3,
) -> DesignGrowth:
    """
    Objective of the G-optimal design at gamma = T^(-2eps/(1+eps)), beta = 1,
    for each horizon, with the log-log slope across horizons.
    """
    if len(horizons) < 2:
        raise DomainError("need at least two horizons to fit a slope")
    n = domain.size
    values = []
    for T in horizons:
        gamma = float(T) ** (-2.0 * epsilon / (1.0 + epsilon))
        backend = KernelForms(spec, domain.vectors, gamma)
        weights, _ = frank_wolfe(backend, np.full(n, 1.0 / n), max_iters, tol)
        q = backend.forms(weights)
        values.append(float(moment_terms(q, weights, epsilon, 1.0).max()))
    slope = float(np.polyfit(np.log(horizons), np.log(values), 1)[0])
    bound = matern_design_bound(spec.nu, domain.dim, epsilon, horizons[-1]).exponent if spec.kind == KernelKind.MATERN else None
    logger.debug("design growth over %s: %s (slope %.3f)", list(horizons), values, slope)
    return DesignGrowth(horizons=list(horizons), values=values, slope=slope, bound_exponent=bound)
