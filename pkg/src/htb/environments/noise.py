"""
Additive noise generators and their certified (1+eps)-moments.
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import integrate, special

from ..core.enums import NoiseKind
from ..core.errors import DomainError, NumericError
from ..core.models import NoiseSpec

logger = logging.getLogger(__name__)


def pareto_mean(alpha: float, sigma: float) -> float:
    """Mean of Pareto II(alpha, sigma); the centering shift."""
    return sigma / (alpha - 1.0)


def sample_noise(
    spec: NoiseSpec, rng: np.random.Generator, size: Optional[int] = None
) -> Union[float, np.ndarray]:
    """
    Draw noise from spec.

    Args:
        spec: Noise law
        rng: Generator owned by the run
        size: None for one float, otherwise an array of that many draws

    Returns:
        A float, or a float64 array when size is given

    Raises:
        DomainError: Student-t with df <= 1 (no mean)
    """
    if spec.kind == NoiseKind.ZERO:
        return 0.0 if size is None else np.zeros(size)
    if spec.kind == NoiseKind.CENTERED_PARETO:
        # numpy's pareto is Pareto II (Lomax) with unit scale
        draw = spec.sigma * rng.pareto(spec.alpha, size) - pareto_mean(spec.alpha, spec.sigma)
    elif spec.kind == NoiseKind.STUDENT_T:
        if spec.df <= 1:
            raise DomainError(f"student_t with df={spec.df:g} has no mean")
        draw = rng.standard_t(spec.df, size)
    elif spec.kind == NoiseKind.GAUSSIAN:
        draw = rng.normal(0.0, spec.sigma, size)
    else:
        raise DomainError(f"unknown noise kind {spec.kind}")
    return float(draw) if size is None else np.asarray(draw, dtype=np.float64)


@lru_cache(maxsize=256)
def _pareto_abs_moment(alpha: float, sigma: float, power: float) -> float:
    mu = pareto_mean(alpha, sigma)

    def integrand(p: float) -> float:
        return abs(p - mu) ** power * (alpha / sigma) * (1.0 + p / sigma) ** (-(alpha + 1.0))

    below, err_below = integrate.quad(integrand, 0.0, mu)
    above, err_above = integrate.quad(integrand, mu, np.inf, limit=200)
    value = below + above
    if not np.isfinite(value) or err_below + err_above > 1e-4 * max(1.0, value):
        raise NumericError(
            "moment integral did not converge",
            {"alpha": alpha, "sigma": sigma, "power": power, "abserr": err_below + err_above},
        )
    return value


def noise_moment(spec: NoiseSpec, epsilon: float) -> float:
    """
    Certified E|eta|^(1+eps) of the noise law.

    Infinite moments are returned as math.inf rather than raised; callers
    decide whether that is an error.
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")
    power = 1.0 + epsilon
    if spec.kind == NoiseKind.ZERO:
        return 0.0
    if spec.kind == NoiseKind.CENTERED_PARETO:
        if power >= spec.alpha:
            return math.inf
        return _pareto_abs_moment(spec.alpha, spec.sigma, power)
    if spec.kind == NoiseKind.STUDENT_T:
        nu = spec.df
        if nu <= 1:
            raise DomainError(f"student_t with df={nu:g} has no mean")
        if power >= nu:
            return math.inf
        return float(
            nu ** (power / 2)
            * special.gamma((power + 1) / 2)
            * special.gamma((nu - power) / 2)
            / (math.sqrt(math.pi) * special.gamma(nu / 2))
        )
    if spec.kind == NoiseKind.GAUSSIAN:
        return float(spec.sigma**power * 2 ** (power / 2) * special.gamma((power + 1) / 2) / math.sqrt(math.pi))
    raise DomainError(f"unknown noise kind {spec.kind}")
