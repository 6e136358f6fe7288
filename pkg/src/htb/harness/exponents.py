"""
Exponents of the regret bounds, for plotting and for sanity checks.

Each bound reads C * d^d_exp * T^T_exp (up to logarithmic factors); the
finite-arm bounds carry an extra (log n)^log_exp factor.
"""

import math
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from ..core.errors import DomainError


class BoundExponents(BaseModel):
    model_config = ConfigDict(frozen=True)

    d_exp: float
    T_exp: float
    log_exp: float = 0.0

    def evaluate(self, d: float, T: float, n: Optional[float] = None) -> float:
        """Bound shape with unit constant."""
        value = float(d) ** self.d_exp * float(T) ** self.T_exp
        if self.log_exp and n is not None:
            value *= math.log(n) ** self.log_exp
        return value


class TheoryExponents(BaseModel):
    """All bounds for one (epsilon, d, nu, n)."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    d: int
    nu: Optional[float] = None
    n: Optional[int] = None
    upper: BoundExponents = Field(description="MED-PE, any action set")
    lower: BoundExponents = Field(description="Lower bound, infinite action sets")
    prior_upper: BoundExponents = Field(description="Truncation/median-of-means UCB family")
    finite_upper: Optional[BoundExponents] = None
    finite_lower: Optional[BoundExponents] = None
    finite_lower_value: Optional[float] = Field(default=None, description="d^(eps/(1+eps)) (log n / log d)^(eps/(1+eps))")
    matern_upper_T: Optional[float] = None
    matern_lower_T: Optional[float] = None
    matern_prior_upper_T: Optional[float] = None


def theory_exponents(
    epsilon: float,
    d: int,
    nu: Optional[float] = None,
    n: Optional[int] = None,
) -> TheoryExponents:
    """
    Args:
        epsilon: Moment exponent in (0, 1]
        d: Dimension
        nu: Matern smoothness; adds the kernel rows when given
        n: Number of arms; adds the finite-arm rows when given

    Raises:
        DomainError: epsilon outside (0, 1], d < 1, nu <= 0 or n < 2
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    rate = 1.0 / (1.0 + epsilon)
    share = epsilon / (1.0 + epsilon)
    fields: Dict[str, object] = {
        "epsilon": epsilon,
        "d": d,
        "nu": nu,
        "n": n,
        "upper": BoundExponents(d_exp=(1.0 + 3.0 * epsilon) / (2.0 * (1.0 + epsilon)), T_exp=rate),
        "lower": BoundExponents(d_exp=2.0 * share, T_exp=rate),
        "prior_upper": BoundExponents(d_exp=1.0, T_exp=rate),
    }
    if n is not None:
        if n < 2:
            raise DomainError(f"n must be >= 2, got {n}")
        fields["finite_upper"] = BoundExponents(d_exp=0.5, T_exp=rate, log_exp=share)
        fields["finite_lower"] = BoundExponents(d_exp=share, T_exp=rate, log_exp=share)
        if d >= 2:
            fields["finite_lower_value"] = d**share * (math.log(n) / math.log(d)) ** share
    if nu is not None:
        if nu <= 0:
            raise DomainError(f"nu must be positive, got {nu}")
        smooth = 2.0 * nu / (2.0 * nu + d)
        fields["matern_upper_T"] = 1.0 - share * smooth
        fields["matern_lower_T"] = (nu + d * epsilon) / (nu * (1.0 + epsilon) + d * epsilon)
        fields["matern_prior_upper_T"] = d / (2.0 * nu + d) + (2.0 + epsilon) / (2.0 * (1.0 + epsilon))
    return TheoryExponents(**fields)


def exponent_sweep(
    epsilons: Sequence[float],
    d: int,
    nu: Optional[float] = None,
    n: Optional[int] = None,
) -> List[TheoryExponents]:
    """theory_exponents over a grid of epsilon values."""
    return [theory_exponents(eps, d, nu=nu, n=n) for eps in epsilons]
