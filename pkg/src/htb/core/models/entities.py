"""
Domain models for HTB.

Pydantic models for the objects every module shares. All models are frozen;
numpy payloads are copied on construction and marked read-only.
"""

from __future__ import annotations

from typing import Iterator, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..enums import NoiseKind
from ..errors import DomainError


def _frozen_array(value, dtype=np.float64) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


# ============================================
# BASE MODEL
# ============================================


class DomainModel(BaseModel):
    """Base class for all domain models"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ============================================
# ACTION SET
# ============================================


class ActionSet(DomainModel):
    """
    Finite list of d-dimensional action vectors with stable integer labels.

    Houses both the universe A and every active subset A_l; labels survive
    subsetting so an arm keeps its identity across phases.
    """

    dim: int = Field(gt=0, description="Ambient dimension d")
    vectors: np.ndarray = Field(description="(n, d) array of actions, float64")
    labels: Tuple[int, ...] = Field(description="Unique integer id per row of vectors")
    radius: float = Field(default=1.0, gt=0, description="Declared bound on the Euclidean norm of every action")

    @field_validator("vectors", mode="before")
    @classmethod
    def _as_matrix(cls, v) -> np.ndarray:
        array = np.array(v, dtype=np.float64)
        if array.ndim == 1:
            array = array.reshape(1, -1) if array.size else array.reshape(0, 0)
        if array.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        return _frozen_array(array)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ActionSet":
        n = self.vectors.shape[0]
        if n == 0:
            raise DomainError("action set must be non-empty")
        if self.vectors.shape[1] != self.dim:
            raise DomainError(f"action vectors have length {self.vectors.shape[1]}, expected dim={self.dim}")
        if len(self.labels) != n:
            raise DomainError(f"{len(self.labels)} labels for {n} actions")
        if len(set(self.labels)) != n:
            raise DomainError("action labels must be unique")
        if not np.all(np.isfinite(self.vectors)):
            raise DomainError("action vectors must be finite")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(norms > self.radius * (1 + 1e-9)):
            raise DomainError(f"action norm {norms.max():.6g} exceeds declared radius {self.radius:.6g}")
        return self

    @classmethod
    def from_vectors(
        cls,
        vectors,
        labels: Optional[Sequence[int]] = None,
        radius: Optional[float] = None,
    ) -> "ActionSet":
        """Build an action set; labels default to 0..n-1, radius to max(1, max norm)."""
        array = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if array.size == 0:
            raise DomainError("action set must be non-empty")
        if labels is None:
            labels = range(array.shape[0])
        if radius is None:
            radius = max(1.0, float(np.linalg.norm(array, axis=1).max()))
        return cls(dim=array.shape[1], vectors=array, labels=tuple(int(l) for l in labels), radius=radius)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.size

    def index_of(self, label: int) -> int:
        """Row index of a label; unknown labels are a domain error."""
        try:
            return self.labels.index(int(label))
        except ValueError:
            raise DomainError(f"unknown action label {label}") from None

    def vector(self, label: int) -> np.ndarray:
        return self.vectors[self.index_of(label)]

    def subset(self, labels: Sequence[int]) -> "ActionSet":
        """Sub-action-set keeping the given labels in this set's order."""
        keep = set(int(l) for l in labels)
        unknown = keep - set(self.labels)
        if unknown:
            raise DomainError(f"unknown action labels {sorted(unknown)}")
        rows = [i for i, l in enumerate(self.labels) if l in keep]
        return ActionSet(
            dim=self.dim,
            vectors=self.vectors[rows],
            labels=tuple(self.labels[i] for i in rows),
            radius=self.radius,
        )

    def is_subset_of(self, other: "ActionSet") -> bool:
        return set(self.labels) <= set(other.labels)


# ============================================
# MOMENT PARAMETERS
# ============================================


class MomentParams(DomainModel):
    """
    (epsilon, upsilon, b): tail exponent, (1+eps)-moment bound of the noise
    and norm bound on theta*.

    upsilon = 0 is accepted for noiseless runs.
    """

    epsilon: float = Field(gt=0, le=1, description="Tail exponent; eps=1 means finite variance")
    upsilon: float = Field(ge=0, description="Bound on E|eta|^(1+eps)")
    b: float = Field(default=1.0, gt=0, description="Bound on ||theta*||_2")

    @field_validator("upsilon", "b")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not np.isfinite(v):
            raise ValueError("must be finite")
        return v

    def check_parameter_norm(self, environment) -> None:
        """Raise DomainError when the environment's parameter is longer than b."""
        theta = getattr(environment, "theta_star", getattr(environment, "theta", None))
        if theta is None:
            return
        norm = float(np.linalg.norm(theta))
        if norm > self.b * (1 + 1e-9):
            raise DomainError(f"||theta*||_2 = {norm:.6g} exceeds b = {self.b:.6g}")


# ============================================
# NOISE
# ============================================


class NoiseSpec(DomainModel):
    """
    Additive noise law.

    centered_pareto uses (alpha, sigma), student_t uses df, gaussian uses sigma.
    Sampling and moment certification live in environments.noise.
    """

    kind: NoiseKind = NoiseKind.ZERO
    alpha: float = Field(default=2.0, gt=1, description="Pareto II shape; alpha > 1 for a finite mean")
    sigma: float = Field(default=1.0, gt=0, description="Pareto II scale or Gaussian standard deviation")
    df: float = Field(default=3.0, gt=0, description="Student-t degrees of freedom")

    @classmethod
    def zero(cls) -> "NoiseSpec":
        return cls(kind=NoiseKind.ZERO)

    @classmethod
    def centered_pareto(cls, alpha: float = 2.0, sigma: float = 1.0) -> "NoiseSpec":
        return cls(kind=NoiseKind.CENTERED_PARETO, alpha=alpha, sigma=sigma)

    @classmethod
    def student_t(cls, df: float) -> "NoiseSpec":
        return cls(kind=NoiseKind.STUDENT_T, df=df)

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "NoiseSpec":
        return cls(kind=NoiseKind.GAUSSIAN, sigma=sigma)

    def describe(self) -> str:
        if self.kind == NoiseKind.CENTERED_PARETO:
            return f"centered_pareto(alpha={self.alpha:g}, sigma={self.sigma:g})"
        if self.kind == NoiseKind.STUDENT_T:
            return f"student_t(df={self.df:g})"
        if self.kind == NoiseKind.GAUSSIAN:
            return f"gaussian(sigma={self.sigma:g})"
        return "zero"


# ============================================
# ENVIRONMENTS
# ============================================


@runtime_checkable
class RewardEnvironment(Protocol):
    """Anything that can serve rewards for a finite action set."""

    @property
    def action_set(self) -> ActionSet: ...

    def mean_rewards(self) -> np.ndarray: ...

    def draw(self, index: int, rng: np.random.Generator) -> float: ...

    def central_moment(self, epsilon: float) -> float: ...


class LinearInstance(DomainModel):
    """
    Linear bandit instance: y = <theta*, x> + eta.
    """

    theta_star: np.ndarray
    action_set: ActionSet
    noise: NoiseSpec = Field(default_factory=NoiseSpec.zero)

    @field_validator("theta_star", mode="before")
    @classmethod
    def _as_vector(cls, v) -> np.ndarray:
        return _frozen_array(np.ravel(np.asarray(v, dtype=np.float64)))

    @model_validator(mode="after")
    def _check_bounds(self) -> "LinearInstance":
        if self.theta_star.shape[0] != self.action_set.dim:
            raise DomainError(
                f"theta_star has length {self.theta_star.shape[0]}, action set dim is {self.action_set.dim}"
            )
        peak = float(np.max(np.abs(self.action_set.vectors @ self.theta_star)))
        if peak > 1 + 1e-9:
            raise DomainError(f"max |a^T theta*| = {peak:.6g} exceeds 1")
        return self

    def mean_rewards(self) -> np.ndarray:
        return self.action_set.vectors @ self.theta_star

    def draw(self, index: int, rng: np.random.Generator) -> float:
        from ...environments.noise import sample_noise

        mean = float(self.action_set.vectors[index] @ self.theta_star)
        return mean + sample_noise(self.noise, rng)

    def central_moment(self, epsilon: float) -> float:
        """E|y - E y|^(1+eps); the same at every action for additive noise."""
        from ...environments.noise import noise_moment

        return noise_moment(self.noise, epsilon)

    def with_action_set(self, action_set: ActionSet) -> "LinearInstance":
        return LinearInstance(theta_star=self.theta_star, action_set=action_set, noise=self.noise)


# ============================================
# RUN RECORDS
# ============================================


class PhaseSummary(DomainModel):
    """Book-keeping of one elimination phase."""

    ell: int = Field(ge=1)
    n_active: int = Field(ge=1)
    eps_ell: float
    tau_planned: int = Field(ge=1)
    tau_used: int = Field(ge=0)
    m_value: float
    fit_objective: Optional[float] = None
    eliminated: Tuple[int, ...] = ()


class RunRecord(DomainModel):
    """
    Per-round trajectory of one run with its seed provenance.

    Stored column-wise; `rounds` yields (t, phase, action_label, reward, gap)
    tuples for callers that want rows.
    """

    seed: int = Field(ge=0, lt=2**64)
    algorithm: str
    horizon: int = Field(ge=1)
    t: np.ndarray
    phase: np.ndarray
    action_label: np.ndarray
    reward: np.ndarray
    gap: np.ndarray
    phases: List[PhaseSummary] = Field(default_factory=list)

    @field_validator("t", "phase", "action_label", mode="before")
    @classmethod
    def _int_column(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=np.int64)

    @field_validator("reward", "gap", mode="before")
    @classmethod
    def _float_column(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=np.float64)

    @model_validator(mode="after")
    def _check_columns(self) -> "RunRecord":
        n = self.t.shape[0]
        for name in ("phase", "action_label", "reward", "gap"):
            if getattr(self, name).shape[0] != n:
                raise DomainError(f"column '{name}' has a different length than 't'")
        if n > self.horizon:
            raise DomainError(f"record has {n} rounds, more than the horizon {self.horizon}")
        return self

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.gap)

    @property
    def final_regret(self) -> float:
        return float(self.gap.sum())

    @property
    def rounds(self) -> Iterator[Tuple[int, int, int, float, float]]:
        for row in zip(self.t.tolist(), self.phase.tolist(), self.action_label.tolist(),
                       self.reward.tolist(), self.gap.tolist()):
            yield row

    def checkpoints(self, stride: int) -> List[Tuple[int, float]]:
        """Cumulative regret every `stride` rounds plus the final round."""
        if stride < 1:
            raise DomainError("checkpoint stride must be >= 1")
        n = len(self)
        if n == 0:
            return []
        cumulative = self.cumulative_regret
        points = list(range(stride, n + 1, stride))
        if not points or points[-1] != n:
            points.append(n)
        return [(t, float(cumulative[t - 1])) for t in points]
