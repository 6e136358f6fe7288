"""
MED-PE: phased elimination with moment-aware experimental design.

Each phase solves a design over the active arms, samples a budgeted number
of rounds from it, turns the observations into one robust estimate per arm,
fits the parameter by a minimax linear program and drops every arm whose
fitted value trails the leader by more than 4 * 2^-l.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.context import SeedContext, make_generator
from ..core.enums import AlgorithmName, EstimatorKind
from ..core.errors import HtbError
from ..core.models import ActionSet, MomentParams, PhaseSummary, RewardEnvironment, RunRecord
from ..core.regret import gaps
from .design import Design, ExplicitForms, FormBackend, default_fw_iters, frank_wolfe, moment_terms, subgradient_descent
from .estimators import TruncationConfig, fit_in_value_space, robust_mean

logger = logging.getLogger(__name__)

ELIMINATION_TOL = 1e-9
MIN_DESIGN_WEIGHT = 1e-15

FormsFactory = Callable[[ActionSet, float], FormBackend]


# ============================================
# CONFIGURATION
# ============================================


class MedPeConfig(BaseModel):
    """
    Parameters of one MED-PE run.

    gamma defaults to T^(-2eps/(1+eps)); the simplex and l_p-ball presets use
    gamma = 1/T and beta = d^((eps-1)/2).
    """

    model_config = ConfigDict(frozen=True)

    moment: MomentParams
    T: int = Field(ge=1, description="Horizon")
    gamma: Optional[float] = Field(default=None, ge=0)
    beta: float = Field(default=1.0, ge=0)
    estimator: EstimatorKind = EstimatorKind.TRUNCATED_MEAN
    design_tol: float = Field(default=0.05, gt=0)
    design_iters: Optional[int] = Field(default=None, ge=0, description="Frank-Wolfe cap; default ceil(10 d loglog d)")
    refine_iters: int = Field(default=100, ge=0, description="Projected subgradient steps after Frank-Wolfe")
    budget_scale: float = Field(default=1.0, gt=0, description="Multiplier on every phase budget")

    @field_validator("budget_scale")
    @classmethod
    def _finite_scale(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("budget_scale must be finite")
        return v

    @property
    def epsilon(self) -> float:
        return self.moment.epsilon

    @property
    def gamma_value(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return float(self.T) ** (-2.0 * self.epsilon / (1.0 + self.epsilon))

    @classmethod
    def simplex_preset(cls, moment: MomentParams, T: int, d: int, **kwargs) -> "MedPeConfig":
        """gamma = 1/T, beta = d^((eps-1)/2) for the probability simplex."""
        beta = d ** ((moment.epsilon - 1.0) / 2.0)
        return cls(moment=moment, T=T, gamma=1.0 / T, beta=beta, **kwargs)

    @classmethod
    def lp_ball_preset(cls, moment: MomentParams, T: int, d: int, p: float, **kwargs) -> "MedPeConfig":
        """Same constants as the simplex; valid for l_p balls with p <= 1 + eps."""
        if p > 1.0 + moment.epsilon:
            raise ValueError(f"l_p preset needs p <= 1 + eps, got p={p}")
        return cls.simplex_preset(moment, T, d, **kwargs)


class PhaseState(BaseModel):
    """Snapshot of the algorithm at the start of phase ell."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ell: int = Field(ge=1)
    active: ActionSet
    eps_ell: float
    tau_ell: int = Field(ge=1)
    design: Design
    t_used: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_eps(self) -> "PhaseState":
        if self.eps_ell != 2.0 ** (-self.ell):
            raise ValueError("eps_ell must equal 2^-ell")
        return self


# ============================================
# PHASE BUDGET AND ELIMINATION
# ============================================


def phase_budget_value(cfg: MedPeConfig, eps_ell: float, m_value: float, ell: int, n_active: int) -> float:
    """Real-valued budget before the ceiling; inf when it overflows."""
    eps = cfg.epsilon
    if m_value <= 0:
        return 0.0
    log_value = (
        (1.0 + eps) / eps * math.log(32.0)
        + math.log1p(cfg.moment.upsilon) / eps
        - (1.0 + eps) / eps * math.log(eps_ell)
        + math.log(m_value) / eps
        + math.log(math.log(2.0 * ell**2 * n_active * cfg.T))
        + math.log(cfg.budget_scale)
    )
    if log_value > 700.0:
        return math.inf
    return (
        32.0 ** ((1.0 + eps) / eps)
        * (1.0 + cfg.moment.upsilon) ** (1.0 / eps)
        * eps_ell ** (-(1.0 + eps) / eps)
        * m_value ** (1.0 / eps)
        * math.log(2.0 * ell**2 * n_active * cfg.T)
        * cfg.budget_scale
    )


def phase_budget(cfg: MedPeConfig, eps_ell: float, m_value: float, ell: int, n_active: int) -> int:
    """
    Rounds allotted to phase ell.

    ceil(32^((1+eps)/eps) (1+upsilon)^(1/eps) eps_ell^(-(1+eps)/eps)
         M^(1/eps) ln(2 ell^2 n_active T)), natural log.

    A zero budget is clamped to 1; an overflowing one saturates at T.
    """
    value = phase_budget_value(cfg, eps_ell, m_value, ell, n_active)
    if not math.isfinite(value) or value >= 2.0**62:
        logger.warning("phase %d budget overflows; saturating at T=%d", ell, cfg.T)
        return cfg.T
    budget = int(math.ceil(value))
    if budget < 1:
        logger.warning("phase %d budget is %d (M=%.3g); clamping to 1", ell, budget, m_value)
        return 1
    return budget


def eliminate_by_values(active: ActionSet, values: np.ndarray, eps_ell: float) -> ActionSet:
    """Keep arms whose value is within 4 eps_ell of the best one."""
    values = np.asarray(values, dtype=np.float64)
    threshold = float(values.max()) - 4.0 * eps_ell - ELIMINATION_TOL
    keep = [label for label, v in zip(active.labels, values) if v >= threshold]
    return active.subset(keep)


def eliminate(active: ActionSet, theta_hat: np.ndarray, eps_ell: float) -> ActionSet:
    """
    A_(l+1) = {a : theta_hat^T a >= max_a' theta_hat^T a' - 4 eps_ell}.

    The maximizer always survives; exact ties at the threshold survive too.
    """
    return eliminate_by_values(active, active.vectors @ np.asarray(theta_hat, dtype=np.float64), eps_ell)


# ============================================
# RUN LOOP
# ============================================


def explicit_forms(active: ActionSet, gamma: float) -> FormBackend:
    return ExplicitForms(active.vectors, gamma)


def solve_phase_design(backend: FormBackend, cfg: MedPeConfig, dim: int) -> np.ndarray:
    """Frank-Wolfe warm start followed by projected subgradient refinement."""
    n = backend.n_arms
    weights = np.full(n, 1.0 / n)
    if n == 1:
        return weights
    iters = default_fw_iters(dim) if cfg.design_iters is None else cfg.design_iters
    weights, _ = frank_wolfe(backend, weights, iters, cfg.design_tol)
    if cfg.refine_iters > 0:
        weights, _ = subgradient_descent(backend, weights, cfg.epsilon, cfg.beta, cfg.refine_iters, 1e-4)
    return weights


def _sampling_cdf(weights: np.ndarray) -> np.ndarray:
    w = np.where(weights < MIN_DESIGN_WEIGHT, 0.0, weights)
    dropped = int(np.count_nonzero((weights > 0) & (weights < MIN_DESIGN_WEIGHT)))
    if dropped:
        logger.warning("dropping %d design weight(s) below %g", dropped, MIN_DESIGN_WEIGHT)
    cdf = np.cumsum(w / w.sum())
    cdf[-1] = 1.0
    return cdf


def run_phased_elimination(
    environment: RewardEnvironment,
    cfg: MedPeConfig,
    seed: int,
    forms_for: FormsFactory,
    dim: int,
    algorithm: str = AlgorithmName.MEDPE.display_name,
) -> RunRecord:
    """
    The MED-PE loop against any quadratic-form backend.

    Args:
        environment: Reward oracle over a finite action set
        cfg: Algorithm parameters
        seed: 64-bit seed of the run's generator
        forms_for: Builds the quadratic-form backend of an active set
        dim: Dimension used for the default Frank-Wolfe budget
        algorithm: Name stored in the record

    Returns:
        RunRecord with exactly cfg.T rounds and one PhaseSummary per phase
    """
    cfg.moment.check_parameter_norm(environment)
    rng = make_generator(seed)
    universe = environment.action_set
    row_of: Dict[int, int] = {label: i for i, label in enumerate(universe.labels)}
    gap = gaps(environment)
    T = cfg.T
    gamma = cfg.gamma_value
    u_scale = 4.0 * (1.0 + cfg.moment.upsilon)

    t_col = np.arange(1, T + 1, dtype=np.int64)
    phase_col = np.zeros(T, dtype=np.int64)
    label_col = np.zeros(T, dtype=np.int64)
    reward_col = np.zeros(T)
    gap_col = np.zeros(T)
    summaries: List[PhaseSummary] = []

    active = universe
    t = 0
    ell = 0
    logger.info("%s run: seed=%d, T=%d, %d arms", algorithm, seed, T, universe.size)
    try:
        while t < T:
            if active.size == 1:
                row = row_of[active.labels[0]]
                for s in range(t, T):
                    reward_col[s] = environment.draw(row, rng)
                phase_col[t:] = ell + 1
                label_col[t:] = active.labels[0]
                gap_col[t:] = gap[row]
                t = T
                break

            ell += 1
            eps_ell = 2.0**-ell
            n = active.size
            backend = forms_for(active, gamma)
            weights = solve_phase_design(backend, cfg, dim)
            q = backend.forms(weights)
            m_value = float(moment_terms(q, weights, cfg.epsilon, cfg.beta).max())
            state = PhaseState(
                ell=ell,
                active=active,
                eps_ell=eps_ell,
                tau_ell=phase_budget(cfg, eps_ell, m_value, ell, n),
                design=Design.from_weights(active.labels, weights),
                t_used=t,
            )
            tau = state.tau_ell
            n_draw = min(tau, T - t)

            cdf = _sampling_cdf(weights)
            picks = np.empty(n_draw, dtype=np.int64)
            ys = np.empty(n_draw)
            rows = [row_of[label] for label in active.labels]
            for s in range(n_draw):
                i = min(int(np.searchsorted(cdf, rng.random(), side="right")), n - 1)
                picks[s] = i
                ys[s] = environment.draw(rows[i], rng)
            span = slice(t, t + n_draw)
            phase_col[span] = ell
            label_col[span] = np.asarray(active.labels)[picks]
            reward_col[span] = ys
            gap_col[span] = gap[np.asarray(rows)[picks]]
            t += n_draw

            trunc = TruncationConfig(u=u_scale * m_value, epsilon=cfg.epsilon, delta=1.0 / (2 * ell**2 * T * n))
            estimates = np.array([robust_mean(cfg.estimator, q[i, picks] * ys, trunc) for i in range(n)])
            fit = fit_in_value_space(backend.arm_gram(), estimates)
            survivors = eliminate_by_values(active, fit.values, eps_ell)
            eliminated = tuple(sorted(set(active.labels) - set(survivors.labels)))
            summaries.append(
                PhaseSummary(
                    ell=ell,
                    n_active=n,
                    eps_ell=eps_ell,
                    tau_planned=tau,
                    tau_used=n_draw,
                    m_value=m_value,
                    fit_objective=fit.objective,
                    eliminated=eliminated,
                )
            )
            logger.debug(
                "phase %d: |A|=%d tau=%d used=%d M=%.4g fit=%.3g eliminated=%s",
                ell, n, tau, n_draw, m_value, fit.objective, list(eliminated),
            )
            active = survivors
    except HtbError as exc:
        raise exc.with_run_context(ell, t) from None

    record = RunRecord(
        seed=seed,
        algorithm=algorithm,
        horizon=T,
        t=t_col,
        phase=phase_col,
        action_label=label_col,
        reward=reward_col,
        gap=gap_col,
        phases=summaries,
    )
    logger.info("%s run finished: seed=%d, regret=%.4g, phases=%d", algorithm, seed, record.final_regret, ell)
    return record


def run_medpe(
    environment: RewardEnvironment,
    cfg: MedPeConfig,
    seed: Union[int, SeedContext] = 0,
) -> RunRecord:
    """
    Run MED-PE on an environment with explicit action vectors.

    Args:
        environment: LinearInstance, BernoulliRewardInstance or any reward environment
        cfg: Algorithm parameters
        seed: Integer seed or a SeedContext deriving one

    Returns:
        The full RunRecord
    """
    if isinstance(seed, SeedContext):
        seed = seed.seed
    return run_phased_elimination(environment, cfg, seed, explicit_forms, environment.action_set.dim)
