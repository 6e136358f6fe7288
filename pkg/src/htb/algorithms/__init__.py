"""
Bandit algorithms: robust estimators, experimental design, MED-PE, the
kernelized variant and the truncated-mean UCB baseline.
"""

from .baselines import UcbConfig, run_truncated_ucb
from .design import (
    Design,
    DesignProblem,
    g_optimal_design,
    lemma_bound_certificate,
    minimize_moment_objective,
    moment_objective,
    quadratic_forms,
    special_case_design,
)
from .estimators import (
    ArmEstimates,
    TruncationConfig,
    median_of_means,
    min_distance_fit,
    robust_mean,
    truncated_mean,
)
from .kernelized import (
    KernelExpansion,
    KernelSpec,
    kernel_eval,
    kernel_quadratic_form,
    matern_design_bound,
    run_kernel_medpe,
)
from .medpe import MedPeConfig, eliminate, phase_budget, run_medpe

__all__ = [
    "ArmEstimates",
    "Design",
    "DesignProblem",
    "KernelExpansion",
    "KernelSpec",
    "MedPeConfig",
    "TruncationConfig",
    "UcbConfig",
    "eliminate",
    "g_optimal_design",
    "kernel_eval",
    "kernel_quadratic_form",
    "lemma_bound_certificate",
    "matern_design_bound",
    "median_of_means",
    "min_distance_fit",
    "minimize_moment_objective",
    "moment_objective",
    "phase_budget",
    "quadratic_forms",
    "robust_mean",
    "run_kernel_medpe",
    "run_medpe",
    "run_truncated_ucb",
    "special_case_design",
    "truncated_mean",
]
