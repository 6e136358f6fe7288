"""
Handlers for the analysis commands: design certificates, bound exponents
and the kernelized simulation on a one-dimensional grid.
"""

import math

import numpy as np

from ..algorithms.design import (
    DesignProblem,
    g_optimal_design,
    lemma_bound_certificate,
    minimize_moment_objective,
    moment_objective,
)
from ..algorithms.kernelized import KernelExpansion, KernelSpec, run_kernel_medpe
from ..algorithms.medpe import MedPeConfig
from ..cli.commands import Invocation, register_command
from ..cli.results import CommandResult, create_success_result
from ..core.context import SeedContext
from ..core.enums import ContinuousDomain
from ..core.errors import ConfigError
from ..core.models import MomentParams
from ..environments.noise import noise_moment
from ..harness.aggregate import loglog_slope
from ..harness.discretize import discretize_action_set
from ..harness.exponents import theory_exponents
from .utils import experiment_config, first_dim, noise_from_values

# f(x) = 0.6 K(0.3, x) - 0.35 K(0.75, x); |f| <= 0.95 for any kernel bounded by 1
KERNEL_SIM_ANCHORS = [[0.3], [0.75]]
KERNEL_SIM_COEFFICIENTS = [0.6, -0.35]


@register_command(
    command_id="design",
    description="Solve the design for one action set and report the objective with its bound certificate",
    options={"dims", "epsilon", "T", "action_set", "arm_count", "action_seed", "preset"},
    examples=["htb design --d 10 --epsilon 0.5 --T 100000"],
)
def design_handler(invocation: Invocation) -> CommandResult:
    cfg = experiment_config(invocation)
    d = first_dim(cfg)
    arms = cfg.environment.actions(d)
    eps = cfg.epsilon
    gamma = float(cfg.T) ** (-2.0 * eps / (1.0 + eps))
    problem = DesignProblem(arms=arms, gamma=gamma, beta=1.0, epsilon=eps)

    g_design = g_optimal_design(arms, gamma)
    refined = minimize_moment_objective(problem, init=g_design)
    certificate = lemma_bound_certificate(arms, eps, cfg.T)
    return create_success_result(
        operation="solved",
        subject=f"design d={d}, {arms.size} arms",
        attributes={
            "gamma": gamma,
            "objective_g_optimal": moment_objective(problem, g_design),
            "objective_refined": moment_objective(problem, refined),
            "support_size": len(refined.support(1e-9)),
            "max_leverage": certificate.max_leverage,
            "certificate_value": certificate.value,
            "bound_d_power": certificate.dimension_bound,
            "bound_2x": certificate.bound,
            "passes": certificate.passes,
        },
    )


@register_command(
    command_id="exponents",
    description="Print the d- and T-exponents of the regret bounds",
    options={"epsilon", "dims", "nu", "n"},
    examples=["htb exponents --epsilon 1 --d 10 --nu 2.5 --n 1000"],
)
def exponents_handler(invocation: Invocation) -> CommandResult:
    eps = invocation.get("epsilon", 0.5)
    d = invocation.get("dims", [10])[0]
    row = theory_exponents(eps, d, nu=invocation.get("nu"), n=invocation.get("n"))
    attributes = {
        "upper d-exponent": row.upper.d_exp,
        "upper T-exponent": row.upper.T_exp,
        "lower d-exponent": row.lower.d_exp,
        "lower T-exponent": row.lower.T_exp,
        "prior upper d-exponent": row.prior_upper.d_exp,
    }
    if row.finite_upper is not None and row.finite_lower is not None:
        attributes["finite upper d-exponent"] = row.finite_upper.d_exp
        attributes["finite upper log n exponent"] = row.finite_upper.log_exp
        attributes["finite lower d-exponent"] = row.finite_lower.d_exp
        if row.finite_lower_value is not None:
            attributes["finite lower d/log factor"] = row.finite_lower_value
    if row.matern_upper_T is not None:
        attributes["matern upper T-exponent"] = row.matern_upper_T
        attributes["matern lower T-exponent"] = row.matern_lower_T
        attributes["matern prior upper T-exponent"] = row.matern_prior_upper_T
    return create_success_result(operation="computed", subject=f"exponents eps={eps:g} d={d}", attributes=attributes)


@register_command(
    command_id="kernel-sim",
    description="Run kernelized MED-PE with a Matern kernel on a grid of [0, 1]",
    options={"nu", "lengthscale", "grid", "T", "epsilon", "upsilon", "master_seed", "noise", "noise_alpha", "noise_sigma", "noise_df", "budget_scale"},
    examples=["htb kernel-sim --nu 2.5 --lengthscale 0.2 --grid 64 --T 200000"],
)
def kernel_sim_handler(invocation: Invocation) -> CommandResult:
    eps = invocation.get("epsilon", 0.5)
    noise = noise_from_values(invocation.values)
    upsilon = invocation.get("upsilon")
    if upsilon is None:
        upsilon = noise_moment(noise, eps)
        if not math.isfinite(upsilon):
            raise ConfigError(f"{noise.describe()} has no finite {1 + eps:g}-moment; set upsilon explicitly")

    spec = KernelSpec.matern(invocation.get("nu", 2.5), invocation.get("lengthscale", 0.2), dim=1)
    domain = discretize_action_set(ContinuousDomain.INTERVAL, invocation.get("grid", 64))
    cfg = MedPeConfig(
        moment=MomentParams(epsilon=eps, upsilon=upsilon),
        T=invocation.get("T", 20_000),
        budget_scale=invocation.get("budget_scale", 1.0),
    )
    seed = SeedContext(master_seed=invocation.get("master_seed", 0), algorithm="kernel_medpe", d=1, rep=0)
    f_star = KernelExpansion(anchors=KERNEL_SIM_ANCHORS, coefficients=KERNEL_SIM_COEFFICIENTS)
    record = run_kernel_medpe(domain, f_star, spec, cfg, seed, noise)

    cumulative = record.cumulative_regret
    times = np.arange(1, cfg.T + 1)
    attributes = {
        "seed": seed.seed,
        "grid": domain.size,
        "final_regret": record.final_regret,
        "phases": len(record.phases),
    }
    if np.count_nonzero(cumulative[cfg.T // 10 :] > 0) >= 2:
        attributes["loglog_slope"] = loglog_slope(times, cumulative, t_min=cfg.T / 10)
    return create_success_result(operation="simulated", subject=f"kernel MED-PE nu={spec.nu:g}", attributes=attributes)
