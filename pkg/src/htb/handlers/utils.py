"""
Utility functions for command handlers.

Turn the resolved option values of an invocation into the typed objects the
library works with: noise laws, experiment configs, moment parameters.
"""

from typing import Any, Dict

from ..cli.commands import Invocation
from ..core.enums import NoiseKind
from ..core.models import NoiseSpec
from ..harness.config import ExperimentConfig, build_config

CONFIG_KEYS = {
    "algorithms",
    "dims",
    "T",
    "repetitions",
    "master_seed",
    "epsilon",
    "upsilon",
    "output_dir",
    "checkpoint_stride",
    "jobs",
    "estimator",
    "budget_scale",
    "ucb_width_scale",
    "ucb_regularizer",
    "action_set",
    "arm_count",
    "action_seed",
}


def noise_from_values(values: Dict[str, Any]) -> NoiseSpec:
    """
    NoiseSpec from the noise options; centered Pareto(2, 1) when none are set.

    Args:
        values: Resolved option values

    Returns:
        The noise law
    """
    kind = NoiseKind(values.get("noise") or NoiseKind.CENTERED_PARETO.value)
    if kind == NoiseKind.ZERO:
        return NoiseSpec.zero()
    if kind == NoiseKind.STUDENT_T:
        return NoiseSpec.student_t(values.get("noise_df") or 3.0)
    if kind == NoiseKind.GAUSSIAN:
        return NoiseSpec.gaussian(values.get("noise_sigma") or 1.0)
    return NoiseSpec.centered_pareto(values.get("noise_alpha") or 2.0, values.get("noise_sigma") or 1.0)


def experiment_config(invocation: Invocation) -> ExperimentConfig:
    """
    Validated ExperimentConfig from an invocation.

    Raises:
        ConfigError: A value is out of range
    """
    values = {k: v for k, v in invocation.values.items() if k in CONFIG_KEYS and v is not None}
    values["noise"] = noise_from_values(invocation.values)
    return build_config(values)


def first_dim(config: ExperimentConfig) -> int:
    return config.dims[0]
