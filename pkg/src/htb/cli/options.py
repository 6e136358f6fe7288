"""
Option registry for the htb command line and config files.

Every configurable value is an OptionWord: its id is the canonical key,
aliases and abbreviations are accepted spellings, the section says where it
lives in a config file and the value kind says how its text is parsed. The
registry is the vocabulary both the flag parser and the config-file parser
resolve against.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core.enums import ActionSetKind, EstimatorKind, NoiseKind, PlotFormat, PresetName

# ==================== SECTIONS AND VALUE KINDS ====================

SECTIONS = ("experiment", "environment", "medpe", "ucb", "kernel", "report")

VALUE_KINDS = ("int", "float", "str", "path", "int_list", "algorithm_list", "choice")


# ==================== OPTION WORD ====================


class OptionWord(BaseModel):
    """One configurable value."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(description="Canonical key, also the ExperimentConfig field when one exists")
    description: str
    section: str = Field(description="Config-file section holding the key")
    kind: str = Field(description="How the raw text is parsed; one of VALUE_KINDS")
    flag: Optional[str] = Field(default=None, description="Command-line flag, when the option has one")
    aliases: List[str] = Field(default_factory=list)
    abbreviations: List[str] = Field(default_factory=list)
    choices: List[str] = Field(default_factory=list, description="Allowed values for kind='choice'")


# ==================== OPTION REGISTRATIONS ====================

OPTIONS: List[OptionWord] = [
    # ==================== EXPERIMENT ====================
    OptionWord(
        id="algorithms",
        description="Algorithms to run (medpe, crtm_style_ucb)",
        section="experiment",
        kind="algorithm_list",
        flag="--algo",
        aliases=["algorithm", "algo", "algos"],
    ),
    OptionWord(
        id="dims",
        description="Dimensions d, comma separated",
        section="experiment",
        kind="int_list",
        flag="--d",
        aliases=["d", "dim", "dimensions"],
    ),
    OptionWord(id="T", description="Horizon", section="experiment", kind="int", flag="--T", aliases=["horizon"]),
    OptionWord(
        id="repetitions",
        description="Repetitions per (algorithm, d)",
        section="experiment",
        kind="int",
        flag="--reps",
        aliases=["reps", "runs"],
    ),
    OptionWord(
        id="master_seed",
        description="Master seed of every derived run seed",
        section="experiment",
        kind="int",
        flag="--seed",
        aliases=["seed"],
    ),
    OptionWord(
        id="epsilon",
        description="Moment exponent: (1+epsilon)-moments are finite",
        section="experiment",
        kind="float",
        flag="--epsilon",
        aliases=["eps"],
    ),
    OptionWord(
        id="upsilon",
        description="Bound on the (1+epsilon)-moment; default is the noise's analytic moment",
        section="experiment",
        kind="float",
        flag="--upsilon",
        aliases=["moment_bound"],
    ),
    OptionWord(
        id="output_dir",
        description="Output directory (HTB_OUT when unset)",
        section="experiment",
        kind="path",
        flag="--out",
        aliases=["out", "output"],
    ),
    OptionWord(
        id="checkpoint_stride",
        description="Rounds between regret checkpoints in run files",
        section="experiment",
        kind="int",
        flag="--checkpoint-stride",
        aliases=["stride", "checkpoint-stride"],
    ),
    OptionWord(id="jobs", description="Worker processes", section="experiment", kind="int", flag="--jobs", abbreviations=["j"]),
    # ==================== ENVIRONMENT ====================
    OptionWord(
        id="action_set",
        description="Action-set generator",
        section="environment",
        kind="choice",
        aliases=["actions"],
        choices=[ActionSetKind.SIGNED_BASIS.value, ActionSetKind.SIMPLEX_BASIS.value, ActionSetKind.SPHERE_RANDOM.value],
    ),
    OptionWord(id="arm_count", description="Arms of random action sets; 0 means 2d", section="environment", kind="int", aliases=["arms"]),
    OptionWord(id="action_seed", description="Seed of random action sets", section="environment", kind="int"),
    OptionWord(
        id="noise",
        description="Noise family",
        section="environment",
        kind="choice",
        flag="--noise",
        aliases=["noise_kind"],
        choices=[k.value for k in NoiseKind],
    ),
    OptionWord(id="noise_alpha", description="Pareto tail index", section="environment", kind="float", aliases=["alpha"]),
    OptionWord(id="noise_sigma", description="Pareto/Gaussian scale", section="environment", kind="float", aliases=["sigma"]),
    OptionWord(id="noise_df", description="Student-t degrees of freedom", section="environment", kind="float", aliases=["df"]),
    # ==================== ALGORITHMS ====================
    OptionWord(
        id="estimator",
        description="Robust mean estimator of MED-PE",
        section="medpe",
        kind="choice",
        choices=[k.value for k in EstimatorKind],
    ),
    OptionWord(id="budget_scale", description="Multiplier on every MED-PE phase budget", section="medpe", kind="float"),
    OptionWord(
        id="ucb_width_scale",
        description="Width constant c of the UCB baseline",
        section="ucb",
        kind="float",
        aliases=["width_scale", "c"],
    ),
    OptionWord(
        id="ucb_regularizer",
        description="Ridge parameter of the UCB baseline",
        section="ucb",
        kind="float",
        aliases=["regularizer", "ridge"],
    ),
    # ==================== KERNEL ====================
    OptionWord(id="nu", description="Matern smoothness", section="kernel", kind="float", flag="--nu"),
    OptionWord(id="lengthscale", description="Kernel lengthscale", section="kernel", kind="float", flag="--lengthscale", aliases=["l"]),
    OptionWord(id="grid", description="Points of the [0, 1] grid", section="kernel", kind="int", flag="--grid", aliases=["grid_size"]),
    # ==================== REPORTING ====================
    OptionWord(id="n", description="Number of arms for the finite-arm bounds", section="report", kind="int", flag="--n", aliases=["n_arms"]),
    OptionWord(
        id="format",
        description="Plot-data format",
        section="report",
        kind="choice",
        flag="--format",
        choices=[f.value for f in PlotFormat],
    ),
    OptionWord(
        id="preset",
        description="Preset experiment",
        section="experiment",
        kind="choice",
        flag="--preset",
        choices=[p.value for p in PresetName],
    ),
]

OPTION_REGISTRY: Dict[str, OptionWord] = {option.id: option for option in OPTIONS}


# ==================== HELPER FUNCTIONS ====================


def get_option(option_id: str) -> Optional[OptionWord]:
    """Get an option by its canonical id"""
    return OPTION_REGISTRY.get(option_id)


def get_all_options() -> Dict[str, OptionWord]:
    return OPTION_REGISTRY


def get_options_by_section(section: str) -> Dict[str, OptionWord]:
    return {k: v for k, v in OPTION_REGISTRY.items() if v.section == section}


def get_flag_options() -> Dict[str, OptionWord]:
    """Options with a command-line flag"""
    return {k: v for k, v in OPTION_REGISTRY.items() if v.flag}
