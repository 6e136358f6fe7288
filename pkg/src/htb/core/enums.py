"""
Enum definitions for HTB.

Defines estimator kinds, noise families, kernel families, action-set
generators, hard-instance flavors, algorithm names and output formats used
throughout the library, the harness and the command line.
"""

from enum import Enum


### ENUM for estimation


class EstimatorKind(str, Enum):
    """Robust mean estimator used for the per-arm W values"""
    TRUNCATED_MEAN = "truncated_mean"
    MEDIAN_OF_MEANS = "median_of_means"


### ENUM for environments


class NoiseKind(str, Enum):
    """Additive noise families"""
    CENTERED_PARETO = "centered_pareto"  # Pareto II (Lomax) shifted to zero mean
    STUDENT_T = "student_t"
    GAUSSIAN = "gaussian"
    ZERO = "zero"


class ActionSetKind(str, Enum):
    """Generators accepted by make_action_set"""
    SIMPLEX_BASIS = "simplex_basis"  # {e_i}
    SIGNED_BASIS = "signed_basis"  # {+e_i, -e_i}
    LP_BALL_GRID = "lp_ball_grid"
    SPHERE_RANDOM = "sphere_random"
    HYPERCUBE_RANDOM = "hypercube_random"
    EXPLICIT = "explicit"


class InstanceFlavor(str, Enum):
    """Constructions of the lower-bound reward laws"""
    HYPERCUBE_PAIR = "hypercube_pair"
    GROUPED_FINITE = "grouped_finite"
    UNIT_BALL3 = "unit_ball3"


class ContinuousDomain(str, Enum):
    """Continuous action sets that the harness can discretize"""
    INTERVAL = "interval"  # [0,1]
    HYPERCUBE = "hypercube"  # [0,1]^d
    CIRCLE = "circle"  # unit circle in R^2
    SPHERE = "sphere"  # unit sphere in R^d


### ENUM for design


class SpecialDesignKind(str, Enum):
    """Closed-form designs over the canonical basis"""
    SIMPLEX = "simplex"
    LP_BALL = "lp_ball"


### ENUM for kernels


class KernelKind(str, Enum):
    MATERN = "matern"
    LINEAR = "linear"
    RBF = "rbf"


### ENUM for the harness


class AlgorithmName(str, Enum):
    """Algorithms the harness can run; the baseline is CRTM-style, not CRTM itself"""
    MEDPE = "medpe"
    CRTM_STYLE_UCB = "crtm_style_ucb"

    @property
    def display_name(self) -> str:
        return {"medpe": "med-pe", "crtm_style_ucb": "crtm-style-ucb"}[self.value]


class PresetName(str, Enum):
    APPENDIX_D = "appendix-d"
    SMOKE = "smoke"


class PlotFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ExitCode(int, Enum):
    """Process exit codes of the htb command"""
    SUCCESS = 0
    CONFIG_ERROR = 2
    NUMERIC_ERROR = 3
    IO_ERROR = 4
