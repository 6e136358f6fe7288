"""
Reward environments: noise laws, action-set generators and the hard
instances behind the lower bounds.
"""

from .action_sets import make_action_set, signed_basis
from .instances import (
    BernoulliRewardInstance,
    certify_moment,
    grouped_finite_instance,
    hypercube_pair_instance,
    unit_ball_instance,
)
from .noise import noise_moment, sample_noise

__all__ = [
    "BernoulliRewardInstance",
    "certify_moment",
    "grouped_finite_instance",
    "hypercube_pair_instance",
    "make_action_set",
    "noise_moment",
    "sample_noise",
    "signed_basis",
    "unit_ball_instance",
]
