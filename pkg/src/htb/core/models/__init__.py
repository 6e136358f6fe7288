"""
Typed domain models for HTB.

Contains the pydantic models shared by all modules: action sets, moment
parameters, noise specifications, linear instances and run records.
"""

from .entities import (
    ActionSet,
    LinearInstance,
    MomentParams,
    NoiseSpec,
    PhaseSummary,
    RewardEnvironment,
    RunRecord,
)

__all__ = [
    "ActionSet",
    "LinearInstance",
    "MomentParams",
    "NoiseSpec",
    "PhaseSummary",
    "RewardEnvironment",
    "RunRecord",
]
