"""
Shared fixtures for the HTB test suite.
"""

import numpy as np
import pytest

from htb.core.context import make_generator
from htb.core.models import ActionSet, LinearInstance, MomentParams, NoiseSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return make_generator(12345)


@pytest.fixture
def basis2() -> ActionSet:
    return ActionSet.from_vectors(np.eye(2))


@pytest.fixture
def two_arm_instance(basis2) -> LinearInstance:
    """theta* = (1, 0) on {e1, e2}, noiseless."""
    return LinearInstance(theta_star=[1.0, 0.0], action_set=basis2, noise=NoiseSpec.zero())


@pytest.fixture
def finite_variance() -> MomentParams:
    return MomentParams(epsilon=1.0, upsilon=0.0)


@pytest.fixture(autouse=True)
def _no_htb_out(monkeypatch):
    monkeypatch.delenv("HTB_OUT", raising=False)
