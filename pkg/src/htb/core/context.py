"""
Seed context for HTB runs.

Every run owns a generator derived from (master_seed, algorithm, d, rep).
The context is frozen; the harness builds one per repetition and records the
derived seed in the manifest so a single run can be replayed in isolation.
"""

from __future__ import annotations

import hashlib
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, field_validator
from pydantic.config import ConfigDict

_SEED_BYTES = 8


class SeedContext(BaseModel):
    """Provenance of one run's randomness.

    The derived seed is a BLAKE2b digest of the four fields, so runs are
    independent of scheduling order and of how many other runs exist.
    """

    model_config = ConfigDict(frozen=True)

    master_seed: int = 0
    algorithm: str = "medpe"
    d: int = 1
    rep: int = 0

    @field_validator("master_seed")
    @classmethod
    def _validate_master_seed(cls, v: int) -> int:
        if not 0 <= v < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        return v

    @field_validator("d")
    @classmethod
    def _validate_d(cls, v: int) -> int:
        if v < 1:
            raise ValueError("d must be >= 1")
        return v

    @field_validator("rep")
    @classmethod
    def _validate_rep(cls, v: int) -> int:
        if v < 0:
            raise ValueError("rep must be >= 0")
        return v

    @property
    def seed(self) -> int:
        """64-bit seed of this run"""
        payload = f"{self.master_seed}|{self.algorithm}|{self.d}|{self.rep}".encode()
        digest = hashlib.blake2b(payload, digest_size=_SEED_BYTES).digest()
        return int.from_bytes(digest, "little")

    def generator(self) -> np.random.Generator:
        return make_generator(self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return {**self.model_dump(), "seed": self.seed}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SeedContext":
        return cls(**{k: v for k, v in data.items() if k != "seed"})


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
