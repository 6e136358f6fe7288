"""
Discretization of continuous action domains into finite ActionSets.
"""

import itertools
import logging
import math
from typing import Optional

import numpy as np

from ..core.enums import ContinuousDomain
from ..core.errors import DomainError
from ..core.models import ActionSet
from ..environments.action_sets import MAX_GRID_POINTS

logger = logging.getLogger(__name__)


def _capped_resolution(resolution: int, d: int) -> int:
    if resolution**d <= MAX_GRID_POINTS:
        return resolution
    capped = max(2, int(MAX_GRID_POINTS ** (1.0 / d)))
    while (capped + 1) ** d <= MAX_GRID_POINTS:
        capped += 1
    while capped**d > MAX_GRID_POINTS and capped > 2:
        capped -= 1
    logger.warning(
        "grid of %d^%d points exceeds %d; using resolution %d (%d points)",
        resolution, d, MAX_GRID_POINTS, capped, capped**d,
    )
    return capped


def discretize_action_set(domain: ContinuousDomain, resolution: int, d: Optional[int] = None) -> ActionSet:
    """
    Finite covering of a continuous domain.

    Args:
        domain: interval [0,1], hypercube [0,1]^d, unit circle or unit sphere
        resolution: Points per axis (grids) or per turn (circle)
        d: Dimension for the hypercube and the sphere

    Returns:
        ActionSet with labels in generation order

    Raises:
        DomainError: resolution < 2 or a missing/invalid d
    """
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    domain = ContinuousDomain(domain)

    if domain == ContinuousDomain.INTERVAL:
        resolution = _capped_resolution(resolution, 1)
        return ActionSet.from_vectors(np.linspace(0.0, 1.0, resolution)[:, None])

    if domain == ContinuousDomain.CIRCLE or (domain == ContinuousDomain.SPHERE and d == 2):
        resolution = min(resolution, MAX_GRID_POINTS)
        angles = 2.0 * np.pi * np.arange(resolution) / resolution
        return ActionSet.from_vectors(np.column_stack([np.cos(angles), np.sin(angles)]), radius=1.0)

    if d is None or d < 1:
        raise DomainError(f"{domain.value} needs a dimension d >= 1")
    resolution = _capped_resolution(resolution, d)

    if domain == ContinuousDomain.HYPERCUBE:
        axis = np.linspace(0.0, 1.0, resolution)
        grid = np.array(list(itertools.product(axis, repeat=d)))
        return ActionSet.from_vectors(grid, radius=math.sqrt(d))

    # sphere: radial projection of the surface of the cube grid
    axis = np.linspace(-1.0, 1.0, resolution)
    grid = np.array(list(itertools.product(axis, repeat=d)))
    grid = grid[np.max(np.abs(grid), axis=1) >= 1.0 - 1e-12]
    points = np.unique(np.round(grid / np.linalg.norm(grid, axis=1, keepdims=True), 12), axis=0)
    return ActionSet.from_vectors(points, radius=1.0)


def resolution_for_horizon(domain: ContinuousDomain, T: int) -> int:
    """Resolution whose mesh is at most 1/T (per coordinate, or in arc length)."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if ContinuousDomain(domain) == ContinuousDomain.CIRCLE:
        return max(2, math.ceil(2.0 * math.pi * T))
    return T + 1


def discretize_for_horizon(domain: ContinuousDomain, T: int, d: Optional[int] = None) -> ActionSet:
    """
    Covering fine enough that nearest-neighbour means of a 1-Lipschitz
    function are within 1/T, capped at MAX_GRID_POINTS with a warning.
    """
    return discretize_action_set(domain, resolution_for_horizon(domain, T), d)
