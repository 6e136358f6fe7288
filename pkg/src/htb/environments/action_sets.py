"""
Action-set generators.

All generators are deterministic given their seed; labels are 0..n-1 in
generation order.
"""

import itertools
from typing import Optional, Sequence, Union

import numpy as np

from ..core.context import make_generator
from ..core.enums import ActionSetKind
from ..core.errors import DomainError
from ..core.models import ActionSet

MAX_GRID_POINTS = 1_000_000


def simplex_basis(d: int) -> ActionSet:
    """Canonical basis {e_1, ..., e_d}."""
    return ActionSet.from_vectors(np.eye(d), radius=1.0)


def signed_basis(d: int) -> ActionSet:
    """Signed directions ordered e_1, -e_1, e_2, -e_2, ..."""
    vectors = np.zeros((2 * d, d))
    for i in range(d):
        vectors[2 * i, i] = 1.0
        vectors[2 * i + 1, i] = -1.0
    return ActionSet.from_vectors(vectors, radius=1.0)


def lp_ball_grid(d: int, p: float, r: float, points_per_axis: int) -> ActionSet:
    """Grid points of [-r, r]^d lying in the l_p ball of radius r."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    if points_per_axis < 2:
        raise DomainError("points_per_axis must be >= 2")
    if points_per_axis**d > MAX_GRID_POINTS:
        raise DomainError(f"grid of {points_per_axis}^{d} points exceeds {MAX_GRID_POINTS}")
    axis = np.linspace(-r, r, points_per_axis)
    grid = np.array(list(itertools.product(axis, repeat=d)))
    inside = np.linalg.norm(grid, ord=p, axis=1) <= r * (1 + 1e-12)
    vectors = grid[inside]
    radius = max(r, float(np.linalg.norm(vectors, axis=1).max()))
    return ActionSet.from_vectors(vectors, radius=radius)


def sphere_random(d: int, count: int, seed: int, radius: float = 1.0) -> ActionSet:
    """count points drawn uniformly on the sphere of the given radius."""
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = make_generator(seed)
    raw = rng.standard_normal((count, d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return ActionSet.from_vectors(radius * raw / norms, radius=radius)


def hypercube_random(d: int, count: int, seed: int) -> ActionSet:
    """count points drawn uniformly from [0, 1]^d; declared radius sqrt(d)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = make_generator(seed)
    return ActionSet.from_vectors(rng.random((count, d)), radius=float(np.sqrt(d)))


def make_action_set(
    kind: Union[ActionSetKind, str],
    d: int,
    seed: int = 0,
    *,
    p: float = 2.0,
    r: float = 1.0,
    points_per_axis: int = 5,
    count: int = 10,
    vectors: Optional[Sequence[Sequence[float]]] = None,
) -> ActionSet:
    """
    Build an action set by kind.

    Args:
        kind: One of ActionSetKind
        d: Dimension
        seed: Seed for the random kinds
        p, r, points_per_axis: lp_ball_grid parameters
        count: Number of points for sphere_random and hypercube_random
        vectors: Rows for the explicit kind

    Returns:
        The generated ActionSet
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    try:
        kind = ActionSetKind(kind)
    except ValueError:
        raise DomainError(f"unknown action set kind '{kind}'") from None

    if kind == ActionSetKind.SIMPLEX_BASIS:
        return simplex_basis(d)
    if kind == ActionSetKind.SIGNED_BASIS:
        return signed_basis(d)
    if kind == ActionSetKind.LP_BALL_GRID:
        return lp_ball_grid(d, p, r, points_per_axis)
    if kind == ActionSetKind.SPHERE_RANDOM:
        return sphere_random(d, count, seed, radius=r)
    if kind == ActionSetKind.HYPERCUBE_RANDOM:
        return hypercube_random(d, count, seed)
    if vectors is None:
        raise DomainError("explicit action set needs vectors")
    array = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if array.shape[1] != d:
        raise DomainError(f"explicit vectors have dimension {array.shape[1]}, expected {d}")
    return ActionSet.from_vectors(array)
