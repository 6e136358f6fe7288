"""
Pseudo-regret accounting.

Gaps are measured against the best fixed action of the environment; ties
in the best action break toward the smallest label.
"""

from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError
from .models import RewardEnvironment


def best_action(instance: RewardEnvironment) -> Tuple[int, float]:
    """
    Maximizer of the mean reward over the action set.

    Args:
        instance: Any reward environment (LinearInstance, KernelInstance, ...)

    Returns:
        (label, value) of the best action; ties go to the smallest label

    Raises:
        DomainError: If the action set is empty
    """
    actions = instance.action_set
    if actions.size == 0:
        raise DomainError("best_action on an empty action set")
    means = np.asarray(instance.mean_rewards(), dtype=np.float64)
    value = float(means.max())
    tied = [label for label, m in zip(actions.labels, means) if m == value]
    return min(tied), value


def gaps(instance: RewardEnvironment) -> np.ndarray:
    """Instantaneous regret of every action, aligned with the action set."""
    _, value = best_action(instance)
    return value - np.asarray(instance.mean_rewards(), dtype=np.float64)


def pseudo_regret(instance: RewardEnvironment, action_labels: Sequence[int]) -> float:
    """
    Sum of per-round gaps for a sequence of played labels.

    Raises:
        DomainError: If a label is not in the action set
    """
    if len(action_labels) == 0:
        return 0.0
    per_action = gaps(instance)
    lookup = {label: i for i, label in enumerate(instance.action_set.labels)}
    total = 0.0
    for label in action_labels:
        index = lookup.get(int(label))
        if index is None:
            raise DomainError(f"unknown action label {label}")
        total += float(per_action[index])
    return total
