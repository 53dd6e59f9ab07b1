"""Tabular Q-learning and checkpoints."""

from .checkpoint import (
    Checkpoint,
    append_checkpoint,
    checkpoint_at,
    load_checkpoint,
    load_checkpoints,
    save_checkpoint,
)
from .qtable import (
    QTable,
    TieRule,
    greedy_action,
    greedy_rollout,
    greedy_rollout_is_optimal,
    update_episode,
)

__all__ = [
    "Checkpoint",
    "append_checkpoint",
    "checkpoint_at",
    "load_checkpoint",
    "load_checkpoints",
    "save_checkpoint",
    "QTable",
    "TieRule",
    "greedy_action",
    "greedy_rollout",
    "greedy_rollout_is_optimal",
    "update_episode",
]
