"""Exploration policies and schedule arithmetic."""

from .policies import (
    PolicyKind,
    PolicySpec,
    action_probabilities,
    decide,
    exploitation_rate,
    select_action,
    softmax_probabilities,
)
from .schedule import ScheduleSpec, epsilon_prime

__all__ = [
    "PolicyKind",
    "PolicySpec",
    "action_probabilities",
    "decide",
    "exploitation_rate",
    "select_action",
    "softmax_probabilities",
    "ScheduleSpec",
    "epsilon_prime",
]
