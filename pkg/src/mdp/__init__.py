"""MDP abstraction, cliff maze and return-distribution oracle."""

from .core import DEFAULT_STEP_CAP, DiscreteMdp, Step, Trajectory, Transition, rollout, step
from .maze import Action, GridMaze, parse_grid, shortest_path_length
from .oracle import (
    ReturnDistribution,
    policy_q_values,
    return_distribution,
    return_variance_reduction,
)

__all__ = [
    "DEFAULT_STEP_CAP",
    "DiscreteMdp",
    "Step",
    "Trajectory",
    "Transition",
    "rollout",
    "step",
    "Action",
    "GridMaze",
    "parse_grid",
    "shortest_path_length",
    "ReturnDistribution",
    "policy_q_values",
    "return_distribution",
    "return_variance_reduction",
]
