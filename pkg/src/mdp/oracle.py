"""
Brute-force return distributions for small MDPs.

Used to check that the action-variance of Q equals the reduction in return
variance obtained by fixing the first action (law of total variance).
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..errors import BudgetExceededError, ContractError
from .core import DiscreteMdp

logger = logging.getLogger(__name__)

MAX_TRAJECTORIES = 10_000
RESIDUAL_MASS = 1e-9


@dataclass
class ReturnDistribution:
    """Discrete distribution over discounted returns."""
    probabilities: Dict[float, float] = field(default_factory=dict)

    def total_mass(self) -> float:
        return float(sum(self.probabilities.values()))

    def mean(self) -> float:
        return float(sum(c * p for c, p in self.probabilities.items()))

    def variance(self) -> float:
        mean = self.mean()
        return float(sum(p * (c - mean) ** 2 for c, p in self.probabilities.items()))


def _policy_matrix(env: DiscreteMdp, policy) -> np.ndarray:
    """Uniform when ``policy`` is None, else validated [S, A] probabilities."""
    if policy is None:
        return np.full((env.state_count, env.action_count), 1.0 / env.action_count)
    pi = np.asarray(policy, dtype=float)
    if pi.shape != (env.state_count, env.action_count):
        raise ContractError(f"policy shape {pi.shape} does not match the MDP")
    if np.any(pi < 0) or not np.allclose(pi.sum(axis=1), 1.0, atol=1e-12):
        raise ContractError("policy rows must be probability vectors")
    return pi


def return_distribution(
    env: DiscreteMdp,
    s: int,
    policy=None,
    horizon: Optional[int] = None,
    first_action: Optional[int] = None,
    max_trajectories: int = MAX_TRAJECTORIES,
) -> ReturnDistribution:
    """
    Exact distribution of the return C from ``s``.

    Paths are expanded level by level and merged when they share state,
    accumulated return and discount. Expansion stops when every path has
    terminated, the horizon is reached, or the still-running probability mass
    drops below 1e-9; paths cut early keep their partial return, so the
    distribution always carries the full unit mass.

    Args:
        env: The MDP.
        s: Start state.
        policy: [S, A] action probabilities (uniform if None).
        horizon: Maximum number of steps (unbounded if None).
        first_action: Force the first action, giving p(c | s, a).
        max_trajectories: Enumeration budget on concurrently tracked paths.

    Raises:
        BudgetExceededError: More than ``max_trajectories`` paths needed.
    """
    pi = _policy_matrix(env, policy)
    if not 0 <= s < env.state_count:
        raise ContractError(f"unknown state id {s}")
    if first_action is not None and not 0 <= first_action < env.action_count:
        raise ContractError(f"unknown action id {first_action}")

    finished: Dict[float, float] = defaultdict(float)
    if env.terminal_states[s]:
        finished[0.0] = 1.0
        return ReturnDistribution(dict(finished))

    # (state, return so far, gamma^t) -> probability
    frontier: Dict[tuple, float] = {(s, 0.0, 1.0): 1.0}
    depth = 0
    while frontier:
        if horizon is not None and depth >= horizon:
            break
        if sum(frontier.values()) < RESIDUAL_MASS:
            break
        nxt_frontier: Dict[tuple, float] = defaultdict(float)
        for (state, ret, disc), prob in frontier.items():
            if depth == 0 and first_action is not None:
                actions = [(first_action, 1.0)]
            else:
                actions = [(a, p) for a, p in enumerate(pi[state]) if p > 0.0]
            for a, p in actions:
                nxt = int(env.next_states[state, a])
                new_ret = ret + disc * float(env.rewards[state, a])
                if env.terminal[state, a] or env.terminal_states[nxt]:
                    finished[new_ret] += prob * p
                else:
                    nxt_frontier[(nxt, new_ret, disc * env.discount)] += prob * p
        if len(nxt_frontier) + len(finished) > max_trajectories:
            raise BudgetExceededError(
                f"return enumeration needs more than {max_trajectories} paths"
            )
        frontier = nxt_frontier
        depth += 1

    for (_, ret, _), prob in frontier.items():
        finished[ret] += prob
    return ReturnDistribution(dict(finished))


def policy_q_values(env: DiscreteMdp, policy=None) -> np.ndarray:
    """
    Exact Q^pi by solving the Bellman equations as a linear system.

    Terminal states have value 0. Requires discount < 1 or a policy that
    terminates with probability one.
    """
    pi = _policy_matrix(env, policy)
    n = env.state_count
    gamma = env.discount
    # Continuation: next state value counts unless the move terminates.
    cont = ~env.terminal & ~env.terminal_states[env.next_states]
    transition = np.zeros((n, n))
    expected_reward = np.zeros(n)
    for s in range(n):
        if env.terminal_states[s]:
            continue
        for a in range(env.action_count):
            expected_reward[s] += pi[s, a] * env.rewards[s, a]
            if cont[s, a]:
                transition[s, env.next_states[s, a]] += pi[s, a]
    values = np.linalg.solve(np.eye(n) - gamma * transition, expected_reward)
    q = env.rewards + gamma * np.where(cont, values[env.next_states], 0.0)
    q[env.terminal_states] = 0.0
    return q


def return_variance_reduction(
    env: DiscreteMdp,
    s: int,
    policy=None,
    horizon: Optional[int] = None,
) -> float:
    """
    Var[C | s] - E_a[Var[C | s, a]] with a uniform first action at ``s``.

    Only the first action is drawn uniformly; later visits to ``s`` follow
    ``policy``. Var[C | s] is taken over the equal-weight mixture of the
    per-action distributions.
    """
    pi = _policy_matrix(env, policy)
    per_action = [
        return_distribution(env, s, pi, horizon, first_action=a)
        for a in range(env.action_count)
    ]
    mixture: Dict[float, float] = defaultdict(float)
    for dist in per_action:
        for ret, prob in dist.probabilities.items():
            mixture[ret] += prob / env.action_count
    total = ReturnDistribution(dict(mixture))
    reduction = total.variance() - float(np.mean([d.variance() for d in per_action]))
    logger.debug("variance reduction at state %d: %.3g", s, reduction)
    return reduction
