"""Tabular Q-learning with backward per-episode updates."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..errors import ContractError
from ..mdp import DEFAULT_STEP_CAP, DiscreteMdp, GridMaze, Step, Trajectory, shortest_path_length


class TieRule(str, Enum):
    """How greedy_action resolves equal Q-values."""
    FIRST = "first"    # lowest action index; used for evaluation
    RANDOM = "random"  # uniform among maxima; used while exploring


@dataclass
class QTable:
    """Dense action-value table Q[s, a]."""
    values: np.ndarray
    learning_rate: float = 0.3
    discount: float = 0.99

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ContractError("Q-table must be 2-D [state_count, action_count]")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ContractError(f"learning rate must lie in (0, 1], got {self.learning_rate}")
        if not 0.0 <= self.discount <= 1.0:
            raise ContractError(f"discount must lie in [0, 1], got {self.discount}")

    @classmethod
    def zeros(
        cls,
        state_count: int,
        action_count: int,
        learning_rate: float = 0.3,
        discount: float = 0.99,
    ) -> "QTable":
        return cls(np.zeros((state_count, action_count)), learning_rate, discount)

    @classmethod
    def for_env(cls, env: DiscreteMdp, learning_rate: float = 0.3) -> "QTable":
        return cls.zeros(env.state_count, env.action_count, learning_rate, env.discount)

    @property
    def state_count(self) -> int:
        return self.values.shape[0]

    @property
    def action_count(self) -> int:
        return self.values.shape[1]

    def row(self, s: int) -> np.ndarray:
        return self.values[s]

    def copy(self) -> "QTable":
        return QTable(self.values.copy(), self.learning_rate, self.discount)


def update_episode(q: QTable, traj: Trajectory) -> QTable:
    """
    Apply one Q-learning sweep over ``traj`` from its last step to its first.

    Terminal transitions use the reward alone as target. The table is
    updated in place and returned.
    """
    if len(traj) == 0:
        raise ContractError("cannot update from an empty trajectory")
    values = q.values
    alpha = q.learning_rate
    gamma = q.discount
    for st in reversed(traj.steps):
        if not (0 <= st.state < q.state_count and 0 <= st.next_state < q.state_count):
            raise ContractError(f"trajectory state outside Q-table shape {values.shape}")
        target = st.reward
        if not st.terminal:
            target += gamma * values[st.next_state].max()
        values[st.state, st.action] += alpha * (target - values[st.state, st.action])
    return q


def greedy_action(
    q: QTable,
    s: int,
    tie_rule: TieRule = TieRule.FIRST,
    rng: Optional[np.random.Generator] = None,
) -> int:
    """argmax_a Q(s, a) with ties resolved by ``tie_rule``."""
    row = q.values[s]
    if tie_rule is TieRule.FIRST:
        return int(row.argmax())
    best = np.flatnonzero(row == row.max())
    if best.size == 1:
        return int(best[0])
    if rng is None:
        raise ContractError("random tie-breaking needs a generator")
    return int(best[rng.integers(best.size)])


def greedy_rollout(
    env: DiscreteMdp,
    q: QTable,
    step_cap: int = DEFAULT_STEP_CAP,
) -> Tuple[Trajectory, float]:
    """
    Fully greedy evaluation episode from the initial state.

    Stops on termination, the step cap, or a revisited state: with a
    deterministic environment and fixed-order ties a revisit repeats forever.

    Returns:
        The trajectory and its discounted return.
    """
    traj = Trajectory()
    s = env.initial_state
    seen = {s}
    while len(traj) < step_cap and not env.terminal_states[s]:
        a = int(q.values[s].argmax())
        nxt = int(env.next_states[s, a])
        done = bool(env.terminal[s, a])
        traj.append(Step(s, a, float(env.rewards[s, a]), nxt, done))
        if done or nxt in seen:
            break
        seen.add(nxt)
        s = nxt
    return traj, traj.discounted_return(env.discount)


def greedy_rollout_is_optimal(
    env: GridMaze,
    q: QTable,
    optimal_length: Optional[int] = None,
) -> bool:
    """
    True iff the fixed-order greedy walk reaches the goal in exactly the
    shortest-path number of steps.
    """
    length = shortest_path_length(env) if optimal_length is None else optimal_length
    if length is None:
        return False
    goal = env.goal_state
    s = env.initial_state
    if length == 0:
        return s == goal
    for i in range(length):
        a = int(q.values[s].argmax())
        nxt = int(env.next_states[s, a])
        if env.terminal[s, a]:
            return nxt == goal and i == length - 1
        s = nxt
    return False
