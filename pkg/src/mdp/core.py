"""Deterministic discrete MDPs, transitions and trajectories."""

from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from ..errors import ContractError

# Bounds non-terminating random walks.
DEFAULT_STEP_CAP = 10_000


class Transition(NamedTuple):
    """Result of a single environment step."""
    next_state: int
    reward: float
    terminal: bool


@dataclass(frozen=True)
class Step:
    """One (s, a, r, s') entry of a trajectory."""
    state: int
    action: int
    reward: float
    next_state: int
    terminal: bool = False


@dataclass
class Trajectory:
    """
    An ordered episode fragment.

    Steps must chain: the next_state of step i is the state of step i + 1.
    ``terminated`` is True when the last step entered a terminal state,
    False when the episode was cut (step cap or budget).
    """
    steps: List[Step] = field(default_factory=list)
    terminated: bool = False

    def append(self, step: Step) -> None:
        """Append a step, enforcing the chaining invariant."""
        if self.terminated:
            raise ContractError("cannot extend a terminated trajectory")
        if self.steps and self.steps[-1].next_state != step.state:
            raise ContractError(
                f"trajectory does not chain: {self.steps[-1].next_state} -> {step.state}"
            )
        self.steps.append(step)
        self.terminated = step.terminal

    def discounted_return(self, discount: float) -> float:
        """C = sum_t gamma^t r_t over the recorded steps."""
        total = 0.0
        for step in reversed(self.steps):
            total = step.reward + discount * total
        return total

    @property
    def states(self) -> List[int]:
        return [s.state for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass(frozen=True, eq=False)
class DiscreteMdp:
    """
    Deterministic finite MDP stored as dense transition tables.

    ``next_states``, ``rewards`` and ``terminal`` have shape
    [state_count, action_count]; ``terminal[s, a]`` is True when taking
    ``a`` in ``s`` enters a terminal state. ``terminal_states`` marks states
    that end an episode on entry; their rows are never used by rollouts.
    """
    next_states: np.ndarray
    rewards: np.ndarray
    terminal: np.ndarray
    terminal_states: np.ndarray
    initial_state: int = 0
    discount: float = 0.99

    def __post_init__(self):
        # Own read-only copies; environments are immutable descriptions.
        for name, dtype in (
            ("next_states", np.int64),
            ("rewards", np.float64),
            ("terminal", bool),
            ("terminal_states", bool),
        ):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=dtype))
        shape = self.next_states.shape
        if len(shape) != 2 or shape[0] < 1 or shape[1] < 1:
            raise ContractError(f"transition table must be 2-D and non-empty, got {shape}")
        if self.rewards.shape != shape or self.terminal.shape != shape:
            raise ContractError("transition, reward and terminal tables differ in shape")
        if self.terminal_states.shape != (shape[0],):
            raise ContractError("terminal_states must have one flag per state")
        if not 0.0 <= self.discount <= 1.0:
            raise ContractError(f"discount must lie in [0, 1], got {self.discount}")
        if not 0 <= self.initial_state < shape[0]:
            raise ContractError(f"initial state {self.initial_state} out of range")
        if self.next_states.min() < 0 or self.next_states.max() >= shape[0]:
            raise ContractError("transition table references unknown states")
        for name in ("next_states", "rewards", "terminal", "terminal_states"):
            getattr(self, name).setflags(write=False)

    @property
    def state_count(self) -> int:
        return self.next_states.shape[0]

    @property
    def action_count(self) -> int:
        return self.next_states.shape[1]

    def is_terminal(self, s: int) -> bool:
        return bool(self.terminal_states[s])


def step(env: DiscreteMdp, s: int, a: int) -> Transition:
    """
    Take action ``a`` in state ``s``.

    Raises:
        ContractError: unknown ids, or ``s`` is terminal.
    """
    if not 0 <= s < env.state_count:
        raise ContractError(f"unknown state id {s}")
    if not 0 <= a < env.action_count:
        raise ContractError(f"unknown action id {a}")
    if env.terminal_states[s]:
        raise ContractError(f"state {s} is terminal")
    return Transition(
        int(env.next_states[s, a]),
        float(env.rewards[s, a]),
        bool(env.terminal[s, a]),
    )


def rollout(
    env: DiscreteMdp,
    policy_fn: Callable[[int], int],
    start: Optional[int] = None,
    step_cap: int = DEFAULT_STEP_CAP,
) -> Trajectory:
    """Run one episode with ``policy_fn`` until termination or the step cap."""
    s = env.initial_state if start is None else start
    traj = Trajectory()
    while len(traj) < step_cap and not env.terminal_states[s]:
        a = policy_fn(s)
        nxt, reward, done = step(env, s, a)
        traj.append(Step(s, a, reward, nxt, done))
        s = nxt
        if done:
            break
    return traj
