"""Action-selection rules compared in the exploration experiments."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..critical import SIMap
from ..errors import ContractError
from ..learning import QTable, TieRule, greedy_action
from .schedule import ScheduleSpec


class PolicyKind(str, Enum):
    EPSILON_GREEDY = "epsilon_greedy"
    PROPOSED = "proposed"
    E_EXPLOITATION = "e_exploitation"
    DEFAULT = "default"


@dataclass(frozen=True)
class PolicySpec:
    """
    Which selection rule is active, with its schedule.

    ``exploitation_ratio`` is e for EExploitation; None derives e = q*k.
    ``temperature`` scales the softmax that stands in for the stochastic
    policy of the Default and EExploitation baselines.
    """
    kind: PolicyKind
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    exploitation_ratio: Optional[float] = None
    temperature: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.temperature <= 0:
            raise ContractError("softmax temperature must be positive")
        if self.exploitation_ratio is not None and not 0.0 <= self.exploitation_ratio <= 1.0:
            raise ContractError("exploitation ratio must lie in [0, 1]")
        if self.kind is PolicyKind.PROPOSED:
            self.schedule.check_epsilon_prime()

    @property
    def e(self) -> float:
        if self.exploitation_ratio is not None:
            return self.exploitation_ratio
        return self.schedule.q * self.schedule.k


def softmax_probabilities(row: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    z = np.asarray(row, dtype=float) / temperature
    z = np.exp(z - z.max())
    return z / z.sum()


def _greedy_probabilities(row: np.ndarray) -> np.ndarray:
    best = row == row.max()
    return best / best.sum()


def _is_critical(si_map: Optional[SIMap], s: int) -> bool:
    return si_map is not None and s in si_map.critical_set


def decide(
    policy: PolicySpec,
    s: int,
    q: QTable,
    si_map: Optional[SIMap],
    t: int,
    rng: np.random.Generator,
) -> Tuple[int, bool]:
    """
    Choose an action and report whether it was a deliberate greedy choice.

    A random action may coincide with the greedy one; only deliberate
    exploitation is flagged. Proposed without a critical-set map behaves as
    epsilon-greedy at rate eps'.
    """
    n_actions = q.action_count
    sched = policy.schedule
    kind = policy.kind

    if kind is PolicyKind.EPSILON_GREEDY:
        explore = rng.random() < sched.epsilon(t)
    elif kind is PolicyKind.PROPOSED:
        if _is_critical(si_map, s):
            explore = rng.random() >= sched.k
        else:
            explore = rng.random() < sched.epsilon_prime(t)
    elif kind is PolicyKind.E_EXPLOITATION:
        if rng.random() < policy.e:
            return greedy_action(q, s, TieRule.RANDOM, rng), True
        probs = softmax_probabilities(q.values[s], policy.temperature)
        return int(rng.choice(n_actions, p=probs)), False
    else:
        probs = softmax_probabilities(q.values[s], policy.temperature)
        return int(rng.choice(n_actions, p=probs)), False

    if explore:
        return int(rng.integers(n_actions)), False
    return greedy_action(q, s, TieRule.RANDOM, rng), True


def select_action(
    policy: PolicySpec,
    s: int,
    q: QTable,
    si_map: Optional[SIMap],
    t: int,
    rng: np.random.Generator,
) -> int:
    return decide(policy, s, q, si_map, t, rng)[0]


def action_probabilities(
    policy: PolicySpec,
    s: int,
    q: QTable,
    si_map: Optional[SIMap],
    t: int,
) -> np.ndarray:
    """Analytic distribution of select_action over actions."""
    row = q.values[s]
    n_actions = row.size
    uniform = np.full(n_actions, 1.0 / n_actions)
    greedy = _greedy_probabilities(row)
    sched = policy.schedule
    kind = policy.kind

    if kind is PolicyKind.EPSILON_GREEDY:
        p_greedy = 1.0 - sched.epsilon(t)
    elif kind is PolicyKind.PROPOSED:
        p_greedy = sched.k if _is_critical(si_map, s) else 1.0 - sched.epsilon_prime(t)
    elif kind is PolicyKind.E_EXPLOITATION:
        return policy.e * greedy + (1.0 - policy.e) * softmax_probabilities(row, policy.temperature)
    else:
        return softmax_probabilities(row, policy.temperature)
    return p_greedy * greedy + (1.0 - p_greedy) * uniform


def exploitation_rate(policy: PolicySpec, critical_fraction: float, t: int) -> float:
    """
    Overall probability of a deliberate greedy choice.

    For Proposed, ``critical_fraction`` is the share of visits landing on
    critical states; at the design ratio q it equals 1 - eps(t).
    """
    if not 0.0 <= critical_fraction <= 1.0:
        raise ContractError(f"critical fraction must lie in [0, 1], got {critical_fraction}")
    sched = policy.schedule
    kind = policy.kind
    if kind is PolicyKind.EPSILON_GREEDY:
        return 1.0 - sched.epsilon(t)
    if kind is PolicyKind.PROPOSED:
        return critical_fraction * sched.k + (1.0 - critical_fraction) * (1.0 - sched.epsilon_prime(t))
    if kind is PolicyKind.E_EXPLOITATION:
        return policy.e
    return 0.0
