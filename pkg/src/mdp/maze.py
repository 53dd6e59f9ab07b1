"""Grid mazes with cliffs: the cliff-maze environment and its text format."""

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import FrozenSet, Iterable, Optional, Tuple

import numpy as np

from ..errors import ContractError
from .core import DiscreteMdp

Cell = Tuple[int, int]

GOAL_REWARD = 1.0
CLIFF_REWARD = -1.0


class Action(IntEnum):
    """Grid moves, in the order used by Q-table columns."""
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


_MOVES = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}


@dataclass(frozen=True, eq=False, kw_only=True)
class GridMaze(DiscreteMdp):
    """
    Rectangular maze on a (row, col) grid, row 0 at the top.

    Entering the goal pays +1 and entering a cliff pays -1; both end the
    episode. Moving off the grid leaves the agent in place with reward 0.
    States are numbered row-major: ``row * width + col``.
    """
    width: int
    height: int
    start: Cell
    goal: Cell
    cliffs: FrozenSet[Cell] = field(default_factory=frozenset)

    @classmethod
    def from_layout(
        cls,
        width: int,
        height: int,
        start: Cell,
        goal: Cell,
        cliffs: Iterable[Cell] = (),
        discount: float = 0.99,
    ) -> "GridMaze":
        """Build the transition tables for a maze layout."""
        cliffs = frozenset(tuple(c) for c in cliffs)
        for name, cell in (("start", start), ("goal", goal), *((("cliff", c) for c in cliffs))):
            if not (0 <= cell[0] < height and 0 <= cell[1] < width):
                raise ContractError(f"{name} cell {cell} lies outside a {height}x{width} grid")
        if start in cliffs or goal in cliffs:
            raise ContractError("start and goal must not be cliffs")

        n_states = width * height
        next_states = np.zeros((n_states, len(Action)), dtype=np.int64)
        rewards = np.zeros((n_states, len(Action)))
        terminal = np.zeros((n_states, len(Action)), dtype=bool)
        terminal_states = np.zeros(n_states, dtype=bool)
        for cell in cliffs | {goal}:
            terminal_states[cell[0] * width + cell[1]] = True
        if start == goal:
            # Degenerate layout: the episode starts at the goal.
            terminal_states[start[0] * width + start[1]] = False

        for row in range(height):
            for col in range(width):
                s = row * width + col
                for action, (dr, dc) in _MOVES.items():
                    r, c = row + dr, col + dc
                    if not (0 <= r < height and 0 <= c < width):
                        r, c = row, col
                    nxt = r * width + c
                    next_states[s, action] = nxt
                    if (r, c) == goal and (r, c) != (row, col):
                        rewards[s, action] = GOAL_REWARD
                        terminal[s, action] = True
                    elif (r, c) in cliffs:
                        rewards[s, action] = CLIFF_REWARD
                        terminal[s, action] = True

        return cls(
            next_states=next_states,
            rewards=rewards,
            terminal=terminal,
            terminal_states=terminal_states,
            initial_state=start[0] * width + start[1],
            discount=discount,
            width=width,
            height=height,
            start=tuple(start),
            goal=tuple(goal),
            cliffs=cliffs,
        )

    @classmethod
    def cliff_maze(cls, size: int = 11, discount: float = 0.99) -> "GridMaze":
        """Square maze with cliffs down the centre column except the centre cell."""
        if size < 3 or size % 2 == 0:
            raise ContractError(f"cliff maze size must be odd and >= 3, got {size}")
        mid = size // 2
        cliffs = [(row, mid) for row in range(size) if row != mid]
        return cls.from_layout(size, size, (0, 0), (size - 1, size - 1), cliffs, discount)

    @classmethod
    def open_maze(cls, size: int = 11, discount: float = 0.99) -> "GridMaze":
        """The cliff maze layout without any cliffs."""
        return cls.from_layout(size, size, (0, 0), (size - 1, size - 1), (), discount)

    def state_id(self, row: int, col: int) -> int:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise ContractError(f"cell ({row}, {col}) outside the grid")
        return row * self.width + col

    def coords(self, s: int) -> Cell:
        if not 0 <= s < self.state_count:
            raise ContractError(f"unknown state id {s}")
        return divmod(s, self.width)

    @property
    def goal_state(self) -> int:
        return self.state_id(*self.goal)

    @property
    def cliff_states(self) -> FrozenSet[int]:
        return frozenset(self.state_id(*c) for c in self.cliffs)

    def coordinate_array(self) -> np.ndarray:
        """[state_count, 2] array of (row, col), the match-ratio embedding."""
        return np.array([self.coords(s) for s in range(self.state_count)], dtype=float)

    def to_text(self) -> str:
        """Render as rows of ``S``, ``G``, ``C`` and ``.``."""
        lines = []
        for row in range(self.height):
            chars = []
            for col in range(self.width):
                cell = (row, col)
                if cell == self.start:
                    chars.append("S")
                elif cell == self.goal:
                    chars.append("G")
                elif cell in self.cliffs:
                    chars.append("C")
                else:
                    chars.append(".")
            lines.append("".join(chars))
        return "\n".join(lines)


def parse_grid(text: str, discount: float = 0.99) -> GridMaze:
    """
    Parse the plain-text maze format.

    Blank lines are ignored. Exactly one ``S`` and one ``G`` are required.
    """
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ContractError("empty maze description")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ContractError("maze rows have different lengths")

    start: Optional[Cell] = None
    goal: Optional[Cell] = None
    cliffs = []
    for row, line in enumerate(rows):
        for col, ch in enumerate(line):
            if ch == "S":
                if start is not None:
                    raise ContractError("maze has more than one start cell")
                start = (row, col)
            elif ch == "G":
                if goal is not None:
                    raise ContractError("maze has more than one goal cell")
                goal = (row, col)
            elif ch == "C":
                cliffs.append((row, col))
            elif ch != ".":
                raise ContractError(f"unknown maze character {ch!r} at ({row}, {col})")
    if start is None or goal is None:
        raise ContractError("maze needs exactly one S and one G")
    return GridMaze.from_layout(width, len(rows), start, goal, cliffs, discount)


def shortest_path_length(env: GridMaze) -> Optional[int]:
    """
    Breadth-first distance from start to goal, avoiding cliffs.

    Returns:
        Number of steps, or None when the goal is unreachable.
    """
    start = env.initial_state
    goal = env.goal_state
    if start == goal:
        return 0
    dist = {start: 0}
    frontier = deque([start])
    while frontier:
        s = frontier.popleft()
        for a in range(env.action_count):
            nxt = int(env.next_states[s, a])
            if nxt in dist:
                continue
            if nxt == goal:
                return dist[s] + 1
            if env.terminal_states[nxt]:
                continue
            dist[nxt] = dist[s] + 1
            frontier.append(nxt)
    return None
