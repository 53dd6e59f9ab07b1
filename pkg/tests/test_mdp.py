"""Tests for the MDP core and the cliff maze."""

import numpy as np
import pytest

from src.errors import ContractError
from src.mdp import (
    Action,
    DiscreteMdp,
    GridMaze,
    Step,
    Trajectory,
    parse_grid,
    rollout,
    shortest_path_length,
    step,
)


@pytest.fixture
def maze():
    return GridMaze.cliff_maze()


def test_step_free_move(maze):
    """Moving right from the start lands on the next free cell."""
    nxt, reward, done = step(maze, maze.state_id(0, 0), Action.RIGHT)

    assert maze.coords(nxt) == (0, 1)
    assert reward == 0.0
    assert done is False


def test_step_into_center_cell(maze):
    """The centre cell of the cliff column is not a cliff."""
    nxt, reward, done = step(maze, maze.state_id(5, 4), Action.RIGHT)

    assert maze.coords(nxt) == (5, 5)
    assert reward == 0.0
    assert done is False


def test_step_into_cliff(maze):
    """Entering a cliff pays -1 and ends the episode."""
    nxt, reward, done = step(maze, maze.state_id(4, 4), Action.RIGHT)

    assert maze.coords(nxt) == (4, 5)
    assert reward == -1.0
    assert done is True


def test_step_into_goal(maze):
    """Entering the goal pays +1 and ends the episode."""
    nxt, reward, done = step(maze, maze.state_id(10, 9), Action.RIGHT)

    assert nxt == maze.goal_state
    assert reward == 1.0
    assert done is True


def test_wall_keeps_agent_in_place(maze):
    """Moving off the grid leaves the state unchanged with reward 0."""
    start = maze.state_id(0, 0)

    assert step(maze, start, Action.UP) == (start, 0.0, False)
    assert step(maze, start, Action.LEFT) == (start, 0.0, False)


def test_step_rejects_bad_ids(maze):
    """Unknown states, unknown actions and terminal states are contract errors."""
    with pytest.raises(ContractError):
        step(maze, maze.state_count, 0)
    with pytest.raises(ContractError):
        step(maze, 0, 4)
    with pytest.raises(ContractError):
        step(maze, maze.goal_state, 0)


def test_cliff_maze_layout(maze):
    """121 states, 10 cliffs and 11 terminal cells."""
    assert maze.state_count == 121
    assert maze.action_count == 4
    assert len(maze.cliffs) == 10
    assert (5, 5) not in maze.cliffs
    assert int(maze.terminal_states.sum()) == 11


def test_environment_tables_are_read_only(maze):
    """Environments are immutable descriptions."""
    with pytest.raises(ValueError):
        maze.next_states[0, 0] = 3


def test_shortest_path_cliff_maze(maze):
    """The only way across passes the centre cell: 20 steps."""
    assert shortest_path_length(maze) == 20


def test_shortest_path_open_maze():
    """Without cliffs the distance is the Manhattan distance."""
    assert shortest_path_length(GridMaze.open_maze()) == 20


def test_shortest_path_start_is_goal():
    """A maze whose start is its goal has distance 0."""
    env = GridMaze.from_layout(3, 3, (1, 1), (1, 1))

    assert shortest_path_length(env) == 0


def test_shortest_path_unreachable():
    """A cliff between start and goal means no path."""
    env = parse_grid("SCG")

    assert shortest_path_length(env) is None


def test_grid_text_round_trip(maze):
    """The text format reproduces the cliff maze."""
    text = maze.to_text()
    parsed = parse_grid(text)

    assert text.splitlines()[5] == "." * 11
    assert text.splitlines()[0][5] == "C"
    assert parsed.cliffs == maze.cliffs
    assert parsed.start == (0, 0)
    assert parsed.goal == (10, 10)
    assert np.array_equal(parsed.next_states, maze.next_states)


def test_parse_grid_rejects_bad_layouts():
    """Ragged rows, duplicate starts and unknown characters are rejected."""
    with pytest.raises(ContractError):
        parse_grid("S..\n..G.")
    with pytest.raises(ContractError):
        parse_grid("SS.\n..G")
    with pytest.raises(ContractError):
        parse_grid("S.x\n..G")
    with pytest.raises(ContractError):
        parse_grid("...\n..G")


def test_trajectory_chaining():
    """Steps must chain and nothing follows a terminal step."""
    traj = Trajectory()
    traj.append(Step(0, 1, 0.0, 1))

    with pytest.raises(ContractError):
        traj.append(Step(2, 0, 0.0, 3))

    traj.append(Step(1, 0, 1.0, 2, terminal=True))
    assert traj.terminated
    assert traj.states == [0, 1]
    with pytest.raises(ContractError):
        traj.append(Step(2, 0, 0.0, 2))


def test_discounted_return():
    """C = sum of gamma^t r_t."""
    traj = Trajectory([Step(0, 0, 1.0, 1), Step(1, 0, 2.0, 2)])

    assert traj.discounted_return(0.5) == pytest.approx(2.0)


def test_rollout_cut_at_step_cap(maze):
    """A policy that bumps into the wall forever is cut at the cap."""
    traj = rollout(maze, lambda s: int(Action.UP), step_cap=50)

    assert len(traj) == 50
    assert not traj.terminated


def test_rollout_terminates_or_is_capped(maze):
    """Random rollouts from the start end at a terminal or at the cap."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        traj = rollout(maze, lambda s: int(rng.integers(4)), step_cap=500)
        assert traj.terminated or len(traj) == 500
        if traj.terminated:
            assert maze.is_terminal(traj.steps[-1].next_state)


def test_discrete_mdp_validation():
    """Mismatched tables and out-of-range ids are rejected."""
    with pytest.raises(ContractError):
        DiscreteMdp(
            next_states=[[1], [0]],
            rewards=[[0.0, 0.0], [0.0, 0.0]],
            terminal=[[False], [False]],
            terminal_states=[False, False],
        )
    with pytest.raises(ContractError):
        DiscreteMdp(
            next_states=[[2], [0]],
            rewards=[[0.0], [0.0]],
            terminal=[[False], [False]],
            terminal_states=[False, False],
        )
