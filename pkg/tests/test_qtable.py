"""Tests for tabular Q-learning and checkpoints."""

import tempfile

import numpy as np
import pytest
from scipy.stats import chisquare

from src.errors import ContractError, SnapshotError
from src.learning import (
    Checkpoint,
    QTable,
    TieRule,
    append_checkpoint,
    checkpoint_at,
    greedy_action,
    greedy_rollout,
    greedy_rollout_is_optimal,
    load_checkpoint,
    load_checkpoints,
    save_checkpoint,
    update_episode,
)
from src.mdp import Action, GridMaze, Step, Trajectory


@pytest.fixture
def maze():
    return GridMaze.cliff_maze()


def optimal_q(env: GridMaze, sweeps: int = 300) -> np.ndarray:
    """Q* of a deterministic maze by value iteration."""
    q = np.zeros((env.state_count, env.action_count))
    cont = ~env.terminal
    for _ in range(sweeps):
        v = q.max(axis=1)
        q = env.rewards + env.discount * np.where(cont, v[env.next_states], 0.0)
    return q


def path_q(env: GridMaze, moves) -> QTable:
    """Q-table whose fixed-order greedy walk follows ``moves`` from the start."""
    q = QTable.for_env(env)
    s = env.initial_state
    for move in moves:
        q.values[s, move] = 1.0
        s = int(env.next_states[s, move])
    return q


SHORTEST = [Action.DOWN] * 5 + [Action.RIGHT] * 10 + [Action.DOWN] * 5
DETOUR = [Action.DOWN] * 5 + [Action.RIGHT] * 10 + [Action.DOWN] * 4 + [
    Action.LEFT,
    Action.DOWN,
    Action.RIGHT,
]


def test_update_into_goal(maze):
    """One step into the goal from zero: Q = 0.3."""
    q = QTable.for_env(maze)
    s = maze.state_id(10, 9)
    traj = Trajectory([Step(s, Action.RIGHT, 1.0, maze.goal_state, True)])

    update_episode(q, traj)

    assert q.values[s, Action.RIGHT] == pytest.approx(0.3)


def test_update_into_cliff(maze):
    """One step into a cliff from zero: Q = -0.3."""
    q = QTable.for_env(maze)
    s = maze.state_id(4, 4)
    traj = Trajectory([Step(s, Action.RIGHT, -1.0, maze.state_id(4, 5), True)])

    update_episode(q, traj)

    assert q.values[s, Action.RIGHT] == pytest.approx(-0.3)


def test_backward_sweep_two_steps(maze):
    """The later step is updated first: 0.3 * 0.99 * 0.3."""
    q = QTable.for_env(maze)
    a = maze.state_id(10, 8)
    b = maze.state_id(10, 9)
    traj = Trajectory([
        Step(a, Action.RIGHT, 0.0, b),
        Step(b, Action.RIGHT, 1.0, maze.goal_state, True),
    ])

    update_episode(q, traj)

    assert q.values[a, Action.RIGHT] == pytest.approx(0.0891)
    assert q.values[b, Action.RIGHT] == pytest.approx(0.3)


def test_update_rejects_empty_trajectory(maze):
    """An empty trajectory is a contract violation."""
    with pytest.raises(ContractError):
        update_episode(QTable.for_env(maze), Trajectory())


def test_converged_table_is_a_fixed_point(maze):
    """Updating Q* along its own greedy path changes nothing."""
    q = QTable(optimal_q(maze))
    before = q.values.copy()
    traj, _ = greedy_rollout(maze, q)

    update_episode(q, traj)

    assert traj.terminated
    assert np.max(np.abs(q.values - before)) <= 1e-12


def test_greedy_action_argmax():
    """Plain argmax."""
    q = QTable(np.array([[0.0, 1.0, 0.0, 0.0]]))

    assert greedy_action(q, 0) == 1


def test_greedy_action_fixed_order_tie():
    """Ties go to the first action under the fixed-order rule."""
    q = QTable(np.zeros((1, 4)))

    assert greedy_action(q, 0, TieRule.FIRST) == 0


def test_greedy_action_random_tie_is_uniform():
    """Random ties split evenly between the maxima."""
    q = QTable(np.array([[0.2, 0.2, 0.1, 0.1]]))
    rng = np.random.default_rng(0)

    draws = [greedy_action(q, 0, TieRule.RANDOM, rng) for _ in range(10_000)]
    counts = np.bincount(draws, minlength=4)

    assert counts[2] == counts[3] == 0
    assert chisquare(counts[:2]).pvalue > 0.01


def test_random_tie_needs_generator():
    """Random tie-breaking without a generator is rejected."""
    q = QTable(np.zeros((1, 4)))

    with pytest.raises(ContractError):
        greedy_action(q, 0, TieRule.RANDOM)


def test_untrained_table_is_not_optimal(maze):
    """All-zero Q walks into the top wall forever."""
    assert not greedy_rollout_is_optimal(maze, QTable.for_env(maze))


def test_shortest_path_table_is_optimal(maze):
    """A table encoding a BFS path is optimal."""
    assert greedy_rollout_is_optimal(maze, path_q(maze, SHORTEST))


def test_detour_table_is_not_optimal(maze):
    """A 22-step route reaches the goal but is not optimal."""
    q = path_q(maze, DETOUR)
    traj, _ = greedy_rollout(maze, q)

    assert len(traj) == 22
    assert traj.steps[-1].next_state == maze.goal_state
    assert not greedy_rollout_is_optimal(maze, q)


def test_value_iteration_table_is_optimal(maze):
    """Fixed-order greedy on Q* follows a shortest path."""
    assert greedy_rollout_is_optimal(maze, QTable(optimal_q(maze)))


def test_greedy_rollout_stops_on_revisit(maze):
    """A greedy loop is cut at the first revisited state."""
    q = QTable.for_env(maze)
    traj, ret = greedy_rollout(maze, q)

    assert len(traj) == 1
    assert ret == 0.0


def test_greedy_rollout_discounted_return(maze):
    """Twenty steps to +1 returns 0.99 ** 19."""
    _, ret = greedy_rollout(maze, path_q(maze, SHORTEST))

    assert ret == pytest.approx(0.99 ** 19)


def test_q_table_validation():
    """Shapes and learning parameters are checked."""
    with pytest.raises(ContractError):
        QTable(np.zeros(4))
    with pytest.raises(ContractError):
        QTable(np.zeros((2, 2)), learning_rate=0.0)
    with pytest.raises(ContractError):
        QTable(np.zeros((2, 2)), discount=1.5)


def test_checkpoint_steps_strictly_increase():
    """A checkpoint at or before the last one is rejected."""
    checkpoints = []
    append_checkpoint(checkpoints, Checkpoint(0, np.zeros((2, 2))))
    append_checkpoint(checkpoints, Checkpoint(10, np.ones((2, 2))))

    with pytest.raises(ContractError):
        append_checkpoint(checkpoints, Checkpoint(10, np.ones((2, 2))))


def test_checkpoint_at_picks_latest_before():
    """The snapshot at or before the step is returned."""
    checkpoints = [Checkpoint(0, np.zeros((1, 2))), Checkpoint(10, np.ones((1, 2)))]

    assert checkpoint_at(checkpoints, 9).step == 0
    assert checkpoint_at(checkpoints, 10).step == 10
    assert checkpoint_at(checkpoints, 99).step == 10
    with pytest.raises(SnapshotError):
        checkpoint_at(checkpoints[1:], 5)


def test_checkpoint_save_and_load():
    """Checkpoints persist as .npy with a JSON sidecar."""
    values = np.arange(8.0).reshape(4, 2)
    with tempfile.TemporaryDirectory() as tmpdir:
        path = save_checkpoint(tmpdir, Checkpoint(500, values), seed=7)
        save_checkpoint(tmpdir, Checkpoint(50, values * 2), seed=7)

        loaded = load_checkpoint(path)
        assert loaded.step == 500
        assert np.array_equal(loaded.q_snapshot, values)

        everything = load_checkpoints(tmpdir)
        assert [cp.step for cp in everything] == [50, 500]
        assert path.with_suffix(".json").read_text(encoding="utf-8").count('"seed": 7') == 1
