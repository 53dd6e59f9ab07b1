"""Multi-seed training runs of the exploration policies on a maze."""

import logging
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..config import ExperimentConfig, config_hash
from ..critical import RecentStateBuffer, SIMap, refresh_critical_set, si_map_from_table
from ..errors import ConfigError, ContractError
from ..exploration import PolicyKind, decide
from ..learning import (
    Checkpoint,
    QTable,
    append_checkpoint,
    checkpoint_at,
    greedy_rollout,
    greedy_rollout_is_optimal,
    update_episode,
)
from ..mdp import GridMaze, Step, Trajectory, parse_grid, shortest_path_length, step

logger = logging.getLogger(__name__)

NOT_REACHED = "not reached"


@dataclass
class RunRecord:
    """
    Everything one seeded run produced.

    Evaluation entries are append-only with strictly increasing steps.
    """
    policy: PolicyKind
    seed: int
    run_index: int
    config_hash: str
    step_cap: int
    steps_to_optimal: Optional[int] = None
    eval_steps: List[int] = field(default_factory=list)
    eval_returns: List[float] = field(default_factory=list)
    checkpoints: List[Checkpoint] = field(default_factory=list)
    exploration_steps: int = 0
    episodes: int = 0
    exploitation_fraction: float = 0.0
    visited: Optional[np.ndarray] = None
    wall_clock: float = 0.0

    def add_evaluation(self, step: int, ret: float) -> None:
        if self.eval_steps and step <= self.eval_steps[-1]:
            raise ContractError(f"evaluation step {step} not after {self.eval_steps[-1]}")
        self.eval_steps.append(int(step))
        self.eval_returns.append(float(ret))

    @property
    def reached(self) -> bool:
        return self.steps_to_optimal is not None

    @property
    def steps_label(self):
        return self.steps_to_optimal if self.reached else NOT_REACHED

    def eval_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"step": self.eval_steps, "return": self.eval_returns})

    def q_at(self, step: int) -> QTable:
        """Q-table of the latest checkpoint at or before ``step``."""
        return QTable(checkpoint_at(self.checkpoints, step).q_snapshot)

    def visited_states(self) -> List[int]:
        if self.visited is None:
            return []
        return np.flatnonzero(self.visited).tolist()


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of run ``index``, counter-based on (base_seed, index)."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def run_seeds(cfg: ExperimentConfig) -> List[int]:
    if cfg.seeds is not None:
        return list(cfg.seeds)
    return [derive_seed(cfg.base_seed, i) for i in range(cfg.seed_count)]


def build_environment(cfg: ExperimentConfig) -> GridMaze:
    """Maze named by the config; ``maze_file`` takes precedence."""
    if cfg.maze_file:
        path = Path(cfg.maze_file)
        if not path.exists():
            raise ConfigError(f"maze file {path} does not exist")
        try:
            return parse_grid(path.read_text(encoding="utf-8"), cfg.discount)
        except ContractError as e:
            raise ConfigError(f"{path}: {e}") from e
    if cfg.environment == "open_maze":
        return GridMaze.open_maze(cfg.maze_size, cfg.discount)
    return GridMaze.cliff_maze(cfg.maze_size, cfg.discount)


def run_single(
    cfg: ExperimentConfig,
    kind: PolicyKind,
    seed: int,
    run_index: int = 0,
    env: Optional[GridMaze] = None,
) -> RunRecord:
    """
    Train one Q-learner with one policy and seed.

    The exploration-step counter advances once per environment step taken
    while exploring. Greedy evaluation episodes run every ``eval_interval``
    exploration steps and do not count. The Q-table is updated at the end
    of each episode (terminal or step cap), after which the critical set is
    refreshed in ``all_states`` mode and optimality is checked.
    """
    started = time.perf_counter()
    kind = PolicyKind(kind)
    env = env if env is not None else build_environment(cfg)
    policy = cfg.policy_spec(kind)
    optimal_length = shortest_path_length(env)
    rng = np.random.default_rng(seed)
    q = QTable.for_env(env, cfg.learning_rate)

    record = RunRecord(
        policy=kind,
        seed=seed,
        run_index=run_index,
        config_hash=config_hash(cfg.for_policy(kind)),
        step_cap=cfg.total_steps,
    )
    append_checkpoint(record.checkpoints, Checkpoint(0, q.values.copy()))

    needs_si = kind is PolicyKind.PROPOSED
    recent = cfg.threshold_mode == "recent"
    buffer = RecentStateBuffer(cfg.buffer_size, cfg.refresh_interval) if recent else None
    si_map: Optional[SIMap] = None

    visited = np.zeros(env.state_count, dtype=bool)
    exploited = 0
    t = 0
    s = env.initial_state
    traj = Trajectory()

    while t < cfg.total_steps:
        a, greedy = decide(policy, s, q, si_map, t, rng)
        nxt, reward, done = step(env, s, a)
        traj.append(Step(s, a, reward, nxt, done))
        visited[s] = True
        exploited += greedy
        t += 1
        if buffer is not None and buffer.push(s) and needs_si:
            si_map = refresh_critical_set(buffer, q, cfg.q)
        s = nxt

        episode_over = done or len(traj) >= cfg.episode_step_cap or t == cfg.total_steps
        if episode_over:
            update_episode(q, traj)
            record.episodes += 1
            if needs_si and not recent:
                si_map = si_map_from_table(q, cfg.q)
            if not record.reached and greedy_rollout_is_optimal(env, q, optimal_length):
                record.steps_to_optimal = t
                logger.debug("%s seed %d: optimal after %d steps", kind.value, seed, t)
            traj = Trajectory()
            s = env.initial_state

        if t % cfg.eval_interval == 0:
            _, ret = greedy_rollout(env, q, cfg.episode_step_cap)
            record.add_evaluation(t, ret)
        if t % cfg.checkpoint_interval == 0:
            append_checkpoint(record.checkpoints, Checkpoint(t, q.values.copy()))
        if cfg.stop_at_optimal and record.reached and episode_over:
            break

    if record.checkpoints[-1].step != t:
        append_checkpoint(record.checkpoints, Checkpoint(t, q.values.copy()))

    record.exploration_steps = t
    record.exploitation_fraction = exploited / t if t else 0.0
    record.visited = visited
    record.wall_clock = time.perf_counter() - started
    return record


def _run_job(job: Tuple[ExperimentConfig, PolicyKind, int, int, Optional[str]]) -> RunRecord:
    cfg, kind, index, seed, arm_dir = job
    record = run_single(cfg, kind, seed, index)
    if arm_dir is not None:
        from .outputs import RunWriter

        RunWriter(Path(arm_dir) / str(seed)).write_run(record, cfg.for_policy(kind))
    logger.info(
        "%s run %d (seed %d): steps to optimal %s",
        kind.value, index, seed, record.steps_label,
    )
    return record


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> Dict[PolicyKind, List[RunRecord]]:
    """
    Run every policy arm over every seed.

    Output locations are checked before the first run so a failure leaves
    no partial artifacts. With ``workers`` > 1 the runs fan out to a
    process pool; aggregation happens after all runs finish.
    """
    from .outputs import arm_directory, prepare_output, write_arm_summary, write_manifest

    build_environment(cfg)
    if write:
        prepare_output(cfg.output_dir)

    seeds = run_seeds(cfg)
    jobs = []
    for kind in cfg.policies:
        arm_dir = str(arm_directory(cfg, kind)) if write else None
        jobs.extend((cfg, kind, i, seed, arm_dir) for i, seed in enumerate(seeds))

    if cfg.workers > 1 and len(jobs) > 1:
        with Pool(processes=min(cfg.workers, len(jobs))) as pool:
            records = pool.map(_run_job, jobs)
    else:
        records = [_run_job(job) for job in jobs]

    results: Dict[PolicyKind, List[RunRecord]] = {kind: [] for kind in cfg.policies}
    for record in records:
        results[record.policy].append(record)

    if write:
        for kind, arm_records in results.items():
            write_arm_summary(arm_directory(cfg, kind), arm_records)
        write_manifest(cfg)
    return results
