"""On-disk layout of experiment results."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .. import __version__
from ..config import ExperimentConfig, build_config, config_hash
from ..critical import normalized_grid, si_map_from_table
from ..errors import ConfigError, SnapshotError
from ..exploration import PolicyKind
from ..learning import QTable, load_checkpoints, save_checkpoint
from ..mdp import GridMaze
from .runner import NOT_REACHED, RunRecord, build_environment

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
STEPS_FILE = "steps_to_optimal.csv"

DECISIONS = {
    "quantile": "linear interpolation between order statistics; critical iff SI > threshold",
    "si_distribution": "uniform over actions, population variance",
    "evaluation": "fixed-order greedy episode from the start, discounted return, not counted as exploration",
    "optimality": "checked after every episode update",
    "seed_derivation": "SeedSequence([base_seed, run_index])",
}


def arm_directory(cfg: ExperimentConfig, kind: PolicyKind) -> Path:
    """``<output_dir>/<hash of the single-arm config>``."""
    return Path(cfg.output_dir) / config_hash(cfg.for_policy(kind))


def prepare_output(output_dir: Union[str, Path]) -> Path:
    """Create the output directory and check that it is writable."""
    path = Path(output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_test"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as e:
        raise ConfigError(f"output directory {path} is not writable: {e}") from e
    return path


def _write_json(path: Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=4)


class RunWriter:
    """
    Writes one run's artifacts under its own directory.

    Layout: ``eval.csv``, ``meta.json``, ``checkpoints/q_<step>.npy`` with
    JSON sidecars and ``si/si_<step>.csv`` per checkpoint.
    """

    def __init__(self, run_dir: Union[str, Path]):
        """
        Initialize the writer.

        Args:
            run_dir: Directory owned by this run.
        """
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)

    @property
    def checkpoint_dir(self) -> Path:
        return self.run_dir / "checkpoints"

    @property
    def si_dir(self) -> Path:
        return self.run_dir / "si"

    def write_eval(self, record: RunRecord) -> bool:
        try:
            record.eval_frame().to_csv(self.run_dir / "eval.csv", index=False)
            return True
        except OSError as e:
            logger.error("eval output error for seed %d: %s", record.seed, e)
            return False

    def write_meta(self, record: RunRecord, cfg: ExperimentConfig) -> bool:
        meta = {
            "config": cfg.model_dump(mode="json"),
            "config_hash": record.config_hash,
            "policy": record.policy.value,
            "seed": record.seed,
            "run_index": record.run_index,
            "step_cap": record.step_cap,
            "steps_to_optimal": record.steps_label,
            "exploration_steps": record.exploration_steps,
            "episodes": record.episodes,
            "exploitation_fraction": record.exploitation_fraction,
            "visited_states": record.visited_states(),
            "wall_clock": record.wall_clock,
            "version": __version__,
            "decisions": {**DECISIONS, "threshold_mode": cfg.threshold_mode},
        }
        try:
            _write_json(self.run_dir / "meta.json", meta)
            return True
        except OSError as e:
            logger.error("meta output error for seed %d: %s", record.seed, e)
            return False

    def write_checkpoints(self, record: RunRecord, env: GridMaze, ratio: float) -> bool:
        try:
            self.si_dir.mkdir(exist_ok=True)
            for cp in record.checkpoints:
                save_checkpoint(self.checkpoint_dir, cp, record.seed)
                si_map = si_map_from_table(QTable(cp.q_snapshot), ratio)
                si_map.to_frame(env.coords).to_csv(self.si_dir / f"si_{cp.step}.csv", index=False)
            return True
        except OSError as e:
            logger.error("checkpoint output error for seed %d: %s", record.seed, e)
            return False

    def write_run(self, record: RunRecord, cfg: ExperimentConfig) -> bool:
        """Write every artifact; False if any of them failed."""
        env = build_environment(cfg)
        results = [
            self.write_eval(record),
            self.write_meta(record, cfg),
            self.write_checkpoints(record, env, cfg.q),
        ]
        return all(results)


def write_arm_summary(arm_dir: Union[str, Path], records: List[RunRecord]) -> Path:
    """``steps_to_optimal.csv`` with header ``seed,steps``, in run order."""
    path = Path(arm_dir) / STEPS_FILE
    ordered = sorted(records, key=lambda r: r.run_index)
    frame = pd.DataFrame({
        "seed": [r.seed for r in ordered],
        "steps": [r.steps_label for r in ordered],
    })
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def write_manifest(cfg: ExperimentConfig) -> Path:
    """Map each policy arm to its run directory."""
    path = Path(cfg.output_dir) / MANIFEST
    manifest = {
        "config": cfg.model_dump(mode="json"),
        "config_hash": config_hash(cfg),
        "version": __version__,
        "arms": {kind.value: config_hash(cfg.for_policy(kind)) for kind in cfg.policies},
    }
    _write_json(path, manifest)
    return path


def read_manifest(output_dir: Union[str, Path]) -> dict:
    path = Path(output_dir) / MANIFEST
    if not path.exists():
        raise ConfigError(f"no {MANIFEST} in {output_dir}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_run(run_dir: Union[str, Path]) -> Tuple[RunRecord, ExperimentConfig]:
    """Restore a RunRecord and its single-arm config from disk."""
    run_dir = Path(run_dir)
    meta_path = run_dir / "meta.json"
    if not meta_path.exists():
        raise ConfigError(f"{run_dir} holds no run (missing meta.json)")
    with open(meta_path, "r", encoding="utf-8") as f:
        meta = json.load(f)
    cfg = build_config(meta["config"])

    steps = meta["steps_to_optimal"]
    evals = pd.read_csv(run_dir / "eval.csv")
    visited = np.zeros(build_environment(cfg).state_count, dtype=bool)
    visited[meta.get("visited_states", [])] = True

    record = RunRecord(
        policy=PolicyKind(meta["policy"]),
        seed=int(meta["seed"]),
        run_index=int(meta["run_index"]),
        config_hash=meta["config_hash"],
        step_cap=int(meta["step_cap"]),
        steps_to_optimal=None if steps == NOT_REACHED else int(steps),
        eval_steps=evals["step"].astype(int).tolist(),
        eval_returns=evals["return"].astype(float).tolist(),
        checkpoints=load_checkpoints(run_dir / "checkpoints"),
        exploration_steps=int(meta["exploration_steps"]),
        episodes=int(meta["episodes"]),
        exploitation_fraction=float(meta["exploitation_fraction"]),
        visited=visited,
        wall_clock=float(meta["wall_clock"]),
    )
    return record, cfg


def load_arm(arm_dir: Union[str, Path]) -> List[RunRecord]:
    """All runs of one policy arm, in run order."""
    arm_dir = Path(arm_dir)
    if not arm_dir.is_dir():
        raise ConfigError(f"arm directory {arm_dir} does not exist")
    records = [load_run(p)[0] for p in arm_dir.iterdir() if (p / "meta.json").exists()]
    if not records:
        raise ConfigError(f"no runs under {arm_dir}")
    return sorted(records, key=lambda r: r.run_index)


def arm_records(output_dir: Union[str, Path], kind: Union[str, PolicyKind]) -> List[RunRecord]:
    """Load one arm through the output directory's manifest."""
    manifest = read_manifest(output_dir)
    kind = PolicyKind(kind)
    arms: Dict[str, str] = manifest["arms"]
    if kind.value not in arms:
        raise ConfigError(f"policy {kind.value!r} was not run in {output_dir}")
    return load_arm(Path(output_dir) / arms[kind.value])


def emit_si_grid(
    record: RunRecord,
    at_step: int,
    env: GridMaze,
    path: Optional[Union[str, Path]] = None,
    ratio: float = 0.1,
) -> np.ndarray:
    """
    Normalized SI grid of the latest snapshot at or before ``at_step``.

    Written as CSV with one row per maze row when ``path`` is given.

    Raises:
        SnapshotError: No checkpoint at or before ``at_step``.
    """
    if not record.checkpoints:
        raise SnapshotError(f"run with seed {record.seed} has no snapshots")
    si_map = si_map_from_table(record.q_at(at_step), ratio)
    grid = normalized_grid(si_map, env.height, env.width)
    if path is not None:
        frame = pd.DataFrame(grid)
        frame.index.name = "row"
        frame.to_csv(path)
    return grid
