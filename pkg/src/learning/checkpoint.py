"""Q-table snapshots taken during a run."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..errors import ContractError, SnapshotError


@dataclass(frozen=True)
class Checkpoint:
    """A copy of the Q-values at an exploration-step count."""
    step: int
    q_snapshot: np.ndarray

    def sidecar(self, seed: Optional[int] = None) -> dict:
        return {
            "step": self.step,
            "shape": list(self.q_snapshot.shape),
            "seed": seed,
        }


def append_checkpoint(checkpoints: List[Checkpoint], checkpoint: Checkpoint) -> None:
    """Append, keeping steps strictly increasing."""
    if checkpoints and checkpoint.step <= checkpoints[-1].step:
        raise ContractError(
            f"checkpoint step {checkpoint.step} not after {checkpoints[-1].step}"
        )
    checkpoints.append(checkpoint)


def checkpoint_at(checkpoints: List[Checkpoint], step: int) -> Checkpoint:
    """Latest checkpoint taken at or before ``step``."""
    best = None
    for cp in checkpoints:
        if cp.step <= step:
            best = cp
        else:
            break
    if best is None:
        raise SnapshotError(f"no checkpoint at or before step {step}")
    return best


def save_checkpoint(
    directory: Union[str, Path],
    checkpoint: Checkpoint,
    seed: Optional[int] = None,
) -> Path:
    """Write ``q_<step>.npy`` plus a ``q_<step>.json`` sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"q_{checkpoint.step}.npy"
    np.save(path, checkpoint.q_snapshot)
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump(checkpoint.sidecar(seed), f, indent=4)
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint."""
    path = Path(path)
    with open(path.with_suffix(".json"), "r", encoding="utf-8") as f:
        meta = json.load(f)
    values = np.load(path)
    if list(values.shape) != meta["shape"]:
        raise SnapshotError(f"{path} shape {values.shape} disagrees with its sidecar")
    return Checkpoint(step=int(meta["step"]), q_snapshot=values)


def load_checkpoints(directory: Union[str, Path]) -> List[Checkpoint]:
    """All checkpoints in ``directory`` ordered by step."""
    paths = Path(directory).glob("q_*.npy")
    checkpoints = [load_checkpoint(p) for p in paths]
    return sorted(checkpoints, key=lambda cp: cp.step)
