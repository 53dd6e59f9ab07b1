"""Learning curves of several runs on a shared evaluation grid."""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd

from ..errors import ContractError, GridMismatchError


@dataclass(frozen=True)
class CurveSet:
    """
    Evaluation returns of one method.

    ``returns`` has shape [len(steps), runs]; every run shares ``steps``.
    """
    label: str
    steps: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.int64)
        returns = np.asarray(self.returns, dtype=float)
        if returns.ndim != 2 or returns.shape[0] != steps.size:
            raise ContractError(
                f"returns shape {returns.shape} does not match {steps.size} evaluation steps"
            )
        if returns.shape[1] == 0:
            raise ContractError(f"curve set {self.label!r} has no runs")
        if np.any(np.diff(steps) <= 0):
            raise ContractError("evaluation steps must be strictly increasing")
        if not np.all(np.isfinite(returns)):
            raise ContractError(f"curve set {self.label!r} has missing or non-finite returns")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "returns", returns)

    @property
    def run_count(self) -> int:
        return self.returns.shape[1]

    @classmethod
    def from_series(
        cls, label: str, steps: Sequence[int], series: Sequence[Sequence[float]]
    ) -> "CurveSet":
        """Build from one return series per run."""
        return cls(label, np.asarray(steps), np.column_stack([np.asarray(s, float) for s in series]))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, label: str) -> "CurveSet":
        """Long-format rows of (step, run_id, return)."""
        missing = {"step", "run_id", "return"} - set(frame.columns)
        if missing:
            raise ContractError(f"curve table lacks columns {sorted(missing)}")
        wide = frame.pivot(index="step", columns="run_id", values="return").sort_index()
        if wide.isna().to_numpy().any():
            raise GridMismatchError(f"runs of {label!r} are not evaluated on a shared grid")
        return cls(label, wide.index.to_numpy(), wide.to_numpy())

    @classmethod
    def from_csv(cls, path: Union[str, Path], label: str) -> "CurveSet":
        return cls.from_frame(pd.read_csv(path), label)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.returns, index=self.steps)
        frame.index.name = "step"
        long = frame.reset_index().melt(id_vars="step", var_name="run_id", value_name="return")
        return long.sort_values(["run_id", "step"], kind="stable").reset_index(drop=True)

    def smoothed(self, window: int) -> "CurveSet":
        """Trailing mean over the last ``window`` evaluations of each run."""
        if window <= 1:
            return self
        rolled = pd.DataFrame(self.returns).rolling(window, min_periods=1).mean()
        return CurveSet(self.label, self.steps, rolled.to_numpy())


def check_shared_grid(a: CurveSet, b: CurveSet) -> None:
    if a.steps.shape != b.steps.shape or np.any(a.steps != b.steps):
        raise GridMismatchError(
            f"{a.label!r} and {b.label!r} are evaluated on different step grids"
        )
