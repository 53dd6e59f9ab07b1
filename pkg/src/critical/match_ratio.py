"""Timing of top-K critical-state identification during training."""

from dataclasses import dataclass
from typing import Hashable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from ..errors import ContractError

TOP_K = 10


@dataclass(frozen=True)
class TopKRecord:
    """The K highest-SI states at one step, with their embedding coordinates."""
    step: int
    states: Tuple[Hashable, ...]
    coordinates: np.ndarray

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.coordinates, dtype=float))
        if coords.shape[0] != len(self.states):
            raise ContractError("one coordinate row per state is required")
        object.__setattr__(self, "coordinates", coords)


def top_k_record(
    step: int,
    si: Sequence[float],
    coordinates: np.ndarray,
    k: int = TOP_K,
    candidates: Optional[Sequence[int]] = None,
) -> TopKRecord:
    """
    Select the ``k`` largest SIs among ``candidates`` (all states by default).

    Ties go to the lower state id.
    """
    si = np.asarray(si, dtype=float)
    pool = np.arange(si.size) if candidates is None else np.asarray(candidates, dtype=int)
    if pool.size == 0:
        raise ContractError("no candidate states for a top-K record")
    # Stable sort on -SI keeps ascending state ids among ties.
    order = pool[np.argsort(-si[pool], kind="stable")][:k]
    coords = np.asarray(coordinates, dtype=float)[order]
    return TopKRecord(step, tuple(int(s) for s in order), coords)


def set_distance(a: TopKRecord, b: TopKRecord) -> float:
    """Minimum Euclidean distance over all cross pairs of the two sets."""
    return float(cdist(a.coordinates, b.coordinates).min())


def match_ratio_from_distances(distances: Sequence[float]) -> np.ndarray:
    """m_t = 1 - d_t / max(d); all ones when every distance is zero."""
    d = np.asarray(distances, dtype=float)
    d_max = d.max() if d.size else 0.0
    if d_max == 0.0:
        return np.ones_like(d)
    return 1.0 - d / d_max


def match_ratio_series(checkpoints: List[TopKRecord], final: TopKRecord) -> np.ndarray:
    """Match ratio of each checkpoint's top-K set against the final one."""
    if len(checkpoints) < 2:
        raise ContractError("match ratio needs at least 2 checkpoints")
    distances = [set_distance(cp, final) for cp in checkpoints]
    return match_ratio_from_distances(distances)


@dataclass(frozen=True)
class KnackTiming:
    """When the top-K set settled versus when the return rose."""
    match_step: Optional[int]
    return_step: Optional[int]

    @property
    def identification_first(self) -> bool:
        return (
            self.match_step is not None
            and self.return_step is not None
            and self.match_step < self.return_step
        )


def knack_timing(
    match_steps: Sequence[int],
    match_ratios: Sequence[float],
    eval_steps: Sequence[int],
    eval_returns: Sequence[float],
    match_level: float = 0.9,
    return_level: float = 0.9,
    smooth_window: int = 10,
) -> KnackTiming:
    """
    First step with m_t >= ``match_level`` and first evaluation step whose
    trailing-mean return exceeds ``return_level`` of its final value.

    The return step is None when the final smoothed return is not positive.
    """
    match_step = None
    for step, m in zip(match_steps, match_ratios):
        if m >= match_level:
            match_step = int(step)
            break

    return_step = None
    if len(eval_returns):
        smoothed = pd.Series(eval_returns, dtype=float).rolling(smooth_window, min_periods=1).mean()
        final = smoothed.iloc[-1]
        if final > 0:
            above = np.flatnonzero(smoothed.to_numpy() > return_level * final)
            if above.size:
                return_step = int(eval_steps[above[0]])
    return KnackTiming(match_step, return_step)
