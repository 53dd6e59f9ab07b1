"""
State importance (SI): the variance of Q over a uniform action distribution.

A state is critical when its SI is strictly above the (1 - q)-quantile of the
observed SIs.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ContractError, NumericError
from ..learning import QTable

logger = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 1000

QFunction = Callable[[Any, Any], float]


def _population_variance(values: np.ndarray) -> float:
    # Exact zero for constant inputs, which float summation does not guarantee.
    if np.all(values == values.flat[0]):
        return 0.0
    return float(np.var(values))


def si_exact(q_row: Sequence[float]) -> float:
    """Population variance of the Q-values of one state."""
    row = np.asarray(q_row, dtype=float).ravel()
    if row.size < 2:
        raise ContractError(f"SI needs at least 2 actions, got {row.size}")
    return _population_variance(row)


def _sample_actions(
    bounds: Tuple[Any, Any], n: int, rng: np.random.Generator
) -> np.ndarray:
    low = np.asarray(bounds[0], dtype=float)
    high = np.asarray(bounds[1], dtype=float)
    if low.shape != high.shape:
        raise ContractError("action bounds differ in shape")
    if not (np.all(np.isfinite(low)) and np.all(np.isfinite(high))):
        raise ContractError("action bounds must be finite")
    if np.any(high < low):
        raise ContractError("action upper bound below lower bound")
    return rng.uniform(low, high, size=(n,) + low.shape)


def si_monte_carlo(
    qf: QFunction,
    s: Any,
    n: int = DEFAULT_MC_SAMPLES,
    action_bounds: Tuple[Any, Any] = (0.0, 1.0),
    rng: Optional[np.random.Generator] = None,
    vectorized: bool = False,
) -> float:
    """
    Monte Carlo SI for a continuous action box.

    Draws ``n`` actions uniformly from ``action_bounds`` and returns the
    population variance of ``qf(s, a)``. With ``vectorized`` the whole
    action batch is passed to ``qf`` in one call.

    Raises:
        NumericError: ``qf`` returned a non-finite value.
    """
    if n < 2:
        raise ContractError(f"Monte Carlo SI needs n >= 2, got {n}")
    rng = rng if rng is not None else np.random.default_rng()
    actions = _sample_actions(action_bounds, n, rng)
    if vectorized:
        values = np.asarray(qf(s, actions), dtype=float).reshape(n)
    else:
        values = np.fromiter((qf(s, a) for a in actions), dtype=float, count=n)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        action = actions[bad[0]]
        raise NumericError(
            f"Q-function returned {values[bad[0]]} at state {s!r}, action {action!r}",
            state=s,
            action=action,
        )
    return _population_variance(values)


@dataclass
class MonteCarloImportance:
    """Continuous-action SI estimator bound to one Q-function."""
    qf: QFunction
    action_bounds: Tuple[Any, Any]
    n_samples: int = DEFAULT_MC_SAMPLES
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    vectorized: bool = False

    def __call__(self, s: Any) -> float:
        return si_monte_carlo(
            self.qf, s, self.n_samples, self.action_bounds, self.rng, self.vectorized
        )


def importance_function(qf: Union[QTable, Callable[[Any], float]]) -> Callable[[Any], float]:
    """Per-state SI callable for a Q-table or an existing SI estimator."""
    if isinstance(qf, QTable):
        values = qf.values
        return lambda s: si_exact(values[s])
    if callable(qf):
        return qf
    raise ContractError(f"cannot compute SI from {type(qf).__name__}")


def compute_threshold(si_values: Iterable[float], q: float) -> float:
    """The (1 - q)-quantile of the SIs, linear interpolation between order statistics."""
    values = np.asarray(list(si_values), dtype=float)
    if values.size == 0:
        raise ContractError("cannot threshold an empty SI collection")
    if not 0.0 < q < 1.0:
        raise ContractError(f"critical ratio must lie in (0, 1), got {q}")
    return float(np.quantile(values, 1.0 - q))


@dataclass(frozen=True)
class SIMap:
    """SI per state with the derived threshold and critical set."""
    states: Tuple[Hashable, ...]
    si: np.ndarray
    threshold: float
    ratio: float
    critical_set: FrozenSet[Hashable]

    @classmethod
    def build(
        cls,
        states: Sequence[Hashable],
        si: Sequence[float],
        ratio: float,
        threshold_values: Optional[Sequence[float]] = None,
    ) -> "SIMap":
        """
        Threshold ``si`` at its (1 - ratio)-quantile.

        ``threshold_values`` overrides the sample the quantile is taken over
        (e.g. one SI per buffered visit, duplicates included).
        """
        si = np.asarray(si, dtype=float)
        if si.shape != (len(states),):
            raise ContractError("one SI value per state is required")
        if np.any(si < 0):
            raise ContractError("SI values must be non-negative")
        sample = si if threshold_values is None else threshold_values
        theta = compute_threshold(sample, ratio)
        critical = frozenset(s for s, v in zip(states, si) if v > theta)
        si.setflags(write=False)
        return cls(tuple(states), si, theta, ratio, critical)

    def is_critical(self, s: Hashable) -> bool:
        return s in self.critical_set

    @property
    def critical_fraction(self) -> float:
        return len(self.critical_set) / len(self.states) if self.states else 0.0

    def as_dict(self) -> Dict[Hashable, float]:
        return dict(zip(self.states, self.si.tolist()))

    def argmax(self, candidates: Optional[Iterable[Hashable]] = None) -> Hashable:
        """State with the largest SI, optionally among ``candidates``."""
        pool = self.states if candidates is None else tuple(candidates)
        lookup = self.as_dict()
        return max(pool, key=lambda s: lookup[s])

    def to_frame(self, coords: Optional[Callable[[Hashable], Tuple[int, int]]] = None) -> pd.DataFrame:
        """Rows of (state, [row, col,] si, is_critical) for CSV export."""
        frame = pd.DataFrame({"state": list(self.states)})
        if coords is not None:
            cells = [coords(s) for s in self.states]
            frame["row"] = [c[0] for c in cells]
            frame["col"] = [c[1] for c in cells]
        frame["si"] = self.si
        frame["is_critical"] = [s in self.critical_set for s in self.states]
        return frame


def si_map_from_table(
    q: QTable,
    ratio: float,
    states: Optional[Sequence[int]] = None,
) -> SIMap:
    """Exact SIs for all (or the given) states of a Q-table."""
    if q.action_count < 2:
        raise ContractError("SI needs at least 2 actions")
    index = np.arange(q.state_count) if states is None else np.asarray(states, dtype=int)
    rows = q.values[index]
    # np.var of a constant row can come out as tiny positive noise.
    si = np.where(np.all(rows == rows[:, :1], axis=1), 0.0, np.var(rows, axis=1))
    return SIMap.build(index.tolist(), si, ratio)


def normalized_grid(si_map: SIMap, height: int, width: int) -> np.ndarray:
    """SIs laid out on a grid and scaled by their maximum into [0, 1]."""
    grid = np.zeros((height, width))
    for s, v in zip(si_map.states, si_map.si):
        row, col = divmod(int(s), width)
        grid[row, col] = v
    peak = grid.max()
    if peak > 0:
        grid = grid / peak
    return grid
