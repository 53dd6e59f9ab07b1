"""Recently visited states and periodic critical-set refresh."""

from collections import Counter, deque
from typing import Any, Callable, Deque, Hashable, Iterator, List, Union

from ..errors import ContractError
from ..learning import QTable
from .importance import SIMap, importance_function

DEFAULT_BUFFER_SIZE = 1000
DEFAULT_REFRESH_PERIOD = 1000


class RecentStateBuffer:
    """
    Holds the most recently visited states.

    Used when the state space is too large to compute the SI of every
    state: the threshold is recomputed from the buffered visits only.
    """

    def __init__(
        self,
        max_states: int = DEFAULT_BUFFER_SIZE,
        refresh_period: int = DEFAULT_REFRESH_PERIOD,
    ):
        """
        Initialize the buffer.

        Args:
            max_states: Capacity; the oldest visit is evicted first.
            refresh_period: Steps between critical-set refreshes.
        """
        if max_states < 1 or refresh_period < 1:
            raise ContractError("buffer size and refresh period must be positive")
        self.max_states = max_states
        self.refresh_period = refresh_period

        self._states: Deque[Hashable] = deque(maxlen=max_states)
        self._since_refresh = 0

    def push(self, state: Hashable) -> bool:
        """
        Record a visit.

        Returns:
            True when a refresh is due.
        """
        self._states.append(state)
        self._since_refresh += 1
        return self._since_refresh >= self.refresh_period

    def mark_refreshed(self) -> None:
        self._since_refresh = 0

    @property
    def refresh_due(self) -> bool:
        return self._since_refresh >= self.refresh_period

    def states(self) -> List[Hashable]:
        """Buffered visits, oldest first."""
        return list(self._states)

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[Hashable]:
        return iter(list(self._states))


def refresh_critical_set(
    buffer: RecentStateBuffer,
    qf: Union[QTable, Callable[[Any], float]],
    q: float,
) -> SIMap:
    """
    Recompute SIs, threshold and critical set from the buffered visits.

    The quantile is taken over one SI per buffered visit, so frequently
    visited states weigh more. Each distinct state is evaluated once. A
    fresh SIMap is returned; callers swap it in as a whole.
    """
    visits = buffer.states()
    if not visits:
        raise ContractError("cannot refresh from an empty buffer")
    importance = importance_function(qf)
    counts = Counter(visits)
    distinct = list(counts)
    si = [importance(s) for s in distinct]
    per_visit = [v for v, s in zip(si, distinct) for _ in range(counts[s])]
    buffer.mark_refreshed()
    return SIMap.build(distinct, si, q, threshold_values=per_visit)
