"""Exception hierarchy for the critical-state toolkit."""

from typing import Any, Optional


class CriticalStateError(Exception):
    """Base class for all toolkit errors."""


class ContractError(CriticalStateError, ValueError):
    """A precondition of an operation was violated."""


class ScheduleError(ContractError):
    """Exploration schedule parameters are mutually inconsistent."""


class GridMismatchError(ContractError):
    """Two curve sets do not share an evaluation grid."""


class BudgetExceededError(CriticalStateError):
    """Exhaustive enumeration would exceed its trajectory budget."""


class NumericError(CriticalStateError, ArithmeticError):
    """A Q-function produced a non-finite value."""

    def __init__(self, message: str, state: Any = None, action: Optional[Any] = None):
        super().__init__(message)
        self.state = state
        self.action = action


class ConfigError(CriticalStateError):
    """Configuration is invalid or its output location is unusable."""


class SnapshotError(CriticalStateError):
    """No checkpoint exists at or before the requested step."""
