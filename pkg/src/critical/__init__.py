"""Critical-state identification by the action variance of Q."""

from .buffer import RecentStateBuffer, refresh_critical_set
from .importance import (
    MonteCarloImportance,
    SIMap,
    compute_threshold,
    importance_function,
    normalized_grid,
    si_exact,
    si_map_from_table,
    si_monte_carlo,
)
from .match_ratio import (
    TOP_K,
    KnackTiming,
    TopKRecord,
    knack_timing,
    match_ratio_from_distances,
    match_ratio_series,
    set_distance,
    top_k_record,
)

__all__ = [
    "RecentStateBuffer",
    "refresh_critical_set",
    "MonteCarloImportance",
    "SIMap",
    "compute_threshold",
    "importance_function",
    "normalized_grid",
    "si_exact",
    "si_map_from_table",
    "si_monte_carlo",
    "TOP_K",
    "KnackTiming",
    "TopKRecord",
    "knack_timing",
    "match_ratio_from_distances",
    "match_ratio_series",
    "set_distance",
    "top_k_record",
]
