"""Statistical comparison of exploration methods."""

from .bayes import PosteriorSummary, PriorBounds, fit_curve_model, prior_bounds, significant_intervals
from .curves import CurveSet, check_shared_grid
from .wilcoxon import EXACT_MAX_SIZE, RankSumResult, wilcoxon_rank_sum

__all__ = [
    "PosteriorSummary",
    "PriorBounds",
    "fit_curve_model",
    "prior_bounds",
    "significant_intervals",
    "CurveSet",
    "check_shared_grid",
    "EXACT_MAX_SIZE",
    "RankSumResult",
    "wilcoxon_rank_sum",
]
