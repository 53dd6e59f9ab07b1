"""Quick checks of the statistical machinery behind ``stats-selftest``."""

import itertools
from typing import List, NamedTuple

import numpy as np

from ..config import McmcConfig
from ..exploration import epsilon_prime
from ..stats import CurveSet, fit_curve_model, wilcoxon_rank_sum


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def check_wilcoxon_exact() -> CheckResult:
    result = wilcoxon_rank_sum([1, 2], [3, 4], method="exact")
    passed = abs(result.pvalue - 1.0 / 3.0) < 1e-12
    return CheckResult("wilcoxon exact", passed, f"p={result.pvalue:.6f}, expected 1/3")


def check_exploitation_identity(points: int = 10) -> CheckResult:
    """q*k + (1 - q)(1 - eps') = 1 - eps over a points**3 grid of valid triples."""
    worst = 0.0
    grid = np.linspace(0.0, 1.0, points)
    for k, q, u in itertools.product(grid, np.linspace(0.05, 0.95, points), grid):
        low = (1.0 - k) * q
        eps = low + u * (1.0 - q)
        eps_p = epsilon_prime(eps, k, q)
        worst = max(worst, abs(q * k + (1.0 - q) * (1.0 - eps_p) - (1.0 - eps)))
    return CheckResult("exploitation identity", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_bayes_offset(seed: int = 0) -> CheckResult:
    """Reduced synthetic run: a constant offset of 5 under unit noise."""
    rng = np.random.default_rng(seed)
    steps = np.arange(1, 31) * 1000
    trend = np.linspace(0.0, 10.0, steps.size)
    proposed = CurveSet("proposed", steps, trend[:, None] + rng.normal(size=(steps.size, 5)))
    baseline = CurveSet("baseline", steps, trend[:, None] - 5.0 + rng.normal(size=(steps.size, 5)))
    cfg = McmcConfig(chains=2, iterations=3000, burn_in=1500, thin=2, smooth_window=1, seed=seed)
    summary = fit_curve_model(proposed, baseline, cfg)
    excludes = float(np.mean(summary.delta_lower > 0))
    passed = excludes >= 0.8 and abs(float(summary.delta_mean.mean()) - 5.0) < 1.0
    return CheckResult(
        "bayes offset",
        passed,
        f"interval excludes 0 on {excludes:.0%} of steps, mean delta {summary.delta_mean.mean():.2f}",
    )


def run_selftest() -> List[CheckResult]:
    return [check_wilcoxon_exact(), check_exploitation_identity(), check_bayes_offset()]
