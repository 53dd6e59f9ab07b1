"""Comparison reports between two policy arms."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..config import McmcConfig
from ..errors import ContractError, GridMismatchError
from ..stats import CurveSet, PosteriorSummary, fit_curve_model, wilcoxon_rank_sum
from .runner import RunRecord


def censored_steps(records: Sequence[RunRecord]) -> np.ndarray:
    """Steps to optimal, with runs that never got there placed at their step cap."""
    return np.array(
        [r.steps_to_optimal if r.reached else r.step_cap for r in records], dtype=float
    )


def curve_set(records: Sequence[RunRecord], label: str) -> CurveSet:
    """Evaluation curves of an arm; every run must share one evaluation grid."""
    steps = records[0].eval_steps
    for r in records[1:]:
        if r.eval_steps != steps:
            raise GridMismatchError(f"runs of {label!r} are evaluated on different steps")
    return CurveSet.from_series(label, steps, [r.eval_returns for r in records])


@dataclass
class ArmStats:
    label: str
    runs: int
    reached: int
    mean: float
    std: float

    @classmethod
    def from_records(cls, label: str, records: Sequence[RunRecord]) -> "ArmStats":
        steps = pd.Series(censored_steps(records))
        return cls(
            label=label,
            runs=len(records),
            reached=sum(r.reached for r in records),
            mean=float(steps.mean()),
            std=float(steps.std()) if len(steps) > 1 else 0.0,
        )


@dataclass
class ComparisonReport:
    """Outcome of ``compare``; ``posterior`` is set for the bayes method only."""
    method: str
    a: ArmStats
    b: ArmStats
    statistic: Optional[float] = None
    pvalue: Optional[float] = None
    test: Optional[str] = None
    posterior: Optional[PosteriorSummary] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = {
            "method": self.method,
            "arms": [vars(self.a), vars(self.b)],
            "notes": list(self.notes),
        }
        if self.method == "wilcoxon":
            data.update(statistic=self.statistic, pvalue=self.pvalue, test=self.test)
        if self.posterior is not None:
            data["posterior"] = self.posterior.to_dict()
        return data

    def summary(self) -> str:
        lines = [
            f"{arm.label}: {arm.runs} runs, {arm.reached} reached optimal, "
            f"steps mean {arm.mean:.1f} (std {arm.std:.1f})"
            for arm in (self.a, self.b)
        ]
        if self.method == "wilcoxon":
            lines.append(f"Wilcoxon rank-sum ({self.test}): W={self.statistic:.1f}, p={self.pvalue:.3g}")
        elif self.posterior is not None:
            intervals = self.posterior.significant_intervals()
            text = ", ".join(f"{lo}-{hi}" for lo, hi in intervals) or "none"
            lines.append(f"steps where {self.a.label} beats {self.b.label} (95% interval > 0): {text}")
            lines.append(
                f"acceptance {self.posterior.acceptance_rate:.2f}, "
                f"R-hat max {self.posterior.rhat_max:.3f}, ESS min {self.posterior.ess_min:.0f}"
            )
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)

    def save(self, path: Union[str, Path]) -> Path:
        """JSON report, plus the posterior CSV next to it for the bayes method."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=4)
        if self.posterior is not None:
            self.posterior.to_frame().to_csv(path.with_suffix(".csv"), index=False)
        return path


def compare(
    records_a: Sequence[RunRecord],
    records_b: Sequence[RunRecord],
    method: Literal["wilcoxon", "bayes"] = "wilcoxon",
    label_a: str = "a",
    label_b: str = "b",
    mcmc_cfg: Optional[McmcConfig] = None,
    wilcoxon_method: Literal["auto", "exact", "normal"] = "auto",
) -> ComparisonReport:
    """
    Compare two arms.

    "wilcoxon" tests the steps-to-optimal samples; "bayes" fits the
    random-walk curve model with delta = a - b.

    Raises:
        ContractError: An arm is empty or the method is unknown.
        GridMismatchError: Curves are evaluated on different steps.
    """
    if not records_a or not records_b:
        raise ContractError("both arms need at least one run")
    report = ComparisonReport(
        method=method,
        a=ArmStats.from_records(label_a, records_a),
        b=ArmStats.from_records(label_b, records_b),
    )
    for arm in (report.a, report.b):
        if arm.reached < arm.runs:
            report.notes.append(
                f"{arm.runs - arm.reached} {arm.label} run(s) not reached; counted at the step cap"
            )

    if method == "wilcoxon":
        result = wilcoxon_rank_sum(censored_steps(records_a), censored_steps(records_b), wilcoxon_method)
        report.statistic, report.pvalue, report.test = result.statistic, result.pvalue, result.method
    elif method == "bayes":
        report.posterior = fit_curve_model(
            curve_set(records_a, label_a), curve_set(records_b, label_b), mcmc_cfg
        )
        report.notes.extend(report.posterior.warnings)
    else:
        raise ContractError(f"unknown comparison method {method!r}")
    return report
