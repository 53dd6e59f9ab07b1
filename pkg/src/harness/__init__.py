"""Experiment orchestration, persistence and comparison reports."""

from .compare import ArmStats, ComparisonReport, censored_steps, compare, curve_set
from .outputs import (
    RunWriter,
    arm_directory,
    arm_records,
    emit_si_grid,
    load_arm,
    load_run,
    prepare_output,
    read_manifest,
    write_arm_summary,
    write_manifest,
)
from .runner import (
    NOT_REACHED,
    RunRecord,
    build_environment,
    derive_seed,
    run_experiment,
    run_seeds,
    run_single,
)
from .selftest import CheckResult, run_selftest

__all__ = [
    "ArmStats",
    "ComparisonReport",
    "censored_steps",
    "compare",
    "curve_set",
    "RunWriter",
    "arm_directory",
    "arm_records",
    "emit_si_grid",
    "load_arm",
    "load_run",
    "prepare_output",
    "read_manifest",
    "write_arm_summary",
    "write_manifest",
    "NOT_REACHED",
    "RunRecord",
    "build_environment",
    "derive_seed",
    "run_experiment",
    "run_seeds",
    "run_single",
    "CheckResult",
    "run_selftest",
]
