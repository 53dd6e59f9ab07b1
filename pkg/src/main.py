"""Command-line entry point: ``python -m src.main <verb> ...``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .config import (
    ExperimentConfig,
    McmcConfig,
    build_config,
    get_settings,
    parse_value,
    read_config_file,
)
from .critical import TOP_K, knack_timing, match_ratio_series, si_map_from_table, top_k_record
from .errors import ConfigError, ContractError
from .harness import (
    arm_records,
    build_environment,
    compare,
    emit_si_grid,
    load_run,
    run_experiment,
    run_selftest,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON or key=value config file")
    for name in ExperimentConfig.model_fields:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, metavar="VALUE")


def _add_mcmc_flags(parser: argparse.ArgumentParser) -> None:
    for name in McmcConfig.model_fields:
        parser.add_argument(f"--mcmc-{name.replace('_', '-')}", dest=f"mcmc_{name}", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critstate",
        description="Critical-state exploration experiments on grid mazes.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    train = sub.add_parser("train", help="run every policy arm over every seed")
    _add_config_flags(train)

    cmp_ = sub.add_parser("compare", help="compare two arms of a finished experiment")
    cmp_.add_argument("--output-dir", required=True)
    cmp_.add_argument("--a", default="proposed", help="policy kind of the first arm")
    cmp_.add_argument("--b", default="epsilon_greedy", help="policy kind of the second arm")
    cmp_.add_argument("--method", choices=("wilcoxon", "bayes"), default="wilcoxon")
    cmp_.add_argument("--wilcoxon-method", choices=("auto", "exact", "normal"), default="auto")
    cmp_.add_argument("--report", help="report path (default: <output-dir>/compare_<a>_<b>_<method>.json)")
    _add_mcmc_flags(cmp_)

    si = sub.add_parser("si-map", help="emit the normalized SI grid of one run")
    si.add_argument("--run", required=True, help="run directory (<output-dir>/<hash>/<seed>)")
    si.add_argument("--step", type=int, default=None, help="snapshot step (default: last)")
    si.add_argument("--out", default=None)

    mr = sub.add_parser("match-ratio", help="match ratio of the top-K SI states over training")
    mr.add_argument("--run", required=True)
    mr.add_argument("--k", type=int, default=TOP_K)
    mr.add_argument("--out", default=None)

    sub.add_parser("stats-selftest", help="check the statistical machinery")
    return parser


def _collect(args: argparse.Namespace, names, prefix: str = "") -> Dict[str, Any]:
    values = {}
    for name in names:
        raw = getattr(args, prefix + name, None)
        if raw is not None:
            values[name] = parse_value(name, raw)
    return values


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Environment settings, then the config file, then command-line flags."""
    settings = get_settings()
    data: Dict[str, Any] = {}
    if settings.workers is not None:
        data["workers"] = settings.workers
    if settings.output_dir is not None:
        data["output_dir"] = settings.output_dir
    if args.config:
        data.update(read_config_file(args.config))
    data.update(_collect(args, ExperimentConfig.model_fields))
    return build_config(data)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    print(f"Training {', '.join(k.value for k in cfg.policies)} on {cfg.maze_file or cfg.environment}")
    results = run_experiment(cfg)
    for kind, records in results.items():
        reached = [r.steps_to_optimal for r in records if r.reached]
        mean = sum(reached) / len(reached) if reached else float("nan")
        print(f"{kind.value}: {len(reached)}/{len(records)} reached optimal, mean steps {mean:.1f}")
    print(f"Results written to: {cfg.output_dir}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        mcmc_cfg = McmcConfig(**_collect(args, McmcConfig.model_fields, prefix="mcmc_"))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    records_a = arm_records(args.output_dir, args.a)
    records_b = arm_records(args.output_dir, args.b)
    report = compare(
        records_a,
        records_b,
        method=args.method,
        label_a=args.a,
        label_b=args.b,
        mcmc_cfg=mcmc_cfg,
        wilcoxon_method=args.wilcoxon_method,
    )
    path = args.report or Path(args.output_dir) / f"compare_{args.a}_{args.b}_{args.method}.json"
    report.save(path)
    print(report.summary())
    print(f"Report written to: {path}")
    return EXIT_OK


def cmd_si_map(args: argparse.Namespace) -> int:
    record, cfg = load_run(args.run)
    env = build_environment(cfg)
    step = record.checkpoints[-1].step if args.step is None and record.checkpoints else args.step
    out = args.out or Path(args.run) / "si" / f"grid_{step}.csv"
    grid = emit_si_grid(record, step, env, out, cfg.q)
    row, col = divmod(int(grid.argmax()), env.width)
    print(f"SI grid at step {step}: max at ({row}, {col})")
    print(f"Grid written to: {out}")
    return EXIT_OK


def cmd_match_ratio(args: argparse.Namespace) -> int:
    record, cfg = load_run(args.run)
    env = build_environment(cfg)
    coords = env.coordinate_array()
    candidates = record.visited_states() or None
    tops = [
        top_k_record(cp.step, si_map_from_table(record.q_at(cp.step), cfg.q).si, coords, args.k, candidates)
        for cp in record.checkpoints
    ]
    ratios = match_ratio_series(tops, tops[-1])
    frame = pd.DataFrame({"step": [t.step for t in tops], "match_ratio": ratios})
    out = args.out or Path(args.run) / "match_ratio.csv"
    frame.to_csv(out, index=False)

    timing = knack_timing(frame["step"], ratios, record.eval_steps, record.eval_returns)
    print(f"Match ratio >= 0.9 first at step {timing.match_step}")
    print(f"Smoothed return > 90% of final first at step {timing.return_step}")
    print(f"Identification precedes the return rise: {timing.identification_first}")
    print(f"Series written to: {out}")
    return EXIT_OK


def cmd_stats_selftest(args: argparse.Namespace) -> int:
    results = run_selftest()
    for check in results:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    return EXIT_OK if all(c.passed for c in results) else EXIT_RUNTIME


COMMANDS = {
    "train": cmd_train,
    "compare": cmd_compare,
    "si-map": cmd_si_map,
    "match-ratio": cmd_match_ratio,
    "stats-selftest": cmd_stats_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, ContractError) as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("%s failed", args.verb)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
