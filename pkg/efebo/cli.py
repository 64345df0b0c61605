"""
Command line interface: `efebo bench`, `efebo vdp` and `efebo theory-check`.

Exit codes: 0 on success, 1 if a theory check fails, 2 on configuration errors and 3 on
I/O errors.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING

from . import __version__
from .bench import (
    VdpDemoConfig,
    export,
    export_vdp,
    load_config,
    run_benchmark,
    run_theory_checks,
    run_vdp_demo,
)
from .bench._checks import all_passed, default_mc_samples, format_check_table
from .bench._export import export_formats
from .bench._vdp import with_seed
from .errors import ConfigError, IoFailure
from .logging import logger

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .bench import AggregateReport

exit_ok = 0
exit_check_failed = 1
exit_config_error = 2
exit_io_error = 3

_log_levels = (logging.WARNING, logging.INFO, logging.DEBUG)


def format_summary(report: AggregateReport) -> str:
    """Formats the per-method summary as a fixed-width table."""
    width = max(len("method"), *(len(s.method) for s in report.summaries))
    lines = [f"{'method':<{width}}  {'runs':>4}  {'final mse':>21}  {'final simple regret':>21}"]
    for s in report.summaries:
        lines.append(
            f"{s.method:<{width}}  {s.n_runs:>4}  {s.mse_mean:>10.4f} ± {s.mse_sd:<8.4f}  "
            f"{s.regret_mean:>10.4f} ± {s.regret_sd:<8.4f}"
        )
    lines.append(f"{report.n_completed} runs completed, {len(report.failures)} failed")
    return "\n".join(lines)


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    overrides = {"master_seed": args.seed, "workers": args.workers}
    for key, value in overrides.items():
        if value is None:
            continue
        if args.config is not None and getattr(cfg, key) != value:
            logger.warning(f"Command line overrides {key}={getattr(cfg, key)} of {args.config}: {value}")
        cfg = replace(cfg, **{key: value})
    if args.methods is not None:
        cfg = cfg.with_methods(args.methods.split(","))

    report = run_benchmark(cfg)
    export(report, args.out, args.format)
    print(format_summary(report))
    return exit_ok


def cmd_vdp(args: argparse.Namespace) -> int:
    cfg = VdpDemoConfig()
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    if args.iterations is not None:
        cfg = replace(cfg, iterations=args.iterations)

    result = run_vdp_demo(cfg)
    export_vdp(result, args.out)
    for m in result.modes:
        print(f"{m.mode:<8}  best kappa={m.best_kappa:.4f}  final mse={m.final_mse:.6g}")
    return exit_ok


def cmd_theory_check(args: argparse.Namespace) -> int:
    results = run_theory_checks(mc_samples=args.mc_samples, seed=args.seed)
    print(format_check_table(results))
    return exit_ok if all_passed(results) else exit_check_failed


def _positive_int(value: str) -> int:
    result = int(value)
    if result < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return result


def _non_negative_int(value: str) -> int:
    result = int(value)
    if result < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return result


def build_parser() -> argparse.ArgumentParser:
    """Creates the argument parser of the command line interface."""
    parser = argparse.ArgumentParser(
        prog="efebo",
        description="Bayesian optimization with the Expected Free Energy acquisition.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="Increase log verbosity (-v info, -vv debug)."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    bench = subparsers.add_parser("bench", help="Run the multi-method benchmark on random objectives.")
    bench.add_argument("--config", type=Path, default=None, help="Configuration file (YAML or JSON).")
    bench.add_argument("--seed", type=_non_negative_int, default=None, help="Override the master seed.")
    bench.add_argument("--out", type=Path, default=Path("results"), help="Output directory.")
    bench.add_argument("--workers", type=_positive_int, default=None, help="Number of worker processes.")
    bench.add_argument("--methods", default=None, help="Comma separated method labels to run.")
    bench.add_argument("--format", choices=export_formats, default="csv", help="Format of the tables.")
    bench.set_defaults(func=cmd_bench)

    vdp = subparsers.add_parser("vdp", help="Run the Van der Pol parameter identification demo.")
    vdp.add_argument("--seed", type=_non_negative_int, default=None, help="Seed of the reference noise.")
    vdp.add_argument("--out", type=Path, default=Path("results"), help="Output directory.")
    vdp.add_argument("--iterations", type=_positive_int, default=None, help="Iterations per mode.")
    vdp.set_defaults(func=cmd_vdp)

    check = subparsers.add_parser("theory-check", help="Run the numerical theory checks.")
    check.add_argument(
        "--mc-samples", type=_positive_int, default=default_mc_samples, help="Monte Carlo sample count."
    )
    check.add_argument("--seed", type=_non_negative_int, default=0, help="Seed of the random cases.")
    check.set_defaults(func=cmd_theory_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the command line interface.

    Returns:
        The exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_log_levels[min(args.verbose, len(_log_levels) - 1)],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return exit_config_error
    except IoFailure as e:
        logger.error(f"I/O error: {e}")
        return exit_io_error
