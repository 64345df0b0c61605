from __future__ import annotations

import math
import traceback
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from joblib import Parallel, delayed

from efebo.engine import RunRecord, run
from efebo.logging import logger
from efebo.objectives import generate_sinusoid

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from efebo.engine import RunConfig

    from ._config import BenchmarkConfig


@dataclass(frozen=True, kw_only=True, slots=True)
class RunFailure:
    """A benchmark run that raised an error."""

    method: str
    """Label of the acquisition function."""

    objective_index: int
    """Slot of the objective in the benchmark."""

    objective_seed: int
    """Seed of the objective."""

    error: str
    """The error message."""

    traceback: str
    """The formatted traceback of the error."""


@dataclass(frozen=True, kw_only=True, slots=True)
class MethodSummary:
    """Aggregate final metrics of one method. Standard deviations are sample (n - 1) values."""

    method: str
    n_runs: int
    mse_mean: float
    mse_sd: float
    regret_mean: float
    regret_sd: float


@dataclass(frozen=True, kw_only=True, slots=True)
class ScatterPoint:
    """Final metrics of one (method, objective) pair."""

    method: str
    objective_index: int
    objective_seed: int
    final_mse: float
    final_regret: float


@dataclass(frozen=True, kw_only=True, slots=True)
class AggregateReport:
    """
    Result of a benchmark.

    Every field except `config`, `records` and `failures` is derived from the records, see
    `from_records()`.
    """

    config: BenchmarkConfig
    """The configuration of the benchmark."""

    summaries: tuple[MethodSummary, ...]
    """One summary per configured method, in configuration order."""

    scatter: tuple[ScatterPoint, ...]
    """Final metrics per completed run, ordered by objective then method."""

    records: tuple[RunRecord, ...]
    """Completed runs, ordered by objective then method."""

    failures: tuple[RunFailure, ...] = ()
    """Runs that raised an error. They are excluded from every statistic."""

    @property
    def n_completed(self) -> int:
        """Number of completed runs."""
        return len(self.records)

    @classmethod
    def from_records(
        cls,
        config: BenchmarkConfig,
        records: Iterable[RunRecord],
        failures: Iterable[RunFailure] = (),
    ) -> AggregateReport:
        """
        Computes the report from run records.

        Arguments:
            config: The benchmark configuration.
            records: Completed runs, in any order.
            failures: Failed runs.
        """
        seed_order = {config.objective_seed(i): i for i in range(config.n_objectives)}
        method_order = {m.label: i for i, m in enumerate(config.methods)}

        def objective_index(r: RunRecord) -> int:
            return -1 if r.objective_seed is None else seed_order.get(r.objective_seed, -1)

        ordered = tuple(sorted(records, key=lambda r: (objective_index(r), method_order.get(r.method, -1))))
        scatter = tuple(
            ScatterPoint(
                method=r.method,
                objective_index=objective_index(r),
                objective_seed=-1 if r.objective_seed is None else r.objective_seed,
                final_mse=r.final.gp_mse,
                final_regret=r.final.simple_regret,
            )
            for r in ordered
        )
        return cls(
            config=config,
            summaries=tuple(_summarize(m.label, scatter) for m in config.methods),
            scatter=scatter,
            records=ordered,
            failures=tuple(failures),
        )


def sample_sd(values: Sequence[float]) -> float:
    """Sample standard deviation, `0.0` for fewer than two values."""
    if len(values) < 2:
        return 0.0
    return float(np.std(np.asarray(values, dtype=np.float64), ddof=1))


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(np.asarray(values, dtype=np.float64))) if values else math.nan


def _summarize(method: str, scatter: Sequence[ScatterPoint]) -> MethodSummary:
    mse = [p.final_mse for p in scatter if p.method == method]
    regret = [p.final_regret for p in scatter if p.method == method]
    return MethodSummary(
        method=method,
        n_runs=len(mse),
        mse_mean=_mean(mse),
        mse_sd=sample_sd(mse),
        regret_mean=_mean(regret),
        regret_sd=sample_sd(regret),
    )


def _run_slot(config: RunConfig, objective_index: int, objective_seed: int) -> RunRecord | RunFailure:
    """Executes one (objective, method) run. Executed in worker processes."""
    try:
        return run(config, generate_sinusoid(objective_seed), objective_seed=objective_seed)
    except Exception as e:
        return RunFailure(
            method=config.acquisition.label,
            objective_index=objective_index,
            objective_seed=objective_seed,
            error=f"{type(e).__name__}: {e}",
            traceback=traceback.format_exc(),
        )


def run_benchmark(cfg: BenchmarkConfig) -> AggregateReport:
    """
    Runs every method on every objective of the benchmark.

    Runs are distributed over `cfg.workers` processes. Each run owns its random number
    generators, and the results are collected in a fixed order, so the report does not
    depend on the number of workers.

    Failed runs are logged, recorded on the report and excluded from the statistics.
    """
    slots = [
        (cfg.run.make(method, seed=cfg.noise_seed(i)), i, cfg.objective_seed(i))
        for i in range(cfg.n_objectives)
        for method in cfg.methods
    ]
    logger.info(
        f"Starting benchmark: {cfg.n_objectives} objectives, {len(cfg.methods)} methods, "
        f"{cfg.workers} worker(s)"
    )
    results = Parallel(n_jobs=cfg.workers)(delayed(_run_slot)(*slot) for slot in slots)

    records: list[RunRecord] = []
    failures: list[RunFailure] = []
    for result in results:
        if isinstance(result, RunFailure):
            logger.warning(
                f"Run {result.method} on objective {result.objective_index} failed: {result.error}\n"
                f"{result.traceback}"
            )
            failures.append(result)
        else:
            records.append(result)

    if failures:
        logger.warning(f"{len(failures)} of {len(slots)} runs failed and are excluded from the report.")
    logger.info(f"Finished benchmark: {len(records)} of {len(slots)} runs completed")
    return AggregateReport.from_records(cfg, records, failures)
