from __future__ import annotations

import csv
import json
from dataclasses import asdict
from typing import TYPE_CHECKING, Any, Literal, TypeAlias

from efebo.engine import RunRecord
from efebo.errors import ConfigError, IoFailure
from efebo.logging import logger

from ._benchmark import AggregateReport, MethodSummary, RunFailure, ScatterPoint
from ._config import config_from_dict, config_to_dict

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from ._vdp import VdpDemoResult

ExportFormat: TypeAlias = Literal["csv", "json"]
"""Format of the summary and scatter tables."""

export_formats: tuple[ExportFormat, ...] = ("csv", "json")

summary_columns = ("method", "n_runs", "mse_mean", "mse_sd", "regret_mean", "regret_sd")
"""Columns of the summary table, one row per method."""

scatter_columns = ("method", "objective_index", "objective_seed", "final_mse", "final_regret")
"""Columns of the scatter table, one row per completed run."""

summary_csv_header = ",".join(summary_columns)
"""The exact header row of `summary.csv`."""

scatter_csv_header = ",".join(scatter_columns)
"""The exact header row of `scatter.csv`."""

replay_config_file = "config.replay.json"
failures_file = "failures.json"
runs_dir = "runs"


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoFailure("Failed to write file", path=path) from e


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure("Failed to read file", path=path) from e


def _dump_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def _write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as f:
            # Floats are written with repr(), which round-trips exactly.
            writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as e:
        raise IoFailure("Failed to write file", path=path) from e


def _read_csv(path: Path, header: str) -> list[dict[str, str]]:
    lines = _read_text(path).splitlines()
    if not lines or lines[0] != header:
        raise ConfigError(f"Unexpected header in {path}, expected '{header}'")
    return list(csv.DictReader(lines))


def run_record_path(directory: Path, method: str, objective_seed: int | None) -> Path:
    """Path of the persisted record of a run."""
    return directory / runs_dir / method / f"{objective_seed}.json"


def export(report: AggregateReport, directory: Path, fmt: ExportFormat = "csv") -> list[Path]:
    """
    Persists a benchmark report.

    Writes the summary and scatter tables in the given format, one JSON file per run,
    the failed runs and the fully resolved configuration for replay.

    Arguments:
        report: The report to persist.
        directory: Output directory, created if missing.
        fmt: Format of the summary and scatter tables.

    Returns:
        The written files.

    Raises:
        IoFailure: If a file cannot be written.
    """
    if fmt not in export_formats:
        raise ConfigError(f"Unknown export format: {fmt}")

    written: list[Path] = []
    summary_rows = [asdict(s) for s in report.summaries]
    scatter_rows = [asdict(p) for p in report.scatter]
    if fmt == "csv":
        _write_csv(path := directory / "summary.csv", summary_columns, summary_rows)
        written.append(path)
        _write_csv(path := directory / "scatter.csv", scatter_columns, scatter_rows)
        written.append(path)
    else:
        _write_text(path := directory / "summary.json", _dump_json(summary_rows))
        written.append(path)
        _write_text(path := directory / "scatter.json", _dump_json(scatter_rows))
        written.append(path)

    for record in report.records:
        path = run_record_path(directory, record.method, record.objective_seed)
        _write_text(path, _dump_json(record.to_dict()))
        written.append(path)

    _write_text(path := directory / failures_file, _dump_json([asdict(f) for f in report.failures]))
    written.append(path)
    _write_text(path := directory / replay_config_file, _dump_json(config_to_dict(report.config)))
    written.append(path)

    logger.info(f"Exported benchmark report to {directory} ({len(written)} files)")
    return written


def load_report(directory: Path, fmt: ExportFormat = "csv") -> AggregateReport:
    """
    Loads an exported report.

    The statistics are recomputed from the persisted run records, then compared with the
    persisted summary and scatter tables.

    Raises:
        IoFailure: If a file cannot be read.
        ConfigError: If the files are inconsistent.
    """
    try:
        config = config_from_dict(json.loads(_read_text(directory / replay_config_file)))
        failures = [RunFailure(**f) for f in json.loads(_read_text(directory / failures_file))]
    except (json.JSONDecodeError, TypeError) as e:
        raise ConfigError(f"Invalid report files in {directory}: {e}") from e

    failed = {(f.method, f.objective_seed) for f in failures}
    records: list[RunRecord] = []
    for i in range(config.n_objectives):
        seed = config.objective_seed(i)
        for method in config.methods:
            if (method.label, seed) in failed:
                continue
            path = run_record_path(directory, method.label, seed)
            try:
                records.append(RunRecord.from_dict(json.loads(_read_text(path))))
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise ConfigError(f"Invalid run record {path}: {e}") from e

    report = AggregateReport.from_records(config, records, failures)
    summaries, scatter = _load_tables(directory, fmt)
    # Compared as JSON, so NaN means of methods without completed runs compare equal.
    persisted = _dump_json([asdict(s) for s in summaries])
    if persisted != _dump_json([asdict(s) for s in report.summaries]) or scatter != list(report.scatter):
        raise ConfigError(f"The tables in {directory} do not match the persisted run records.")
    return report


def _load_tables(directory: Path, fmt: ExportFormat) -> tuple[list[MethodSummary], list[ScatterPoint]]:
    if fmt == "csv":
        summary_rows: list[dict[str, Any]] = _read_csv(directory / "summary.csv", summary_csv_header)
        scatter_rows: list[dict[str, Any]] = _read_csv(directory / "scatter.csv", scatter_csv_header)
    elif fmt == "json":
        summary_rows = json.loads(_read_text(directory / "summary.json"))
        scatter_rows = json.loads(_read_text(directory / "scatter.json"))
    else:
        raise ConfigError(f"Unknown export format: {fmt}")

    try:
        return (
            [
                MethodSummary(
                    method=str(r["method"]),
                    n_runs=int(r["n_runs"]),
                    mse_mean=float(r["mse_mean"]),
                    mse_sd=float(r["mse_sd"]),
                    regret_mean=float(r["regret_mean"]),
                    regret_sd=float(r["regret_sd"]),
                )
                for r in summary_rows
            ],
            [
                ScatterPoint(
                    method=str(r["method"]),
                    objective_index=int(r["objective_index"]),
                    objective_seed=int(r["objective_seed"]),
                    final_mse=float(r["final_mse"]),
                    final_regret=float(r["final_regret"]),
                )
                for r in scatter_rows
            ],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid table in {directory}: {e}") from e


# -- Van der Pol demo

vdp_curve_columns = ("kappa", "true_cost")
"""Leading columns of `vdp/curves.csv`, followed by `<mode>_mean,<mode>_lower,<mode>_upper` per mode."""


def export_vdp(result: VdpDemoResult, directory: Path) -> list[Path]:
    """
    Persists the plot data of the Van der Pol demo: `vdp/curves.csv` with the true cost and
    the final posterior band of each mode on the κ grid, and `vdp/<mode>.json` with the
    run record, queried points and summary of each mode.

    Raises:
        IoFailure: If a file cannot be written.
    """
    out = directory / "vdp"
    columns = list(vdp_curve_columns)
    for m in result.modes:
        columns += [f"{m.mode}_mean", f"{m.mode}_lower", f"{m.mode}_upper"]

    rows: list[dict[str, Any]] = []
    for i, kappa in enumerate(result.kappa):
        row: dict[str, Any] = {"kappa": float(kappa), "true_cost": float(result.true_cost[i])}
        for m in result.modes:
            row[f"{m.mode}_mean"] = float(m.mean[i])
            row[f"{m.mode}_lower"] = float(m.lower[i])
            row[f"{m.mode}_upper"] = float(m.upper[i])
        rows.append(row)

    _write_csv(curves := out / "curves.csv", columns, rows)
    written = [curves]
    for m in result.modes:
        data = {
            "mode": m.mode,
            "best_kappa": m.best_kappa,
            "final_mse": m.final_mse,
            "queried": list(m.queried),
            "record": m.record.to_dict(),
        }
        _write_text(path := out / f"{m.mode}.json", _dump_json(data))
        written.append(path)

    logger.info(f"Exported Van der Pol demo to {out}")
    return written
