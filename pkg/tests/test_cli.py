from pathlib import Path

import pytest

from efebo import __version__
from efebo.bench._export import summary_csv_header
from efebo.cli import (
    exit_check_failed,
    exit_config_error,
    exit_io_error,
    exit_ok,
    main,
)

_small_config = """\
master_seed: 1
n_objectives: 1
workers: 1
run:
  grid: {lower: -8.0, upper: 8.0, n: 41}
  iterations: 2
methods:
  - {kind: VAR}
  - {kind: EFE}
"""


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "bench.yaml"
    path.write_text(_small_config)
    return path


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_bench(config_file: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "results"
    assert main(["bench", "--config", str(config_file), "--out", str(out)]) == exit_ok
    assert (out / "summary.csv").read_text().splitlines()[0] == summary_csv_header
    assert (out / "config.replay.json").exists()
    printed = capsys.readouterr().out
    assert "VAR" in printed
    assert "EFE" in printed
    assert "2 runs completed, 0 failed" in printed


def test_bench_is_reproducible(config_file: Path, tmp_path: Path) -> None:
    for name in ("a", "b"):
        assert main(["bench", "--config", str(config_file), "--out", str(tmp_path / name)]) == exit_ok
    for name in ("summary.csv", "scatter.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bench_overrides(config_file: Path, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    out = tmp_path / "results"
    args = ["bench", "--config", str(config_file), "--out", str(out), "--seed", "4", "--methods", "efe"]
    assert main([*args, "--format", "json"]) == exit_ok
    assert "overrides master_seed" in caplog.text
    assert (out / "summary.json").exists()
    assert not (out / "summary.csv").exists()
    assert (out / "runs" / "EFE").is_dir()
    assert not (out / "runs" / "VAR").exists()


def test_bench_replay(config_file: Path, tmp_path: Path) -> None:
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["bench", "--config", str(config_file), "--out", str(first)]) == exit_ok
    replay = first / "config.replay.json"
    assert main(["bench", "--config", str(replay), "--out", str(second)]) == exit_ok
    assert (first / "scatter.csv").read_bytes() == (second / "scatter.csv").read_bytes()


def test_bench_unknown_method(config_file: Path, tmp_path: Path) -> None:
    args = ["bench", "--config", str(config_file), "--out", str(tmp_path), "--methods", "GP-UCB"]
    assert main(args) == exit_config_error


def test_bench_invalid_config(tmp_path: Path) -> None:
    path = tmp_path / "invalid.yaml"
    path.write_text("n_objectives: 0\n")
    assert main(["bench", "--config", str(path), "--out", str(tmp_path)]) == exit_config_error


@pytest.mark.parametrize(
    ("document",),
    (
        ("run: {iterations: fifty}\n",),
        ("n_objectives: many\n",),
        ("run: {initial_points: 5}\n",),
        ("run: {obs_noise_std: loud}\n",),
    ),
)
def test_bench_malformed_values(tmp_path: Path, document: str) -> None:
    path = tmp_path / "malformed.yaml"
    path.write_text(document)
    assert main(["bench", "--config", str(path), "--out", str(tmp_path)]) == exit_config_error


def test_bench_missing_config(tmp_path: Path) -> None:
    assert main(["bench", "--config", str(tmp_path / "missing.yaml")]) == exit_io_error


def test_bench_unwritable_output(config_file: Path, tmp_path: Path) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["bench", "--config", str(config_file), "--out", str(blocker / "out")]) == exit_io_error


def test_vdp(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["vdp", "--out", str(tmp_path), "--iterations", "2", "--seed", "1"]) == exit_ok
    assert (tmp_path / "vdp" / "curves.csv").exists()
    assert (tmp_path / "vdp" / "adaptive.json").exists()
    assert (tmp_path / "vdp" / "fixed.json").exists()
    printed = capsys.readouterr().out
    assert "adaptive" in printed
    assert "fixed" in printed


def test_theory_check(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["theory-check"]) == exit_ok
    assert "FAIL" not in capsys.readouterr().out


def test_theory_check_failure(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["theory-check", "--mc-samples", "10"]) == exit_check_failed
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize(
    ("argv",),
    (
        ([],),
        (["bench", "--workers", "0"],),
        (["bench", "--format", "xlsx"],),
        (["vdp", "--iterations", "-1"],),
        (["theory-check", "--seed", "x"],),
    ),
)
def test_invalid_arguments(argv: list[str]) -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(argv)
    assert exc_info.value.code == 2
