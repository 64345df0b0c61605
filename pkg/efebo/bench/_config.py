from __future__ import annotations

import importlib.resources
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from efebo.acquisition import AcquisitionKind, AcquisitionSpec, EfePreference
from efebo.engine import RunConfig
from efebo.errors import ConfigError, IoFailure
from efebo.gp import GpConfig, Grid
from efebo.logging import logger
from efebo.objectives import VdpConfig
from efebo.utils import derive_seed

default_config_resource = "default.config"
"""Name of the packaged default benchmark configuration."""

_objective_key = 0
_noise_key = 1


@dataclass(frozen=True, kw_only=True, slots=True)
class RunTemplate:
    """
    The part of a `RunConfig` that is shared by every method and objective of a benchmark.
    """

    grid: Grid = field(default_factory=lambda: Grid(lower=-8.0, upper=8.0, n=400))
    """The candidate grid."""

    gp: GpConfig = field(default_factory=lambda: GpConfig(lengthscale=0.5, noise_variance=0.04))
    """Fixed GP hyperparameters."""

    initial_points: tuple[float, ...] = (-5.0, 0.0, 5.0)
    """Shared initial design."""

    iterations: int = 50
    """Acquisition steps per run."""

    obs_noise_std: float = 0.2
    """Observation noise standard deviation."""

    def make(self, acquisition: AcquisitionSpec, *, seed: int) -> RunConfig:
        """Creates the `RunConfig` of one run."""
        return RunConfig(
            grid=self.grid,
            gp=self.gp,
            acquisition=acquisition,
            initial_points=self.initial_points,
            iterations=self.iterations,
            obs_noise_std=self.obs_noise_std,
            seed=seed,
        )


def default_methods() -> tuple[AcquisitionSpec, ...]:
    """The seven compared acquisition functions with their benchmark settings."""
    return (
        AcquisitionSpec.ucb(2.0),
        AcquisitionSpec.ei(),
        AcquisitionSpec.pi(0.01),
        AcquisitionSpec.var(),
        AcquisitionSpec.ts(),
        AcquisitionSpec.efe_with(EfePreference(tau_sq_min=1.0, tau_sq_max=60.0, normalization="prior")),
        AcquisitionSpec.kg(),
    )


@dataclass(frozen=True, kw_only=True, slots=True)
class BenchmarkConfig:
    """
    Full, reproducible description of a benchmark.

    Every method sees the same objectives, initial design and noise realizations:
    the sub-seeds of objective `i` are `derive_seed(master_seed, i, 0)` for the objective
    and `derive_seed(master_seed, i, 1)` for the observation noise.
    """

    n_objectives: int = 50
    """Number of random objectives."""

    methods: tuple[AcquisitionSpec, ...] = field(default_factory=default_methods)
    """Compared acquisition functions."""

    run: RunTemplate = field(default_factory=RunTemplate)
    """Settings shared by all runs."""

    master_seed: int = 0
    """Seed all sub-seeds are derived from."""

    workers: int = 1
    """Number of parallel worker processes."""

    def __post_init__(self) -> None:
        if self.n_objectives < 1:
            raise ConfigError(f"n_objectives must be at least 1, got {self.n_objectives}")
        if not self.methods:
            raise ConfigError("At least one method is required.")
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"Method labels must be unique, got {labels}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

    def objective_seed(self, index: int) -> int:
        """Seed of the objective in slot `index`."""
        return derive_seed(self.master_seed, index, _objective_key)

    def noise_seed(self, index: int) -> int:
        """Seed of the observation noise of objective slot `index`."""
        return derive_seed(self.master_seed, index, _noise_key)

    def with_methods(self, labels: list[str]) -> BenchmarkConfig:
        """
        Returns a copy restricted to the methods with the given (case-insensitive) labels.

        Raises:
            ConfigError: If a label does not match any method.
        """
        wanted = {label.strip().lower() for label in labels if label.strip()}
        known = {m.label.lower() for m in self.methods}
        if unknown := wanted - known:
            raise ConfigError(f"Unknown methods: {sorted(unknown)}, available: {sorted(known)}")
        return replace(self, methods=tuple(m for m in self.methods if m.label.lower() in wanted))


@dataclass(frozen=True, kw_only=True, slots=True)
class VdpDemoConfig:
    """
    Settings of the Van der Pol comparison of adaptive and fixed preference variance.
    """

    vdp: VdpConfig = field(default_factory=VdpConfig)
    """The identification problem."""

    n_grid: int = 400
    """Number of κ grid points."""

    gp: GpConfig = field(
        default_factory=lambda: GpConfig(lengthscale=0.25, signal_variance=4.0, noise_variance=1e-4)
    )
    """Fixed GP hyperparameters on the κ axis."""

    initial_points: tuple[float, ...] = (1.0, 2.75, 4.5)
    """Initial κ design."""

    iterations: int = 50
    """Acquisition steps per mode."""

    obs_noise_std: float = 0.0
    """Additional observation noise of the BO layer."""

    tau_sq_min: float = 1.0
    """Lower end of the adaptive range."""

    tau_sq_max: float = 30.0
    """Upper end of the adaptive range."""

    fixed_tau_sq: float = 1.0
    """Preference variance of the fixed mode."""

    @property
    def grid(self) -> Grid:
        """The κ grid."""
        lower, upper = self.vdp.kappa_domain
        return Grid(lower=lower, upper=upper, n=self.n_grid)


# -- Parsing


def _take(data: Mapping[str, Any], allowed: set[str], where: str) -> dict[str, Any]:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be a mapping, got {type(data).__name__}")
    if unknown := set(data) - allowed:
        raise ConfigError(f"Unknown keys in {where}: {sorted(unknown)}")
    return dict(data)


def _numbers(
    d: dict[str, Any], where: str, *, floats: tuple[str, ...] = (), ints: tuple[str, ...] = ()
) -> dict[str, Any]:
    """Converts the given keys of `d` in place. YAML reads exponent literals like `1e-6` as strings."""
    try:
        for key in floats:
            if d.get(key) is not None:
                d[key] = float(d[key])
        for key in ints:
            if d.get(key) is not None:
                d[key] = int(d[key])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid number in {where}: {e}") from e
    return d


def _or(value: float | None, default: float) -> float:
    return default if value is None else value


def _build(cls: type[Any], where: str, **kwargs: Any) -> Any:
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"Invalid {where}: {e}") from e


def spec_from_dict(data: Mapping[str, Any]) -> AcquisitionSpec:
    """
    Parses an acquisition entry of the configuration file.

    Raises:
        ConfigError: If the entry is invalid.
    """
    d = _take(
        data,
        {
            "kind",
            "name",
            "beta",
            "xi",
            "tau_sq_min",
            "tau_sq_max",
            "tau_sq",
            "y_star",
            "log_normalizer",
            "normalization",
            "correlated",
        },
        "method",
    )
    try:
        kind = AcquisitionKind(str(d.pop("kind")).upper())
    except (KeyError, ValueError) as e:
        raise ConfigError(f"Invalid or missing method kind in {dict(data)}") from e

    name = d.pop("name", None)
    _numbers(d, "method", floats=("beta", "xi", "tau_sq_min", "tau_sq_max", "tau_sq", "y_star"))
    for key in ("log_normalizer", "correlated"):
        if key in d and not isinstance(d[key], bool):
            raise ConfigError(f"method.{key} must be true or false, got {d[key]!r}")
    if kind is AcquisitionKind.EFE:
        return AcquisitionSpec.efe_with(_build(EfePreference, "EFE preference", **d), name=name)
    if kind is AcquisitionKind.UCB:
        return _build(AcquisitionSpec, "UCB", kind=kind, beta=_or(d.pop("beta", None), 2.0), name=name, **d)
    if kind is AcquisitionKind.PI:
        return _build(AcquisitionSpec, "PI", kind=kind, xi=_or(d.pop("xi", None), 0.01), name=name, **d)
    return _build(AcquisitionSpec, kind.value, kind=kind, name=name, **d)


def spec_to_dict(spec: AcquisitionSpec) -> dict[str, Any]:
    """Serializes an acquisition spec in the configuration file format."""
    result: dict[str, Any] = {"kind": spec.kind.value}
    if spec.name is not None:
        result["name"] = spec.name
    if spec.beta is not None:
        result["beta"] = spec.beta
    if spec.xi is not None:
        result["xi"] = spec.xi
    if (pref := spec.efe) is not None:
        result.update(
            tau_sq_min=pref.tau_sq_min,
            tau_sq_max=pref.tau_sq_max,
            tau_sq=pref.tau_sq,
            y_star=pref.y_star,
            log_normalizer=pref.log_normalizer,
            normalization=pref.normalization,
        )
    if spec.correlated:
        result["correlated"] = True
    return result


def _run_template_from_dict(data: Mapping[str, Any]) -> RunTemplate:
    d = _take(data, {"grid", "gp", "initial_points", "iterations", "obs_noise_std"}, "run")
    kwargs: dict[str, Any] = {}
    if "grid" in d:
        grid = _numbers(
            _take(d["grid"], {"lower", "upper", "n"}, "run.grid"),
            "run.grid",
            floats=("lower", "upper"),
            ints=("n",),
        )
        kwargs["grid"] = _build(Grid, "grid", **grid)
    if "gp" in d:
        gp = _numbers(
            _take(d["gp"], {"lengthscale", "signal_variance", "noise_variance", "jitter"}, "run.gp"),
            "run.gp",
            floats=("lengthscale", "signal_variance", "noise_variance", "jitter"),
        )
        kwargs["gp"] = _build(GpConfig, "gp", **gp)
    if "initial_points" in d:
        points = d["initial_points"]
        if not isinstance(points, list):
            raise ConfigError(f"run.initial_points must be a list, got {type(points).__name__}")
        kwargs["initial_points"] = tuple(
            _numbers({"x": x}, "run.initial_points", floats=("x",))["x"] for x in points
        )
    scalars = _numbers(
        {k: d[k] for k in ("iterations", "obs_noise_std") if k in d},
        "run",
        floats=("obs_noise_std",),
        ints=("iterations",),
    )
    template: RunTemplate = _build(RunTemplate, "run", **kwargs, **scalars)
    return template


def config_from_dict(data: Mapping[str, Any]) -> BenchmarkConfig:
    """
    Creates a `BenchmarkConfig` from a parsed configuration document.

    Raises:
        ConfigError: If the document is invalid.
    """
    d = _take(data, {"n_objectives", "methods", "run", "master_seed", "workers"}, "benchmark config")
    kwargs: dict[str, Any] = {}
    if "methods" in d:
        methods = d["methods"]
        if not isinstance(methods, list):
            raise ConfigError("methods must be a list.")
        kwargs["methods"] = tuple(spec_from_dict(m) for m in methods)
    if "run" in d:
        kwargs["run"] = _run_template_from_dict(d["run"])
    kwargs.update(
        _numbers(
            {k: d[k] for k in ("n_objectives", "master_seed", "workers") if k in d},
            "benchmark config",
            ints=("n_objectives", "master_seed", "workers"),
        )
    )

    result: BenchmarkConfig = _build(BenchmarkConfig, "benchmark config", **kwargs)
    # Validate the run template with every method.
    try:
        for m in result.methods:
            result.run.make(m, seed=0)
    except TypeError as e:
        raise ConfigError(f"Invalid run: {e}") from e
    return result


def config_to_dict(cfg: BenchmarkConfig) -> dict[str, Any]:
    """Serializes the configuration; `config_from_dict()` restores it exactly."""
    run = cfg.run
    return {
        "master_seed": cfg.master_seed,
        "n_objectives": cfg.n_objectives,
        "workers": cfg.workers,
        "run": {
            "grid": {"lower": run.grid.lower, "upper": run.grid.upper, "n": run.grid.n},
            "gp": {
                "lengthscale": run.gp.lengthscale,
                "signal_variance": run.gp.signal_variance,
                "noise_variance": run.gp.noise_variance,
                "jitter": run.gp.jitter,
            },
            "initial_points": list(run.initial_points),
            "iterations": run.iterations,
            "obs_noise_std": run.obs_noise_std,
        },
        "methods": [spec_to_dict(m) for m in cfg.methods],
    }


def load_config(path: Path | None = None) -> BenchmarkConfig:
    """
    Loads a benchmark configuration file, or the packaged default if `path` is `None`.

    JSON documents (like `config.replay.json`) are valid YAML, so they load as well.

    Raises:
        ConfigError: If the document is invalid.
        IoFailure: If the file cannot be read.
    """
    if path is None:
        text = importlib.resources.files("efebo").joinpath(default_config_resource).read_text("utf-8")
    else:
        try:
            text = path.read_text("utf-8")
        except OSError as e:
            raise IoFailure("Failed to read configuration file", path=path) from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid configuration document: {e}") from e

    if data is None:
        logger.warning("Empty configuration document, using defaults.")
        data = {}
    return config_from_dict(data)
