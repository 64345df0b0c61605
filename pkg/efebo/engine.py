"""
Sequential Bayesian-optimization loop over a fixed grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from .acquisition import AcquisitionKind, AcquisitionSpec, preference_variance, score
from .errors import ConfigError, EmptyDataset
from .gp import Dataset, GpConfig, Grid, fit, posterior
from .logging import logger
from .objectives import ObservationChannel
from .utils import first_argmax, keyed_rng

if TYPE_CHECKING:
    from .gp import Posterior
    from .typing import FloatArray, Objective

_acquisition_stream = 1
"""Sub-seed key of the random stream of randomized acquisitions."""


@dataclass(frozen=True, kw_only=True, slots=True)
class RunConfig:
    """
    Complete description of one optimization run.
    """

    grid: Grid
    """The candidate grid. Every query, including the initial design, is a grid point."""

    gp: GpConfig
    """Fixed GP hyperparameters."""

    acquisition: AcquisitionSpec
    """The acquisition function."""

    initial_points: tuple[float, ...]
    """Initial design, snapped to the nearest grid points."""

    iterations: int
    """Number of acquisition steps after the initial design."""

    obs_noise_std: float
    """Standard deviation of the observation noise."""

    seed: int
    """Seed of the observation noise and of randomized acquisitions."""

    def __post_init__(self) -> None:
        if not self.initial_points:
            raise ConfigError("At least one initial point is required.")
        for x in self.initial_points:
            if not self.grid.contains(x):
                raise ConfigError(f"Initial point {x} is outside the grid bounds.")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if not self.obs_noise_std >= 0:
            raise ConfigError(f"obs_noise_std must be non-negative, got {self.obs_noise_std}")


@dataclass(frozen=True, kw_only=True, slots=True)
class IterationRecord:
    """Metrics of one acquisition step, computed after the new observation was added."""

    iteration: int
    """1-based iteration number."""

    index: int
    """Grid index of the query."""

    x: float
    """The queried location."""

    y: float
    """The noisy observation."""

    incumbent_x: float
    """The recommended location: the queried point with the largest posterior mean."""

    incumbent_f: float
    """True objective value at the recommendation."""

    simple_regret: float
    """Grid maximum of the objective minus `incumbent_f`."""

    gp_mse: float
    """Mean squared error of the posterior mean over the grid."""

    best_observed_x: float
    """Alternate recommendation: the location of the largest noisy observation."""

    tau_sq: float | None = None
    """EFE preference variance at the query, `None` for other acquisitions."""


@dataclass(frozen=True, kw_only=True, slots=True)
class RunRecord:
    """
    Everything a run produced. Lengths of the per-iteration series equal `iterations`.
    """

    method: str
    """Label of the acquisition function."""

    objective_seed: int | None
    """Seed of the objective, if it was generated from one."""

    initial_xs: tuple[float, ...]
    """The snapped initial design."""

    initial_ys: tuple[float, ...]
    """Observations of the initial design."""

    iterations: tuple[IterationRecord, ...]
    """Per-iteration records."""

    @property
    def final(self) -> IterationRecord:
        """The record of the last iteration."""
        return self.iterations[-1]

    @property
    def data(self) -> Dataset:
        """All observations of the run in query order."""
        return Dataset(
            np.asarray(self.initial_xs + tuple(r.x for r in self.iterations)),
            np.asarray(self.initial_ys + tuple(r.y for r in self.iterations)),
        )

    def series(self, name: str) -> list[Any]:
        """Returns the per-iteration values of the given `IterationRecord` attribute."""
        return [getattr(r, name) for r in self.iterations]

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "objective_seed": self.objective_seed,
            "initial_xs": list(self.initial_xs),
            "initial_ys": list(self.initial_ys),
            "iterations": [
                {name: getattr(r, name) for name in IterationRecord.__dataclass_fields__}
                for r in self.iterations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunRecord:
        return cls(
            method=data["method"],
            objective_seed=data["objective_seed"],
            initial_xs=tuple(data["initial_xs"]),
            initial_ys=tuple(data["initial_ys"]),
            iterations=tuple(IterationRecord(**r) for r in data["iterations"]),
        )


def incumbent(data: Dataset, posterior: Posterior, grid: Grid) -> tuple[float, float]:
    """
    Returns the queried location with the largest posterior mean and that mean.

    The posterior is only known on `grid`, so each queried location is read at its nearest grid
    point. Queries made by `run` always lie on the grid. Ties are broken in favor of the earliest query.

    Raises:
        EmptyDataset: If there is no data.
    """
    if len(data) == 0:
        raise EmptyDataset("The incumbent is undefined without observations.")

    indices = [grid.nearest_index(float(x)) for x in data.xs]
    means = posterior.mu[indices]
    best = first_argmax(means)
    return float(data.xs[best]), float(means[best])


def simple_regret(objective: Objective, grid: Grid, x_hat: float) -> float:
    """Grid maximum of the objective minus its value at the grid point nearest to `x_hat`."""
    values = np.asarray(objective(grid.points), dtype=np.float64)
    return _regret(values, grid.nearest_index(x_hat))


def gp_mse(posterior: Posterior, objective: Objective, grid: Grid) -> float:
    """Mean squared error of the posterior mean with respect to the objective over the grid."""
    return _mse(posterior, np.asarray(objective(grid.points), dtype=np.float64))


def _regret(f_values: FloatArray, index: int) -> float:
    return float(np.max(f_values) - f_values[index])


def _mse(posterior: Posterior, f_values: FloatArray) -> float:
    diff = posterior.mu - f_values
    return float(np.mean(diff * diff))


def run(
    config: RunConfig,
    objective: Objective,
    *,
    objective_seed: int | None = None,
) -> RunRecord:
    """
    Runs sequential Bayesian optimization.

    The optimizer only sees noisy observations. The true objective values on the grid are
    used for the regret and MSE metrics alone.

    Arguments:
        config: The run configuration.
        objective: Vectorized objective, evaluated once on the whole grid.
        objective_seed: Seed of the objective, stored on the record.

    Returns:
        The record of the run. Errors propagate, there are no partial records.
    """
    grid = config.grid
    spec = config.acquisition
    f_values = np.asarray(objective(grid.points), dtype=np.float64)
    channel = ObservationChannel(config.obs_noise_std, config.seed)
    rng = keyed_rng(config.seed, _acquisition_stream)

    initial = [grid.nearest_index(x) for x in config.initial_points]
    initial_ys = [channel.observe_at(float(f_values[i]), step=0, index=i) for i in initial]
    data = Dataset(grid.points[initial], np.asarray(initial_ys))
    model = fit(config.gp, data)
    post = posterior(model, grid)
    logger.info(f"Starting {spec.label} run: {config.iterations} iterations, {len(initial)} initial points")

    records: list[IterationRecord] = []
    for k in range(1, config.iterations + 1):
        _, incumbent_mu = incumbent(data, post, grid)
        index = score(spec, post, model=model, grid=grid, incumbent=incumbent_mu, rng=rng).argmax_index
        tau_sq = (
            float(preference_variance(post, spec.efe)[index])  # type: ignore[arg-type]
            if spec.kind is AcquisitionKind.EFE
            else None
        )
        x = float(grid.points[index])
        y = channel.observe_at(float(f_values[index]), step=k, index=index)

        data = data.append(x, y)
        model = fit(config.gp, data)
        post = posterior(model, grid)

        x_hat, _ = incumbent(data, post, grid)
        hat_index = grid.nearest_index(x_hat)
        record = IterationRecord(
            iteration=k,
            index=index,
            x=x,
            y=y,
            incumbent_x=x_hat,
            incumbent_f=float(f_values[hat_index]),
            simple_regret=_regret(f_values, hat_index),
            gp_mse=_mse(post, f_values),
            best_observed_x=float(data.xs[first_argmax(data.ys)]),
            tau_sq=tau_sq,
        )
        records.append(record)
        logger.debug(
            f"{spec.label} iteration {k}: x={x:.4f} y={y:.4f} "
            f"regret={record.simple_regret:.4g} mse={record.gp_mse:.4g}"
        )

    logger.info(
        f"Finished {spec.label} run: regret={records[-1].simple_regret:.4g} mse={records[-1].gp_mse:.4g}"
    )
    return RunRecord(
        method=spec.label,
        objective_seed=objective_seed,
        initial_xs=tuple(float(grid.points[i]) for i in initial),
        initial_ys=tuple(initial_ys),
        iterations=tuple(records),
    )


def final_posterior(record: RunRecord, gp: GpConfig, grid: Grid) -> Posterior:
    """Refits the GP on all data of a finished run and returns its posterior on the grid."""
    return posterior(fit(gp, record.data), grid)
