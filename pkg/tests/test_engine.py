import math

import numpy as np
import pytest

from efebo.acquisition import AcquisitionSpec, EfePreference
from efebo.engine import (
    RunConfig,
    RunRecord,
    final_posterior,
    gp_mse,
    incumbent,
    run,
    simple_regret,
)
from efebo.errors import ConfigError, EmptyDataset
from efebo.gp import Dataset, GpConfig, Grid, fit, posterior
from efebo.objectives import generate_sinusoid
from tests.helpers import make_posterior

_grid = Grid(lower=-8.0, upper=8.0, n=81)
_gp = GpConfig(lengthscale=0.5, noise_variance=0.04)


def _config(acquisition: AcquisitionSpec, *, seed: int = 3, iterations: int = 5) -> RunConfig:
    return RunConfig(
        grid=_grid,
        gp=_gp,
        acquisition=acquisition,
        initial_points=(-5.0, 0.05, 5.0),
        iterations=iterations,
        obs_noise_std=0.2,
        seed=seed,
    )


_methods = (
    AcquisitionSpec.efe_with(),
    AcquisitionSpec.ucb(),
    AcquisitionSpec.ei(),
    AcquisitionSpec.pi(),
    AcquisitionSpec.var(),
    AcquisitionSpec.ts(),
    AcquisitionSpec.kg(),
    AcquisitionSpec.kg(correlated=True, name="KG-correlated"),
)


@pytest.mark.parametrize(
    ("kwargs",),
    (
        ({"initial_points": ()},),
        ({"initial_points": (-9.0,)},),
        ({"iterations": 0},),
        ({"obs_noise_std": -1.0},),
    ),
)
def test_invalid_run_config(kwargs: dict[str, object]) -> None:
    base = {
        "grid": _grid,
        "gp": _gp,
        "acquisition": AcquisitionSpec.var(),
        "initial_points": (0.0,),
        "iterations": 1,
        "obs_noise_std": 0.1,
        "seed": 0,
    }
    with pytest.raises(ConfigError):
        RunConfig(**{**base, **kwargs})  # type: ignore[arg-type]


@pytest.mark.parametrize(("spec",), tuple((m,) for m in _methods))
def test_run_record(spec: AcquisitionSpec) -> None:
    objective = generate_sinusoid(11)
    record = run(_config(spec), objective, objective_seed=11)

    assert record.method == spec.label
    assert record.objective_seed == 11
    assert record.initial_xs == pytest.approx((-5.0, 0.0, 5.0))
    assert len(record.initial_ys) == 3
    assert len(record.iterations) == 5
    assert [r.iteration for r in record.iterations] == [1, 2, 3, 4, 5]
    assert len(record.data) == 8

    f_max = float(np.max(objective(_grid.points)))
    for r in record.iterations:
        assert r.x == _grid.points[r.index]
        assert r.simple_regret >= 0.0
        assert r.simple_regret == pytest.approx(f_max - r.incumbent_f)
        assert r.gp_mse >= 0.0
        assert r.incumbent_x in record.data.xs
        assert (r.tau_sq is not None) == (spec.label == "EFE")
        assert r.best_observed_x in record.data.xs

    assert record.final.best_observed_x == record.data.xs[int(np.argmax(record.data.ys))]


def test_run_is_deterministic() -> None:
    objective = generate_sinusoid(2)
    for spec in _methods:
        assert run(_config(spec), objective) == run(_config(spec), objective), spec.label


def test_initial_observations_are_shared_across_methods() -> None:
    objective = generate_sinusoid(6)
    records = [run(_config(spec, iterations=2), objective) for spec in _methods]
    assert len({r.initial_ys for r in records}) == 1
    assert records[0].initial_ys != run(_config(_methods[0], seed=4, iterations=2), objective).initial_ys


def test_same_query_sees_same_noise() -> None:
    objective = generate_sinusoid(8)
    config = _config(AcquisitionSpec.var(), iterations=1)
    first = run(config, objective).iterations[0]
    # A method that queries the same index at the same step observes the same value.
    same = run(_config(AcquisitionSpec.var(name="VAR-copy"), iterations=1), objective).iterations[0]
    assert (first.index, first.y) == (same.index, same.y)


@pytest.mark.parametrize(
    ("preference",),
    (
        (EfePreference(),),
        (EfePreference(tau_sq_max=60.0, normalization="prior"),),
    ),
)
def test_efe_tau_sq_is_in_range(preference: EfePreference) -> None:
    record = run(_config(AcquisitionSpec.efe_with(preference), iterations=8), generate_sinusoid(1))
    for tau_sq in record.series("tau_sq"):
        assert preference.tau_sq_min <= tau_sq <= preference.tau_sq_max


def test_metrics_match_final_posterior() -> None:
    objective = generate_sinusoid(9)
    record = run(_config(AcquisitionSpec.ucb()), objective)
    post = final_posterior(record, _gp, _grid)
    x_hat, _ = incumbent(record.data, post, _grid)
    assert record.final.incumbent_x == x_hat
    assert record.final.gp_mse == pytest.approx(gp_mse(post, objective, _grid))
    assert record.final.simple_regret == pytest.approx(simple_regret(objective, _grid, x_hat))


def test_run_without_noise_observes_the_objective() -> None:
    objective = generate_sinusoid(4)
    config = RunConfig(
        grid=_grid,
        gp=_gp,
        acquisition=AcquisitionSpec.ei(),
        initial_points=(0.0,),
        iterations=3,
        obs_noise_std=0.0,
        seed=0,
    )
    record = run(config, objective)
    f_values = objective(_grid.points)
    for r in record.iterations:
        assert r.y == f_values[r.index]


def test_incumbent_prefers_earliest_query_on_ties() -> None:
    grid = Grid(lower=0.0, upper=3.0, n=4)
    post = make_posterior([1.0, 2.0, 0.0, 2.0], np.ones(4))
    data = Dataset(np.array([3.0, 1.0, 2.0]), np.array([0.0, 0.0, 0.0]))
    assert incumbent(data, post, grid) == (3.0, 2.0)


def test_incumbent_without_data() -> None:
    grid = Grid(lower=0.0, upper=1.0, n=3)
    post = posterior(fit(_gp, Dataset()), grid)
    with pytest.raises(EmptyDataset):
        incumbent(Dataset(), post, grid)


def test_simple_regret_and_mse() -> None:
    grid = Grid(lower=0.0, upper=2.0, n=3)

    def objective(xs: np.ndarray) -> np.ndarray:
        return -((xs - 1.0) ** 2)

    assert simple_regret(objective, grid, 1.0) == 0.0
    assert simple_regret(objective, grid, 0.1) == 1.0
    assert gp_mse(make_posterior([-1.0, 0.0, 0.0], np.ones(3)), objective, grid) == pytest.approx(1.0 / 3.0)


def test_run_record_dict_round_trip() -> None:
    record = run(_config(AcquisitionSpec.efe_with(), iterations=3), generate_sinusoid(5), objective_seed=5)
    data = record.to_dict()
    assert set(data) == {"method", "objective_seed", "initial_xs", "initial_ys", "iterations"}
    assert RunRecord.from_dict(data) == record


def test_incumbent_reads_the_nearest_grid_point() -> None:
    grid = Grid(lower=0.0, upper=2.0, n=3)
    post = make_posterior([0.0, 1.0, 0.5], np.ones(3))
    data = Dataset(np.array([0.1, 1.05]), np.array([0.0, 0.0]))
    assert incumbent(data, post, grid) == (1.05, 1.0)


def test_incumbent_ranks_by_posterior_mean() -> None:
    grid = Grid(lower=0.0, upper=1.0, n=2)
    post = make_posterior([0.8, 1.1], np.ones(2))
    data = Dataset(np.array([0.0, 1.0]), np.array([2.0, 1.0]))
    assert incumbent(data, post, grid) == (1.0, 1.1)


# Near-interpolating GP: with noise_variance=0.04 the posterior mean at queried points is shrunk
# away from the noiseless observations, so the incumbent can move to a worse point.
_noiseless_gp = GpConfig(lengthscale=0.5, noise_variance=1e-8)


@pytest.mark.parametrize(
    ("spec", "seed"),
    (
        (AcquisitionSpec.ucb(), 0),
        (AcquisitionSpec.ucb(), 7),
        (AcquisitionSpec.var(), 3),
        (AcquisitionSpec.ei(), 12),
    ),
)
def test_noiseless_incumbent_regret_is_non_increasing(spec: AcquisitionSpec, seed: int) -> None:
    config = RunConfig(
        grid=_grid,
        gp=_noiseless_gp,
        acquisition=spec,
        initial_points=(-5.0, 0.0, 5.0),
        iterations=15,
        obs_noise_std=0.0,
        seed=0,
    )
    regrets = run(config, generate_sinusoid(seed)).series("simple_regret")
    for before, after in zip(regrets, regrets[1:]):
        assert after <= before + 1e-9


def test_noiseless_ucb_finds_a_dominant_peak() -> None:
    peak = float(_grid.points[46])

    def objective(xs: np.ndarray) -> np.ndarray:
        return 3.0 * np.exp(-0.5 * (xs - peak) ** 2)

    config = RunConfig(
        grid=_grid,
        gp=_noiseless_gp,
        acquisition=AcquisitionSpec.ucb(beta=2.0),
        initial_points=(-5.0, 0.0, 5.0),
        iterations=50,
        obs_noise_std=0.0,
        seed=0,
    )
    final = run(config, objective).final
    assert final.simple_regret == 0.0
    assert final.incumbent_x == peak


def _sine(xs: np.ndarray) -> np.ndarray:
    return np.sin(xs)


def test_simple_regret_of_sine() -> None:
    grid = Grid(lower=-8.0, upper=8.0, n=400)
    x_hat = float(grid.points[grid.nearest_index(math.pi / 2)])
    assert simple_regret(_sine, grid, x_hat) < 1e-3


def test_mse_of_zero_mean_against_sine() -> None:
    grid = Grid(lower=-8.0, upper=8.0, n=400)
    post = make_posterior(np.zeros(grid.n), np.ones(grid.n))
    assert gp_mse(post, _sine, grid) == pytest.approx(0.5, abs=0.01)
