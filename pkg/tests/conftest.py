import numpy as np
import pytest

from efebo.acquisition import AcquisitionSpec
from efebo.bench import BenchmarkConfig, RunTemplate
from efebo.gp import GpConfig, Grid


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gp_config() -> GpConfig:
    return GpConfig(lengthscale=0.5, noise_variance=0.04)


@pytest.fixture(scope="session")
def small_grid() -> Grid:
    return Grid(lower=-2.0, upper=2.0, n=41)


@pytest.fixture(scope="session")
def small_bench_config() -> BenchmarkConfig:
    """Two objectives, three cheap methods, a few iterations on a coarse grid."""
    return BenchmarkConfig(
        n_objectives=2,
        methods=(AcquisitionSpec.var(), AcquisitionSpec.ucb(2.0), AcquisitionSpec.efe_with()),
        run=RunTemplate(
            grid=Grid(lower=-8.0, upper=8.0, n=81),
            gp=GpConfig(lengthscale=0.5, noise_variance=0.04),
            initial_points=(-5.0, 0.0, 5.0),
            iterations=4,
            obs_noise_std=0.2,
        ),
        master_seed=7,
        workers=1,
    )
