from collections.abc import Sequence

import numpy as np

from efebo.gp import Dataset, GpConfig, GpModel, Posterior, fit


def fit_on(config: GpConfig, xs: Sequence[float], ys: Sequence[float]) -> GpModel:
    """Shorthand for `fit(config, Dataset(xs, ys))`."""
    return fit(config, Dataset(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)))


def make_posterior(
    mu: list[float] | np.ndarray,
    var_latent: list[float] | np.ndarray,
    *,
    noise_variance: float = 0.04,
    mu_dd: list[float] | np.ndarray | None = None,
) -> Posterior:
    return Posterior.from_moments(mu, var_latent, noise_variance=noise_variance, mu_dd=mu_dd)


def random_posterior(rng: np.random.Generator, n: int = 50, noise_variance: float = 0.04) -> Posterior:
    """Random posterior moments with variances bounded away from zero."""
    return Posterior.from_moments(
        rng.normal(0.0, 1.0, n),
        rng.uniform(0.01, 1.0, n),
        noise_variance=noise_variance,
        mu_dd=rng.normal(0.0, 5.0, n),
    )
