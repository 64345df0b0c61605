"""
Exact Gaussian-process regression with a fixed kernel over a discretized 1-D domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import ConfigError, FactorizationFailure, GridTooSmall
from .logging import logger
from .utils import readonly

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .typing import FloatArray, Kernel

_variance_floor = 1e-12
"""Floor applied to latent variances wherever their reciprocal is taken."""

_sampling_jitter_attempts = 5
"""How many times the sampling jitter is multiplied by 10 before giving up."""


@dataclass(frozen=True, kw_only=True, slots=True)
class RBFKernel:
    """
    Squared exponential kernel: `variance * exp(-(x - z)**2 / (2 * lengthscale**2))`.
    """

    lengthscale: float
    """The length-scale in input units."""

    variance: float = 1.0
    """The signal variance in output² units."""

    def __call__(self, xs: FloatArray, zs: FloatArray, /) -> FloatArray:
        diff = np.subtract.outer(xs, zs) / self.lengthscale
        return self.variance * np.exp(-0.5 * diff * diff)  # type: ignore[no-any-return]


@dataclass(frozen=True, kw_only=True, slots=True)
class GpConfig:
    """
    Fixed GP hyperparameters. There is no hyperparameter learning.
    """

    lengthscale: float
    """RBF length-scale in input units."""

    signal_variance: float = 1.0
    """RBF signal variance in output² units."""

    noise_variance: float
    """Observation noise variance σn² in output² units."""

    jitter: float | None = None
    """
    Value added to the kernel diagonal for factorization stability.

    `None` means `1e-8 * signal_variance`.
    """

    def __post_init__(self) -> None:
        if not self.lengthscale > 0:
            raise ConfigError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.signal_variance > 0:
            raise ConfigError(f"signal_variance must be positive, got {self.signal_variance}")
        if not self.noise_variance >= 0:
            raise ConfigError(f"noise_variance must be non-negative, got {self.noise_variance}")
        if self.jitter is not None and not self.jitter > 0:
            raise ConfigError(f"jitter must be positive, got {self.jitter}")

    @property
    def diagonal_jitter(self) -> float:
        """The effective jitter."""
        return 1e-8 * self.signal_variance if self.jitter is None else self.jitter

    @property
    def kernel(self) -> Kernel:
        """The kernel described by this configuration."""
        return RBFKernel(lengthscale=self.lengthscale, variance=self.signal_variance)


@dataclass(frozen=True, slots=True)
class Dataset:
    """
    Observed data. Duplicate locations are permitted.
    """

    xs: FloatArray = field(default_factory=lambda: readonly(()))
    """Query locations in domain units."""

    ys: FloatArray = field(default_factory=lambda: readonly(()))
    """Noisy observations in output units."""

    def __post_init__(self) -> None:
        # Class is frozen, so this is the only way to normalize the arrays.
        object.__setattr__(self, "xs", readonly(self.xs))
        object.__setattr__(self, "ys", readonly(self.ys))
        if self.xs.ndim != 1 or self.xs.shape != self.ys.shape:
            raise ConfigError(
                f"xs and ys must be 1-D and of equal length, got {self.xs.shape}, {self.ys.shape}"
            )
        if not (np.all(np.isfinite(self.xs)) and np.all(np.isfinite(self.ys))):
            raise ConfigError("Dataset values must be finite.")

    def __len__(self) -> int:
        return int(self.xs.shape[0])

    def append(self, x: float, y: float) -> Dataset:
        """Returns a new dataset with the given observation appended."""
        return Dataset(np.append(self.xs, x), np.append(self.ys, y))


@dataclass(frozen=True, kw_only=True, slots=True)
class Grid:
    """
    Equally spaced evaluation grid that includes both bounds.
    """

    lower: float
    """Lower domain bound."""

    upper: float
    """Upper domain bound."""

    n: int
    """Number of grid points."""

    points: FloatArray = field(init=False, repr=False, compare=False)
    """Strictly increasing grid locations, `points[0] == lower` and `points[-1] == upper`."""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"A grid needs at least one point, got {self.n}")
        if self.n == 1 and self.lower != self.upper:
            raise ConfigError("A single-point grid must have equal bounds.")
        if self.n > 1 and not self.lower < self.upper:
            raise ConfigError(f"Grid bounds must satisfy lower < upper, got [{self.lower}, {self.upper}]")

        object.__setattr__(self, "points", readonly(np.linspace(self.lower, self.upper, self.n)))

    @property
    def spacing(self) -> float:
        """The distance of neighboring points, 0 for single-point grids."""
        return 0.0 if self.n == 1 else (self.upper - self.lower) / (self.n - 1)

    def contains(self, x: float) -> bool:
        """Returns whether `x` lies within the grid bounds."""
        return self.lower <= x <= self.upper

    def nearest_index(self, x: float) -> int:
        """
        Returns the index of the grid point closest to `x`, the smaller one on ties.

        Raises:
            ConfigError: If `x` is outside the grid bounds.
        """
        if not self.contains(x):
            raise ConfigError(f"{x} is outside the grid bounds [{self.lower}, {self.upper}]")
        return int(np.argmin(np.abs(self.points - x)))


@dataclass(frozen=True, kw_only=True, slots=True)
class Posterior:
    """
    GP posterior marginals (and optionally the joint covariance) on a grid.
    """

    mu: FloatArray
    """Posterior mean μ(x)."""

    var_latent: FloatArray
    """Latent variance σ²(x), non-negative."""

    var_predictive: FloatArray
    """Predictive variance σy²(x) = σ²(x) + σn²."""

    mu_dd: FloatArray
    """Second derivative μ″(x) of the posterior mean."""

    cov: FloatArray | None = None
    """Joint posterior covariance over the grid, `None` if unknown."""

    prior_variance: float = 1.0
    """Prior variance `k(x, x)` of the latent function."""

    @classmethod
    def from_moments(
        cls,
        mu: ArrayLike,
        var_latent: ArrayLike,
        *,
        noise_variance: float,
        mu_dd: ArrayLike | None = None,
        cov: ArrayLike | None = None,
        prior_variance: float = 1.0,
    ) -> Posterior:
        """
        Creates a posterior from its moments.

        Negative round-off variances are clamped to zero.

        Arguments:
            mu: Posterior mean per grid point.
            var_latent: Latent variance per grid point.
            noise_variance: Observation noise variance σn².
            mu_dd: Second derivative of the mean, zeros if `None`.
            cov: Optional joint covariance.
            prior_variance: Prior variance of the latent function.
        """
        mean = readonly(mu)
        var = readonly(np.maximum(np.asarray(var_latent, dtype=np.float64), 0.0))
        if mean.ndim != 1 or mean.shape != var.shape:
            raise ConfigError("mu and var_latent must be 1-D arrays of equal length.")
        if not prior_variance > 0:
            raise ConfigError(f"prior_variance must be positive, got {prior_variance}")

        return cls(
            mu=mean,
            var_latent=var,
            var_predictive=readonly(var + noise_variance),
            mu_dd=readonly(np.zeros_like(mean) if mu_dd is None else mu_dd),
            cov=None if cov is None else readonly(cov),
            prior_variance=prior_variance,
        )

    @property
    def n(self) -> int:
        """Number of grid points."""
        return int(self.mu.shape[0])

    @property
    def std(self) -> FloatArray:
        """Latent standard deviation σ(x)."""
        return np.sqrt(self.var_latent)

    @property
    def var_floored(self) -> FloatArray:
        """Latent variance floored at a tiny positive value, safe for reciprocals."""
        return np.maximum(self.var_latent, _variance_floor)


@dataclass(frozen=True, kw_only=True, slots=True)
class GpModel:
    """
    A GP conditioned on a dataset. Immutable after construction.
    """

    config: GpConfig
    """The hyperparameters of the model."""

    data: Dataset
    """The conditioning data."""

    chol: FloatArray | None
    """Lower Cholesky factor of `K + (σn² + jitter)·I`, `None` without data."""

    weights: FloatArray
    """`(K + (σn² + jitter)·I)⁻¹ y`."""

    def mean(self, xs: FloatArray) -> FloatArray:
        """Returns the posterior mean at the given locations."""
        if self.chol is None:
            return np.zeros_like(xs, dtype=np.float64)
        return self.config.kernel(self.data.xs, xs).T @ self.weights  # type: ignore[no-any-return]

    def mean_and_cov(self, xs: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Returns the posterior mean and joint latent covariance at the given locations."""
        kernel = self.config.kernel
        prior_cov = kernel(xs, xs)
        if self.chol is None:
            return np.zeros_like(xs, dtype=np.float64), prior_cov

        cross = kernel(self.data.xs, xs)
        v = solve_triangular(self.chol, cross, lower=True)
        cov = prior_cov - v.T @ v
        return cross.T @ self.weights, 0.5 * (cov + cov.T)


def fit(config: GpConfig, data: Dataset) -> GpModel:
    """
    Conditions a zero-mean GP on the given data.

    Arguments:
        config: The fixed hyperparameters.
        data: The observations.

    Returns:
        The fitted model.

    Raises:
        FactorizationFailure: If the regularized kernel matrix is not positive definite.
    """
    if len(data) == 0:
        return GpModel(config=config, data=data, chol=None, weights=readonly(()))

    gram = config.kernel(data.xs, data.xs)
    gram[np.diag_indices_from(gram)] += config.noise_variance + config.diagonal_jitter
    try:
        chol = cholesky(gram, lower=True, check_finite=False)
    except LinAlgError as e:
        raise FactorizationFailure(f"Kernel matrix of {len(data)} points is not positive definite.") from e

    return GpModel(
        config=config,
        data=data,
        chol=readonly(chol),
        weights=readonly(cho_solve((chol, True), data.ys, check_finite=False)),
    )


def second_difference(values: FloatArray, spacing: float) -> FloatArray:
    """
    Central second difference of equally spaced samples.

    Interior points use `(v[i-1] - 2 v[i] + v[i+1]) / h²`, the endpoints copy their
    nearest interior value.

    Raises:
        GridTooSmall: If there are fewer than three samples.
    """
    if values.shape[0] < 3:
        raise GridTooSmall(f"The second difference needs at least 3 points, got {values.shape[0]}")

    result = np.empty_like(values, dtype=np.float64)
    result[1:-1] = (values[:-2] - 2.0 * values[1:-1] + values[2:]) / (spacing * spacing)
    result[0] = result[1]
    result[-1] = result[-2]
    return result


def posterior_second_derivative(model: GpModel, grid: Grid) -> FloatArray:
    """
    Returns μ″ on the grid, computed by central finite differences of the posterior mean.

    Raises:
        GridTooSmall: If the grid has fewer than three points.
    """
    return second_difference(model.mean(grid.points), grid.spacing)


def posterior(model: GpModel, grid: Grid) -> Posterior:
    """
    Evaluates the posterior of the model on the grid.

    On grids with fewer than three points `mu_dd` is all zeros, since the curvature
    cannot be estimated there.
    """
    mu, cov = model.mean_and_cov(grid.points)
    mu_dd = second_difference(mu, grid.spacing) if grid.n >= 3 else None
    return Posterior.from_moments(
        mu,
        np.diag(cov),
        noise_variance=model.config.noise_variance,
        mu_dd=mu_dd,
        cov=cov,
        prior_variance=model.config.signal_variance,
    )


def sample_posterior(model: GpModel, grid: Grid, rng: np.random.Generator) -> FloatArray:
    """
    Draws one joint sample of the latent function from the posterior on the grid.

    Jitter is added to the diagonal of the posterior covariance and it is increased
    tenfold (a limited number of times) if the factorization fails.

    Arguments:
        model: The fitted model.
        grid: The grid to sample on.
        rng: The random number generator to draw from.

    Raises:
        FactorizationFailure: If the covariance is not positive definite even after jitter.
    """
    mu, cov = model.mean_and_cov(grid.points)
    if not np.any(np.diag(cov) > 0):
        # Degenerate posterior without uncertainty.
        return mu

    jitter = model.config.diagonal_jitter
    for _ in range(_sampling_jitter_attempts):
        try:
            chol = cholesky(cov + jitter * np.eye(grid.n), lower=True, check_finite=False)
        except LinAlgError:
            logger.debug(f"Posterior covariance factorization failed with jitter {jitter:.1e}")
            jitter *= 10.0
        else:
            return mu + chol @ rng.standard_normal(grid.n)  # type: ignore[no-any-return]

    raise FactorizationFailure("Posterior covariance is not positive definite even after jitter.")
