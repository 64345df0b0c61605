"""
Acquisition functions over a fixed grid.

Every acquisition maps a `Posterior` (plus method specific state) to a `ScoreVector`,
and the next query is always the smallest index with the highest score.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Literal, TypeAlias, overload

import numpy as np
from scipy.stats import norm

from .errors import ConfigError, NoiseVarZero, NonFiniteScores
from .gp import sample_posterior
from .logging import logger
from .utils import first_argmax, readonly

if TYPE_CHECKING:
    from .gp import GpModel, Grid, Posterior
    from .typing import FloatArray

EfeMode: TypeAlias = Literal["adaptive", "fixed"]
"""How the preference variance τ² is chosen."""

TauNormalization: TypeAlias = Literal["grid", "prior"]
"""What the raw adaptive τ² is divided by: its maximum over the grid or the prior variance."""

class AcquisitionKind(str, Enum):
    """Supported acquisition functions."""

    EFE = "EFE"
    UCB = "UCB"
    EI = "EI"
    PI = "PI"
    VAR = "VAR"
    TS = "TS"
    KG = "KG"


@dataclass(frozen=True, kw_only=True, slots=True)
class EfePreference:
    """
    Gaussian outcome preference `p(y) = N(y*, τ²)` of the EFE acquisition.

    If `tau_sq` is set, the preference variance is fixed, otherwise it is adapted per grid
    point to the curvature and uncertainty of the posterior and rescaled into
    `[tau_sq_min, tau_sq_max]`.
    """

    y_star: float | None = None
    """Preferred observation, `None` to use the largest posterior mean on the grid."""

    tau_sq_min: float = 1.0
    """Lower end of the adaptive τ² range (pure exploitation)."""

    tau_sq_max: float = 30.0
    """Upper end of the adaptive τ² range (pure exploration)."""

    tau_sq: float | None = None
    """Fixed preference variance, `None` for adaptive mode."""

    log_normalizer: bool = False
    """Whether to keep the `½ln(2πτ²)` term of the cross-entropy in the pragmatic value."""

    normalization: TauNormalization = "grid"
    """Reference the raw adaptive τ² is divided by, see `adaptive_tau_sq`."""

    def __post_init__(self) -> None:
        if not 0 < self.tau_sq_min <= self.tau_sq_max:
            raise ConfigError(
                f"Invalid adaptive range, expected 0 < tau_sq_min <= tau_sq_max, "
                f"got [{self.tau_sq_min}, {self.tau_sq_max}]"
            )
        if self.tau_sq is not None and not self.tau_sq > 0:
            raise ConfigError(f"Fixed tau_sq must be positive, got {self.tau_sq}")
        if self.normalization not in ("grid", "prior"):
            raise ConfigError(f"normalization must be grid or prior, got {self.normalization!r}")

    @property
    def mode(self) -> EfeMode:
        """The τ² mode of the preference."""
        return "adaptive" if self.tau_sq is None else "fixed"


@dataclass(frozen=True, kw_only=True, slots=True)
class AcquisitionSpec:
    """
    Acquisition function selection with exactly the parameters its kind uses.

    Use the factory class methods instead of the initializer where possible.
    """

    kind: AcquisitionKind
    """The acquisition function."""

    beta: float | None = None
    """UCB exploration weight β."""

    xi: float | None = None
    """PI improvement margin ξ."""

    efe: EfePreference | None = None
    """EFE preference."""

    correlated: bool = False
    """Whether KG propagates a fantasy observation through the joint posterior covariance."""

    name: str | None = None
    """Label of the method in reports, defaults to the kind."""

    def __post_init__(self) -> None:
        kind = self.kind
        if (self.beta is not None) != (kind is AcquisitionKind.UCB):
            raise ConfigError(f"beta must be set for UCB and only for UCB, got kind {kind.value}")
        if (self.xi is not None) != (kind is AcquisitionKind.PI):
            raise ConfigError(f"xi must be set for PI and only for PI, got kind {kind.value}")
        if (self.efe is not None) != (kind is AcquisitionKind.EFE):
            raise ConfigError(f"efe must be set for EFE and only for EFE, got kind {kind.value}")
        if self.correlated and kind is not AcquisitionKind.KG:
            raise ConfigError(f"correlated is only valid for KG, got kind {kind.value}")
        if self.beta is not None and not self.beta >= 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.xi is not None and not self.xi >= 0:
            raise ConfigError(f"xi must be non-negative, got {self.xi}")

    @property
    def label(self) -> str:
        """The name of the method in reports and output paths."""
        return self.kind.value if self.name is None else self.name

    @classmethod
    def ucb(cls, beta: float = 2.0, *, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.UCB, beta=beta, name=name)

    @classmethod
    def ei(cls, *, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.EI, name=name)

    @classmethod
    def pi(cls, xi: float = 0.01, *, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.PI, xi=xi, name=name)

    @classmethod
    def var(cls, *, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.VAR, name=name)

    @classmethod
    def ts(cls, *, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.TS, name=name)

    @classmethod
    def kg(cls, *, correlated: bool = False, name: str | None = None) -> AcquisitionSpec:
        return cls(kind=AcquisitionKind.KG, correlated=correlated, name=name)

    @classmethod
    def efe_with(
        cls, preference: EfePreference | None = None, *, name: str | None = None
    ) -> AcquisitionSpec:
        return cls(
            kind=AcquisitionKind.EFE,
            efe=EfePreference() if preference is None else preference,
            name=name,
        )


@dataclass(frozen=True, slots=True)
class ScoreVector:
    """
    Finite acquisition scores on the grid, higher is better.
    """

    scores: FloatArray
    """One score per grid point."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", readonly(self.scores))
        if not np.all(np.isfinite(self.scores)):
            raise NonFiniteScores("Acquisition scores must be finite.")

    @property
    def argmax_index(self) -> int:
        """The smallest index attaining the maximum score."""
        return first_argmax(self.scores)


# -- Expected free energy


@overload
def pragmatic_value(mu: float, var_predictive: float, y_star: float, tau_sq: float) -> float: ...


@overload
def pragmatic_value(
    mu: FloatArray, var_predictive: FloatArray, y_star: float, tau_sq: float | FloatArray
) -> FloatArray: ...


def pragmatic_value(mu: Any, var_predictive: Any, y_star: float, tau_sq: Any) -> Any:
    """
    Expected negative log-preference `((μ - y*)² + σy²) / (2τ²)` of a predicted observation.

    The additive `½ln(2πτ²)` constant is dropped.

    Arguments:
        mu: Predictive mean μ(x).
        var_predictive: Predictive variance σy²(x).
        y_star: The preferred observation.
        tau_sq: The preference variance, positive.
    """
    diff = mu - y_star
    return (diff * diff + var_predictive) / (2.0 * tau_sq)


@overload
def epistemic_value(var_latent: float, noise_var: float) -> float: ...


@overload
def epistemic_value(var_latent: FloatArray, noise_var: float) -> FloatArray: ...


def epistemic_value(var_latent: Any, noise_var: float) -> Any:
    """
    Expected information gain `½ln(1 + σ²/σn²)` of observing a point.

    Raises:
        NoiseVarZero: If `noise_var` is zero, where the information gain diverges.
    """
    if noise_var == 0:
        raise NoiseVarZero("The epistemic value is undefined for noiseless observations.")
    return 0.5 * np.log1p(var_latent / noise_var)


def preferred_observation(posterior: Posterior, pref: EfePreference) -> float:
    """Returns y*: the fixed preference or the largest posterior mean on the grid."""
    return float(np.max(posterior.mu)) if pref.y_star is None else pref.y_star


def adaptive_tau_sq(posterior: Posterior, pref: EfePreference) -> FloatArray:
    """
    Curvature-aware preference variance per grid point.

    The raw value is `1 / (|μ″(x)| + 1/σ²(x))`. With `"grid"` normalization it is rescaled
    so its maximum over the grid maps to `tau_sq_max` and zero maps to `tau_sq_min`. With
    `"prior"` normalization it is divided by the prior variance instead, which bounds it from
    above, so `tau_sq_max` is only reached where the posterior is as uncertain as the prior
    and flat.

    Arguments:
        posterior: The posterior on the grid.
        pref: The preference, its fixed `tau_sq` is ignored.
    """
    raw = 1.0 / (np.abs(posterior.mu_dd) + 1.0 / posterior.var_floored)
    if pref.normalization == "prior":
        scaled = np.minimum(raw / posterior.prior_variance, 1.0)
        return pref.tau_sq_min + (pref.tau_sq_max - pref.tau_sq_min) * scaled  # type: ignore[no-any-return]

    peak = float(np.max(raw))
    if not peak > 0:
        logger.warning("Degenerate adaptive tau_sq normalization, using tau_sq_max everywhere.")
        return np.full(posterior.n, pref.tau_sq_max)

    return pref.tau_sq_min + (pref.tau_sq_max - pref.tau_sq_min) * raw / peak  # type: ignore[no-any-return]


def preference_variance(posterior: Posterior, pref: EfePreference) -> FloatArray:
    """Returns τ² per grid point according to the mode of the preference."""
    if pref.tau_sq is None:
        return adaptive_tau_sq(posterior, pref)
    return np.full(posterior.n, pref.tau_sq)


def expected_free_energy(posterior: Posterior, pref: EfePreference, noise_var: float) -> FloatArray:
    """
    Returns G(x) = pragmatic value - epistemic value per grid point. Lower is better.

    Raises:
        NoiseVarZero: If `noise_var` is zero.
    """
    tau_sq = preference_variance(posterior, pref)
    pragmatic = pragmatic_value(
        posterior.mu, posterior.var_predictive, preferred_observation(posterior, pref), tau_sq
    )
    if pref.log_normalizer:
        pragmatic = pragmatic + 0.5 * np.log(2.0 * np.pi * tau_sq)
    return pragmatic - epistemic_value(posterior.var_latent, noise_var)  # type: ignore[no-any-return]


def efe_scores(posterior: Posterior, pref: EfePreference, noise_var: float) -> ScoreVector:
    """
    Maximization form `-G(x)` of the expected free energy.

    Raises:
        NoiseVarZero: If `noise_var` is zero.
    """
    return ScoreVector(-expected_free_energy(posterior, pref, noise_var))


# -- Classic acquisition functions


def ucb_scores(posterior: Posterior, beta: float) -> ScoreVector:
    """Upper confidence bound `μ(x) + β·σ(x)` with the latent σ."""
    return ScoreVector(posterior.mu + beta * posterior.std)


def ei_scores(posterior: Posterior, incumbent: float) -> ScoreVector:
    """
    Expected improvement over `incumbent` under the latent posterior.

    Points without uncertainty score their deterministic improvement `max(μ - incumbent, 0)`.
    """
    sigma = posterior.std
    improvement = posterior.mu - incumbent
    certain = sigma <= 0
    z = np.divide(improvement, sigma, out=np.zeros_like(sigma), where=~certain)
    scores = improvement * norm.cdf(z) + sigma * norm.pdf(z)
    return ScoreVector(np.where(certain, np.maximum(improvement, 0.0), scores))


def pi_scores(posterior: Posterior, incumbent: float, xi: float) -> ScoreVector:
    """
    Probability of improving on `incumbent` by at least `xi`.

    Points without uncertainty score 1 if `μ > incumbent + xi` and 0 otherwise.
    """
    sigma = posterior.std
    margin = posterior.mu - incumbent - xi
    certain = sigma <= 0
    z = np.divide(margin, sigma, out=np.zeros_like(sigma), where=~certain)
    return ScoreVector(np.where(certain, (margin > 0).astype(np.float64), norm.cdf(z)))


def var_scores(posterior: Posterior) -> ScoreVector:
    """Pure exploration: the latent posterior standard deviation."""
    return ScoreVector(posterior.std)


def ts_scores(model: GpModel, grid: Grid, rng: np.random.Generator) -> ScoreVector:
    """
    Thompson sampling: a single joint posterior draw on the grid.

    Raises:
        FactorizationFailure: If the posterior covariance cannot be factorized.
    """
    return ScoreVector(sample_posterior(model, grid, rng))


def _expected_max_gain(a: FloatArray, b: FloatArray) -> float:
    """
    Returns `E[max_i(a_i + b_i Z)] - max_i a_i` for a standard normal `Z`.

    The expectation is computed exactly from the upper envelope of the lines `a_i + b_i z`.
    """
    # Sort by slope, then intercept, and keep only the best intercept for each slope.
    order = np.lexsort((a, b))
    slopes, intercepts = b[order], a[order]
    keep = np.append(slopes[1:] != slopes[:-1], True)
    slopes, intercepts = slopes[keep].tolist(), intercepts[keep].tolist()
    if len(slopes) < 2:
        return 0.0

    # Upper envelope: lines in increasing slope order with increasing breakpoints.
    hull: list[int] = []
    breaks: list[float] = []
    for i in range(len(slopes)):
        s_i, c_i = slopes[i], intercepts[i]
        while hull:
            j = hull[-1]
            z = (intercepts[j] - c_i) / (s_i - slopes[j])
            if breaks and z <= breaks[-1]:
                hull.pop()
                breaks.pop()
            else:
                break
        if hull:
            breaks.append((intercepts[hull[-1]] - c_i) / (s_i - slopes[hull[-1]]))
        hull.append(i)

    if len(hull) < 2:
        return 0.0

    hull_slopes = np.asarray([slopes[i] for i in hull])
    c = -np.abs(np.asarray(breaks))
    return float(np.sum(np.diff(hull_slopes) * (c * norm.cdf(c) + norm.pdf(c))))


def kg_scores(posterior: Posterior, noise_var: float, *, correlated: bool = False) -> ScoreVector:
    """
    Exact one-step knowledge gradient over the grid.

    For each candidate, the updated grid mean after a fantasy observation
    `y ~ N(μ(x), σ²(x) + σn²)` is linear in the standardized observation, so the expected
    maximum is computed exactly from the upper envelope of these lines.

    By default the grid points are treated as independent: a fantasy observation only moves
    the mean at the candidate itself, by the noise-adjusted predictive standard deviation
    `σ²(x) / sqrt(σ²(x) + σn²)`. The correlated variant moves every grid mean through the
    joint posterior covariance.

    Raises:
        ConfigError: If `correlated` is set but the posterior has no joint covariance.
    """
    mu = posterior.mu
    if not correlated:
        cov = np.diag(posterior.var_latent)
    elif posterior.cov is None:
        raise ConfigError("Correlated KG requires the joint posterior covariance.")
    else:
        cov = posterior.cov
    fantasy_var = posterior.var_latent + noise_var
    scores = np.zeros(posterior.n)
    for j in range(posterior.n):
        if not fantasy_var[j] > 0 or not posterior.var_latent[j] > 0:
            continue
        scores[j] = _expected_max_gain(mu, cov[:, j] / np.sqrt(fantasy_var[j]))

    return ScoreVector(scores)


# -- Dispatch


def score(
    spec: AcquisitionSpec,
    posterior: Posterior,
    *,
    model: GpModel,
    grid: Grid,
    incumbent: float,
    rng: np.random.Generator,
) -> ScoreVector:
    """
    Scores the grid with the acquisition function described by `spec`.

    Arguments:
        spec: The acquisition function.
        posterior: The posterior of `model` on `grid`.
        model: The fitted GP, used by sampling based methods and for the noise variance.
        grid: The evaluation grid.
        incumbent: The improvement threshold of EI and PI.
        rng: Random number generator of the randomized methods.
    """
    noise_var = model.config.noise_variance
    kind = spec.kind
    if kind is AcquisitionKind.EFE:
        return efe_scores(posterior, spec.efe, noise_var)  # type: ignore[arg-type]
    if kind is AcquisitionKind.UCB:
        return ucb_scores(posterior, spec.beta)  # type: ignore[arg-type]
    if kind is AcquisitionKind.EI:
        return ei_scores(posterior, incumbent)
    if kind is AcquisitionKind.PI:
        return pi_scores(posterior, incumbent, spec.xi)  # type: ignore[arg-type]
    if kind is AcquisitionKind.VAR:
        return var_scores(posterior)
    if kind is AcquisitionKind.TS:
        return ts_scores(model, grid, rng)
    if kind is AcquisitionKind.KG:
        return kg_scores(posterior, noise_var, correlated=spec.correlated)

    raise ConfigError(f"Unknown acquisition kind: {kind}")
