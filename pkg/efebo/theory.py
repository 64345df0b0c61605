"""
Numerical counterparts of the analytic EFE results.

The functions in this module turn the linearization, information-gain and local
convergence results into checkable procedures: closed forms next to finite-difference or
Monte Carlo estimates of the same quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .acquisition import epistemic_value, pragmatic_value
from .errors import ConfigError, DegenerateQuadratic, SignConditionViolated

if TYPE_CHECKING:
    from collections.abc import Callable

    from .typing import FloatArray

_degenerate_denominator = 1e-14
"""Quadratic models with a smaller curvature denominator have no isolated stationary point."""


@dataclass(frozen=True, kw_only=True, slots=True)
class LinearizationPoint:
    """
    Reference point `(μ0, σ0)` of a first-order expansion of the EFE objective J(μ, σ).
    """

    mu0: float
    """Reference posterior mean."""

    sigma0: float
    """Reference posterior standard deviation, positive."""

    y_star: float
    """Preferred observation."""

    tau_sq: float
    """Preference variance, positive."""

    noise_var: float = 0.0
    """Observation noise variance, non-negative."""

    def __post_init__(self) -> None:
        if not self.sigma0 > 0:
            raise ConfigError(f"sigma0 must be positive, got {self.sigma0}")
        if not self.tau_sq > 0:
            raise ConfigError(f"tau_sq must be positive, got {self.tau_sq}")
        if not self.noise_var >= 0:
            raise ConfigError(f"noise_var must be non-negative, got {self.noise_var}")


@dataclass(frozen=True, kw_only=True, slots=True)
class LinearCoeffs:
    """
    Coefficients of `J(μ, σ) ≈ J0 + a·(μ - μ0) + b·(σ - σ0)`.
    """

    a: float
    """∂J/∂μ at the reference point."""

    b: float
    """∂J/∂σ at the reference point."""

    beta: float
    """The exploration weight of the equivalent confidence-bound acquisition."""


@dataclass(frozen=True, kw_only=True, slots=True)
class LocalExpansion:
    """
    Second-order expansion of the posterior variance around the maximizer x* of f.

    `σ²(x* + h) = v0 + g·h + v2·h²/2`, and `f(x* + h) = f(x*) - m·h²/2`.
    """

    m: float
    """Curvature of f at x*."""

    v0: float
    """σ²(x*), positive."""

    g: float
    """First derivative of σ² at x*."""

    v2: float
    """Second derivative of σ² at x*."""

    noise_var: float
    """Observation noise variance."""

    tau_sq: float
    """Preference variance, positive."""

    def __post_init__(self) -> None:
        if not self.v0 > 0:
            raise ConfigError(f"v0 must be positive, got {self.v0}")
        if not self.tau_sq > 0:
            raise ConfigError(f"tau_sq must be positive, got {self.tau_sq}")
        if not self.v0 + self.noise_var > 0:
            raise ConfigError("v0 + noise_var must be positive.")

    @property
    def s(self) -> float:
        """Predictive variance at x*: `S = v0 + σn²`."""
        return self.v0 + self.noise_var

    @property
    def delta(self) -> float:
        """`Δ = 1/τ² - 1/S`, zero exactly at the unbiased preference variance."""
        return 1.0 / self.tau_sq - 1.0 / self.s


# -- Linearization


def efe_objective(mu: float, sigma: float, pt: LinearizationPoint, *, epistemic: bool) -> float:
    """
    The scalar EFE objective J(μ, σ) (to be minimized).

    Arguments:
        mu: Posterior mean.
        sigma: Posterior standard deviation.
        pt: Provides y*, τ² and σn².
        epistemic: Whether to include the epistemic value (full EFE) or use the
            pragmatic value alone.
    """
    value = pragmatic_value(mu, sigma * sigma + pt.noise_var, pt.y_star, pt.tau_sq)
    if epistemic:
        value -= epistemic_value(sigma * sigma, pt.noise_var)
    return value


def objective_gradient(
    pt: LinearizationPoint, *, epistemic: bool, step: float = 1e-6
) -> tuple[float, float]:
    """
    Central finite-difference estimate of `(∂J/∂μ, ∂J/∂σ)` at the reference point.

    Arguments:
        pt: The reference point.
        epistemic: See `efe_objective()`.
        step: Relative step size.
    """

    def j(mu: float, sigma: float) -> float:
        return efe_objective(mu, sigma, pt, epistemic=epistemic)

    h_mu = step * max(1.0, abs(pt.mu0))
    h_sigma = step * pt.sigma0
    return (
        (j(pt.mu0 + h_mu, pt.sigma0) - j(pt.mu0 - h_mu, pt.sigma0)) / (2.0 * h_mu),
        (j(pt.mu0, pt.sigma0 + h_sigma) - j(pt.mu0, pt.sigma0 - h_sigma)) / (2.0 * h_sigma),
    )


def lcb_linearization(pt: LinearizationPoint) -> LinearCoeffs:
    """
    Linearizes the pragmatic-only objective: minimizing it locally is a lower confidence
    bound rule `μ - β·σ` when the preference lies above the reference mean.

    Raises:
        SignConditionViolated: If `y* <= μ0`.
    """
    a = (pt.mu0 - pt.y_star) / pt.tau_sq
    b = pt.sigma0 / pt.tau_sq
    if not pt.y_star > pt.mu0:
        raise SignConditionViolated(f"LCB form requires y* > mu0, got y*={pt.y_star}, mu0={pt.mu0}")
    return LinearCoeffs(a=a, b=b, beta=b / abs(a))


def ucb_linearization(pt: LinearizationPoint) -> LinearCoeffs:
    """
    Linearizes the full EFE objective: minimizing it locally is an upper confidence bound
    rule `μ + β·σ` when `μ0 < y*` and `σn² + σ0² <= τ²`.

    Raises:
        SignConditionViolated: If either regime condition fails.
    """
    s = pt.noise_var + pt.sigma0 * pt.sigma0
    a = (pt.mu0 - pt.y_star) / pt.tau_sq
    b = pt.sigma0 * (1.0 / pt.tau_sq - 1.0 / s)
    if not pt.mu0 < pt.y_star:
        raise SignConditionViolated(f"UCB form requires mu0 < y*, got mu0={pt.mu0}, y*={pt.y_star}")
    if not s <= pt.tau_sq:
        raise SignConditionViolated(
            f"UCB form requires noise_var + sigma0² <= tau_sq, got {s} > {pt.tau_sq}"
        )
    return LinearCoeffs(a=a, b=b, beta=max(0.0, -b) / -a)


# -- Information gain identities


def kalman_identity_check(
    var_latent: float, noise_var: float, n_samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """
    Compares the closed form `E[(μ⁺ - μ)²] = σ⁴ / (σ² + σn²)` of the scalar Kalman update
    with its Monte Carlo estimate.

    Returns:
        The analytic value and the Monte Carlo estimate.
    """
    if var_latent == 0:
        return 0.0, 0.0

    s = var_latent + noise_var
    analytic = var_latent * var_latent / s
    gain = var_latent / s
    innovation = rng.normal(0.0, math.sqrt(s), n_samples)
    return analytic, float(np.mean((gain * innovation) ** 2))


def expected_kl_monte_carlo(
    var_latent: float, noise_var: float, n_samples: int, rng: np.random.Generator
) -> float:
    """
    Monte Carlo estimate of the expected KL divergence between the scalar posterior after
    a noisy observation and the prior at the same point.

    The closed form is `epistemic_value(var_latent, noise_var)`.
    """
    s = var_latent + noise_var
    var_post = var_latent * noise_var / s
    mean_shift = (var_latent / s) * rng.normal(0.0, math.sqrt(s), n_samples)
    kl = 0.5 * (
        math.log(var_latent / var_post) + (var_post + mean_shift * mean_shift) / var_latent - 1.0
    )
    return float(np.mean(kl))


def cross_entropy_monte_carlo(
    mu: float,
    var_predictive: float,
    y_star: float,
    tau_sq: float,
    n_samples: int,
    rng: np.random.Generator,
) -> float:
    """
    Monte Carlo estimate of `E[-ln p(y)] - ½ln(2πτ²)` for `y ~ N(μ, σy²)` and
    `p = N(y*, τ²)`.

    The closed form is `pragmatic_value(mu, var_predictive, y_star, tau_sq)`.
    """
    ys = rng.normal(mu, math.sqrt(var_predictive), n_samples)
    log_norm = 0.5 * math.log(2.0 * math.pi * tau_sq)
    neg_log_pref = (ys - y_star) ** 2 / (2.0 * tau_sq) + log_norm
    return float(np.mean(neg_log_pref)) - log_norm


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of a univariate Gaussian."""
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def eig_identity_check(var_latent: float, noise_var: float) -> tuple[float, float]:
    """
    Computes the epistemic value and the mutual information `H(f) - H(f | y)` of a noisy
    observation from the Gaussian entropies. The two must agree.

    Returns:
        The epistemic value and the mutual information.

    Raises:
        ConfigError: If `var_latent` is not positive.
    """
    if not var_latent > 0:
        raise ConfigError(f"Entropies require a positive latent variance, got {var_latent}")

    var_post = var_latent * noise_var / (var_latent + noise_var)
    return (
        epistemic_value(var_latent, noise_var),
        gaussian_entropy(var_latent) - gaussian_entropy(var_post),
    )


# -- Local convergence


def quadratic_model_coeffs(exp: LocalExpansion) -> tuple[float, float]:
    """
    Linear and quadratic coefficients of the local model `a(h) = C + L·h + Q·h²` of the
    maximization form of EFE around x*, with `y* = μ(x*)`.

    Returns:
        `(L, Q)`.
    """
    s, delta = exp.s, exp.delta
    return -0.5 * exp.g * delta, -0.25 * exp.v2 * delta - exp.g * exp.g / (4.0 * s * s)


def efe_bias(exp: LocalExpansion) -> float:
    """
    Offset `h = x_EFE - x*` of the stationary point of the local quadratic model.

    The offset is `-L / (2Q) = -gΔ / (v2·Δ + g²/S²)`. It does not depend on the curvature
    of f and it vanishes when `τ² = S`.

    Raises:
        DegenerateQuadratic: If the model has no isolated stationary point.
    """
    s, delta = exp.s, exp.delta
    denominator = exp.v2 * delta + exp.g * exp.g / (s * s)
    if abs(denominator) < _degenerate_denominator:
        raise DegenerateQuadratic(f"Quadratic model denominator is {denominator:.3e}")
    return -exp.g * delta / denominator


def unbiased_tau_sq(exp: LocalExpansion) -> float:
    """The preference variance `S = σ²(x*) + σn²` at which the local bias vanishes."""
    return exp.s


def local_neighborhood(exp: LocalExpansion) -> float:
    """
    Radius of the neighborhood of x* in which the quadratic model is trusted:
    `0.01 * min(1, S/|g|)`.
    """
    return 0.01 * (1.0 if exp.g == 0 else min(1.0, exp.s / abs(exp.g)))


def local_argmax(fn: Callable[[FloatArray], FloatArray], radius: float, n: int = 2001) -> float:
    """
    Grid maximizer of the vectorized function `fn` over `[-radius, radius]`.

    `n` should be odd, so `h = 0` is a grid point.
    """
    hs = np.linspace(-radius, radius, n)
    return float(hs[int(np.argmax(fn(hs)))])
