"""
Benchmark objectives: random sinusoid sums and Van der Pol parameter identification,
plus the noisy observation channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Literal, TypeAlias

import numpy as np

from .errors import ConfigError, DomainViolation, NumericalBlowup
from .utils import keyed_rng, readonly

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .typing import FloatArray

Trig: TypeAlias = Literal["sin", "cos"]

sinusoid_domain = (-8.0, 8.0)
"""Domain of the random sinusoid objectives."""

n_sinusoid_components = 10
"""Number of components of a random sinusoid objective."""

_blowup_threshold = 1e6
"""State magnitude above which a simulation is considered divergent."""


@dataclass(frozen=True, kw_only=True, slots=True)
class SinusoidComponent:
    """One `amplitude * trig(frequency * x + phase)` term."""

    amplitude: float
    frequency: float
    phase: float
    trig: Trig

    def __call__(self, xs: FloatArray) -> FloatArray:
        arg = self.frequency * xs + self.phase
        trig = np.sin(arg) if self.trig == "sin" else np.cos(arg)
        return self.amplitude * trig  # type: ignore[no-any-return]


@dataclass(frozen=True, kw_only=True, slots=True)
class SinusoidObjective:
    """
    Sum of sine and cosine components on `[-8, 8]`.
    """

    components: tuple[SinusoidComponent, ...]
    """The components of the sum."""

    seed: int | None = None
    """The seed the components were generated from, if any."""

    domain: tuple[float, float] = sinusoid_domain
    """The domain of the objective."""

    def __call__(self, xs: FloatArray) -> FloatArray:
        """
        Vectorized evaluation.

        Raises:
            DomainViolation: If any location is outside the domain.
        """
        xs = np.asarray(xs, dtype=np.float64)
        lower, upper = self.domain
        if np.any(xs < lower) or np.any(xs > upper):
            raise DomainViolation(f"Sinusoid objective evaluated outside [{lower}, {upper}]")

        result = np.zeros_like(xs)
        for c in self.components:
            result = result + c(xs)
        return result

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "domain": list(self.domain),
            "components": [
                {"amplitude": c.amplitude, "frequency": c.frequency, "phase": c.phase, "trig": c.trig}
                for c in self.components
            ],
        }


def generate_sinusoid(seed: int) -> SinusoidObjective:
    """
    Generates a random multimodal objective from 10 components.

    Amplitudes are drawn from `U[0.2, 1]`, frequencies from `U[0.2, 1.5]`, phases from
    `U[0, 2π)`, and each component is a sine or a cosine with equal probability.
    """
    rng = np.random.default_rng(seed)
    amplitudes = rng.uniform(0.2, 1.0, n_sinusoid_components)
    frequencies = rng.uniform(0.2, 1.5, n_sinusoid_components)
    phases = rng.uniform(0.0, 2.0 * math.pi, n_sinusoid_components)
    use_sin = rng.random(n_sinusoid_components) < 0.5
    return SinusoidObjective(
        seed=seed,
        components=tuple(
            SinusoidComponent(
                amplitude=float(a), frequency=float(w), phase=float(p), trig="sin" if s else "cos"
            )
            for a, w, p, s in zip(amplitudes, frequencies, phases, use_sin)
        ),
    )


def evaluate_objective(obj: SinusoidObjective, x: float) -> float:
    """
    Evaluates the objective at a single location.

    Raises:
        DomainViolation: If `x` is outside the domain.
    """
    return float(obj(np.asarray([x], dtype=np.float64))[0])


# -- Van der Pol


@dataclass(frozen=True, kw_only=True, slots=True)
class VdpConfig:
    """
    Van der Pol identification setup: `ẍ - κ(1 - x²)ẋ + x = 0`.
    """

    kappa_true: float = 3.0
    """The parameter the reference trajectory is generated with."""

    x0: float = 0.5
    """Initial position."""

    v0: float = 0.0
    """Initial velocity."""

    dt: float = 0.05
    """Integrator step and sampling time in seconds."""

    t_end: float = 60.0
    """Simulated duration in seconds."""

    window: tuple[float, float] = (20.0, 60.0)
    """Steady-state window the cost is evaluated on."""

    obs_noise_std: float = 0.1
    """Standard deviation of the noise on the reference trajectory."""

    kappa_domain: tuple[float, float] = (0.5, 5.0)
    """Search interval for κ."""

    seed: int = 0
    """Seed of the reference trajectory noise."""

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0 <= self.window[0] < self.window[1] <= self.t_end:
            raise ConfigError(f"window {self.window} must lie within [0, {self.t_end}]")
        if not self.kappa_domain[0] < self.kappa_domain[1]:
            raise ConfigError(f"Invalid kappa domain: {self.kappa_domain}")
        if not self.obs_noise_std >= 0:
            raise ConfigError(f"obs_noise_std must be non-negative, got {self.obs_noise_std}")

    @property
    def n_steps(self) -> int:
        """Number of integration steps."""
        return int(round(self.t_end / self.dt))

    @property
    def times(self) -> FloatArray:
        """Sampling times, including `t = 0`."""
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def window_mask(self) -> FloatArray:
        """Boolean mask of the samples inside the steady-state window."""
        t = self.times
        tol = 1e-9 * self.dt
        return (t >= self.window[0] - tol) & (t <= self.window[1] + tol)  # type: ignore[no-any-return]


def simulate_vdp_batch(kappas: ArrayLike, cfg: VdpConfig) -> FloatArray:
    """
    Integrates the oscillator for many κ values in lock-step with fixed-step RK4.

    Arguments:
        kappas: The parameter values.
        cfg: The simulation setup.

    Returns:
        Positions with shape `(len(kappas), n_steps + 1)`.

    Raises:
        NumericalBlowup: If any state magnitude exceeds `1e6`.
    """
    kappa = np.atleast_1d(np.asarray(kappas, dtype=np.float64))
    if not np.all(np.isfinite(kappa)):
        raise ConfigError("kappa values must be finite.")

    def rhs(x: FloatArray, v: FloatArray) -> tuple[FloatArray, FloatArray]:
        return v, kappa * (1.0 - x * x) * v - x

    dt = cfg.dt
    x = np.full_like(kappa, cfg.x0)
    v = np.full_like(kappa, cfg.v0)
    out = np.empty((kappa.shape[0], cfg.n_steps + 1))
    out[:, 0] = x
    for step in range(1, cfg.n_steps + 1):
        k1x, k1v = rhs(x, v)
        k2x, k2v = rhs(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
        k3x, k3v = rhs(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
        k4x, k4v = rhs(x + dt * k3x, v + dt * k3v)
        x = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        # Comparison is False for NaN, so check the negation.
        if not (np.all(np.abs(x) <= _blowup_threshold) and np.all(np.abs(v) <= _blowup_threshold)):
            raise NumericalBlowup(f"Van der Pol state diverged at t={step * dt:.2f}s")
        out[:, step] = x

    return out


def simulate_vdp(kappa: float, cfg: VdpConfig) -> FloatArray:
    """
    Integrates the oscillator from `(x0, v0)` with fixed-step RK4.

    Returns:
        The position at every step, including the initial one.

    Raises:
        NumericalBlowup: If the state magnitude exceeds `1e6`.
    """
    return simulate_vdp_batch([kappa], cfg)[0]


def vdp_reference(cfg: VdpConfig) -> FloatArray:
    """Generates the frozen noisy reference trajectory of the experiment."""
    clean = simulate_vdp(cfg.kappa_true, cfg)
    noise = np.random.default_rng(cfg.seed).standard_normal(clean.shape)
    return clean + cfg.obs_noise_std * noise  # type: ignore[no-any-return]


def vdp_objective(kappa: float, reference: FloatArray, cfg: VdpConfig) -> float:
    """
    Negative mean squared error between the trajectory simulated with `kappa` and the
    reference, over the steady-state window.
    """
    return float(_windowed_neg_mse(simulate_vdp_batch([kappa], cfg), reference, cfg)[0])


def _windowed_neg_mse(trajectories: FloatArray, reference: FloatArray, cfg: VdpConfig) -> FloatArray:
    mask = cfg.window_mask
    diff = trajectories[:, mask] - reference[mask]
    return -np.mean(diff * diff, axis=1)  # type: ignore[no-any-return]


@dataclass(frozen=True, slots=True)
class VdpProblem:
    """
    Vectorized Van der Pol identification objective with a frozen reference trajectory.
    """

    cfg: VdpConfig
    """The simulation setup."""

    reference: FloatArray = field(init=False, repr=False, compare=False)
    """The noisy reference trajectory."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "reference", readonly(vdp_reference(self.cfg)))

    def __call__(self, kappas: FloatArray) -> FloatArray:
        lower, upper = self.cfg.kappa_domain
        if np.any(kappas < lower) or np.any(kappas > upper):
            raise DomainViolation(f"kappa outside the search interval [{lower}, {upper}]")
        return _windowed_neg_mse(simulate_vdp_batch(kappas, self.cfg), self.reference, self.cfg)


# -- Observation channel


@dataclass(slots=True)
class ObservationChannel:
    """
    Additive Gaussian noise channel `y = f + σn·z`.

    `observe()` draws from one sequential stream, `observe_at()` derives the draw from
    `(seed, step, index)` alone, so any two callers that observe the same grid index at the
    same step see the same noise, regardless of their call history.

    Instances must not be shared across concurrent runs.
    """

    noise_std: float
    """Noise standard deviation σn."""

    seed: int
    """Seed of the channel."""

    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.noise_std >= 0:
            raise ConfigError(f"noise_std must be non-negative, got {self.noise_std}")
        self._rng = np.random.default_rng(self.seed)

    def observe(self, f_value: float) -> float:
        """Returns a noisy observation of `f_value` from the sequential stream."""
        if self.noise_std == 0:
            return f_value
        return f_value + self.noise_std * float(self._rng.standard_normal())

    def observe_at(self, f_value: float, *, step: int, index: int) -> float:
        """Returns a noisy observation of `f_value` keyed by `(step, index)`."""
        if self.noise_std == 0:
            return f_value
        return f_value + self.noise_std * float(keyed_rng(self.seed, step, index).standard_normal())


def observe(channel: ObservationChannel, f_value: float) -> float:
    """Observes `f_value` through the channel."""
    return channel.observe(f_value)
