from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Literal, TypeAlias

from efebo.acquisition import AcquisitionSpec, EfePreference
from efebo.engine import RunConfig, final_posterior, run
from efebo.logging import logger
from efebo.objectives import VdpProblem
from efebo.utils import readonly

if TYPE_CHECKING:
    from collections.abc import Iterable

    from efebo.engine import RunRecord
    from efebo.typing import FloatArray

    from ._config import VdpDemoConfig

VdpMode: TypeAlias = Literal["adaptive", "fixed"]
"""Preference variance mode of a Van der Pol demo run."""

vdp_modes: tuple[VdpMode, ...] = ("adaptive", "fixed")


@dataclass(frozen=True, kw_only=True, slots=True)
class VdpModeResult:
    """Result of the EFE run of one preference variance mode."""

    mode: VdpMode
    """The preference variance mode."""

    record: RunRecord
    """The run record. Its `incumbent_x` values are κ values."""

    mean: FloatArray
    """Final posterior mean on the κ grid."""

    lower: FloatArray
    """Final posterior mean minus two latent standard deviations."""

    upper: FloatArray
    """Final posterior mean plus two latent standard deviations."""

    @property
    def best_kappa(self) -> float:
        """The recommended κ after the last iteration."""
        return self.record.final.incumbent_x

    @property
    def final_mse(self) -> float:
        """GP MSE over the κ grid after the last iteration."""
        return self.record.final.gp_mse

    @property
    def queried(self) -> tuple[float, ...]:
        """Every queried κ, initial design included."""
        return self.record.initial_xs + tuple(self.record.series("x"))


@dataclass(frozen=True, kw_only=True, slots=True)
class VdpDemoResult:
    """Plot-ready data of the Van der Pol demo."""

    config: VdpDemoConfig
    """The demo configuration."""

    kappa: FloatArray
    """The κ grid."""

    true_cost: FloatArray
    """The objective (negative windowed MSE) on the κ grid."""

    modes: tuple[VdpModeResult, ...]
    """One result per executed mode."""

    def get(self, mode: VdpMode) -> VdpModeResult:
        """
        Returns the result of the given mode.

        Raises:
            KeyError: If the mode was not executed.
        """
        for result in self.modes:
            if result.mode == mode:
                return result
        raise KeyError(mode)


def vdp_acquisition(cfg: VdpDemoConfig, mode: VdpMode) -> AcquisitionSpec:
    """The EFE acquisition of the given mode."""
    pref = EfePreference(
        tau_sq_min=cfg.tau_sq_min,
        tau_sq_max=cfg.tau_sq_max,
        tau_sq=cfg.fixed_tau_sq if mode == "fixed" else None,
    )
    return AcquisitionSpec.efe_with(pref, name=f"EFE-{mode}")


def run_vdp_demo(cfg: VdpDemoConfig, modes: Iterable[VdpMode] = vdp_modes) -> VdpDemoResult:
    """
    Identifies the Van der Pol damping parameter with EFE in each of the given modes.

    Both modes share the reference trajectory, the initial design and the seeds.

    Raises:
        NumericalBlowup: If a simulation diverges.
    """
    problem = VdpProblem(cfg.vdp)
    grid = cfg.grid
    true_cost = problem(grid.points)
    results: list[VdpModeResult] = []
    for mode in modes:
        logger.info(f"Running Van der Pol demo in {mode} mode")
        config = RunConfig(
            grid=grid,
            gp=cfg.gp,
            acquisition=vdp_acquisition(cfg, mode),
            initial_points=cfg.initial_points,
            iterations=cfg.iterations,
            obs_noise_std=cfg.obs_noise_std,
            seed=cfg.vdp.seed,
        )
        record = run(config, problem)
        post = final_posterior(record, cfg.gp, grid)
        band = 2.0 * post.std
        results.append(
            VdpModeResult(
                mode=mode,
                record=record,
                mean=post.mu,
                lower=readonly(post.mu - band),
                upper=readonly(post.mu + band),
            )
        )
        logger.info(f"{mode} mode: best kappa={results[-1].best_kappa:.4f} mse={results[-1].final_mse:.4g}")

    return VdpDemoResult(config=cfg, kappa=grid.points, true_cost=readonly(true_cost), modes=tuple(results))


def with_seed(cfg: VdpDemoConfig, seed: int) -> VdpDemoConfig:
    """Returns a copy of the configuration with a different reference noise seed."""
    return replace(cfg, vdp=replace(cfg.vdp, seed=seed))


def vdp_seed_sweep(cfg: VdpDemoConfig, seeds: Iterable[int]) -> list[VdpDemoResult]:
    """Runs the demo with each of the given seeds, e.g. to check the adaptive mode's MSE advantage."""
    return [run_vdp_demo(with_seed(cfg, s)) for s in seeds]


def adaptive_wins(result: VdpDemoResult) -> bool:
    """Whether the adaptive mode reached a strictly lower final GP MSE than the fixed mode."""
    return result.get("adaptive").final_mse < result.get("fixed").final_mse
