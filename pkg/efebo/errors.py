from __future__ import annotations

from pathlib import Path


class EfeboError(Exception):
    """Base class of all errors raised by `efebo`."""


class ConfigError(EfeboError, ValueError):
    """An invalid configuration value or configuration document."""


class FactorizationFailure(EfeboError):
    """
    A (regularized) kernel or posterior covariance matrix is not positive definite.

    Usually signals a degenerate configuration, for example exactly duplicated noiseless
    observations without jitter.
    """


class GridTooSmall(EfeboError, ValueError):
    """The grid has too few points for the requested operation."""


class NoiseVarZero(EfeboError, ValueError):
    """Zero observation noise variance where the information gain would diverge."""


class NonFiniteScores(EfeboError):
    """An acquisition function produced NaN or infinite scores."""


class SignConditionViolated(EfeboError):
    """The sign premise of a linearization result does not hold at the reference point."""


class DegenerateQuadratic(EfeboError):
    """The local quadratic model of the acquisition has no isolated stationary point."""


class DomainViolation(EfeboError, ValueError):
    """An objective was evaluated outside its domain."""


class NumericalBlowup(EfeboError):
    """The simulated state diverged."""


class EmptyDataset(EfeboError, ValueError):
    """The operation requires at least one observation."""


class IoFailure(EfeboError, OSError):
    """Reading or writing an output file failed."""

    def __init__(self, message: str, *, path: Path) -> None:
        """
        Initialization.

        Arguments:
            message: Description of the failure.
            path: The file or directory the failure relates to.
        """
        super().__init__(f"{message}: {path}")
        self.path = path
        """The file or directory the failure relates to."""
