from __future__ import annotations

from typing import Protocol, TypeAlias

import numpy as np
import numpy.typing as npt

FloatArray: TypeAlias = npt.NDArray[np.float64]
"""One or more dimensional array of double precision floats."""


class Kernel(Protocol):
    """
    Covariance function protocol definition.

    Kernels operate on 1-D arrays of locations and are expected to be pure.
    """

    @property
    def variance(self) -> float:
        """The prior variance `k(x, x)` of the kernel."""
        ...

    def __call__(self, xs: FloatArray, zs: FloatArray, /) -> FloatArray:
        """Returns the `len(xs) x len(zs)` covariance matrix."""
        ...


class Objective(Protocol):
    """
    Vectorized black-box objective protocol definition.

    Objectives map an array of locations to an array of function values of the same shape.
    """

    def __call__(self, xs: FloatArray, /) -> FloatArray: ...
