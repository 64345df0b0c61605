from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .typing import FloatArray


def derive_seed(*keys: int) -> int:
    """
    Derives a 32-bit seed from the given integer keys.

    The keys are hashed with `numpy.random.SeedSequence`, so the result depends only on the
    keys and not on how many random numbers were drawn elsewhere. This is the documented
    splitting rule for every sub-seed in the package, e.g. `derive_seed(master_seed, objective_index, 0)`
    for the objective of a benchmark slot.

    Arguments:
        keys: Non-negative integer keys.

    Returns:
        The derived seed.
    """
    return int(np.random.SeedSequence(list(keys)).generate_state(1, dtype=np.uint32)[0])


def keyed_rng(*keys: int) -> np.random.Generator:
    """Returns a new `Generator` seeded from the given integer keys."""
    return np.random.default_rng(np.random.SeedSequence(list(keys)))


def readonly(values: ArrayLike) -> FloatArray:
    """
    Returns a read-only float64 copy of `values`.

    Arrays stored on frozen dataclasses go through this function, so the containing
    objects are immutable in practice, not only by convention.
    """
    result = np.array(values, dtype=np.float64)
    result.setflags(write=False)
    return result


def first_argmax(values: FloatArray) -> int:
    """Returns the smallest index attaining the maximum of `values`."""
    # np.argmax() returns the first occurrence of the maximum.
    return int(np.argmax(values))
