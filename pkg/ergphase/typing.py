from __future__ import annotations

from typing import Union

import numpy as np
import numpy.typing as npt


__all__ = [
    "ArrayLike",
    "FloatArray",
    "Seed",
]


ArrayLike = npt.ArrayLike
"""Anything :func:`numpy.asarray` turns into an array of floats."""


FloatArray = npt.NDArray[np.float64]
"""Array of double precision floats."""


Seed = Union[int, np.random.Generator, None]
"""Anything :func:`numpy.random.default_rng` accepts."""
