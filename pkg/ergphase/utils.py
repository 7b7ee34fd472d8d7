from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .typing import FloatArray


__all__ = ["RTOL", "bracketed_root", "sign_change_roots"]


# Smallest relative tolerance scipy.optimize.brentq accepts.
RTOL = 4 * float(np.finfo(np.float64).eps)


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-14,
) -> float:
    """
    Find a root of ``f`` in ``[lo, hi]`` with Brent's method.

    When ``f`` has the same sign at both ends, the end closer to zero is
    returned: this is where two roots have just merged.

    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        return lo if abs(f_lo) < abs(f_hi) else hi
    return brentq(f, lo, hi, xtol=xtol, rtol=RTOL, maxiter=200)


def sign_change_roots(
    f: Callable[..., FloatArray | float],
    grid: FloatArray,
) -> list[tuple[float, int]]:
    """
    Locate the roots of ``f`` through its sign changes on ``grid``.

    ``f`` must accept both an array and a scalar. A grid node where ``f``
    vanishes exactly is a root when the signs on either side differ.

    Returns:
        ``(root, direction)`` pairs in increasing order, where ``direction``
        is ``+1`` when ``f`` crosses upward and ``-1`` when it crosses
        downward.

    """
    signs = np.sign(f(grid))
    nonzero = np.flatnonzero(signs)
    roots = []
    for left, right in zip(nonzero[:-1], nonzero[1:]):
        if signs[left] == signs[right]:
            continue
        direction = int(signs[right])
        if right - left > 1:
            roots.append((float(grid[left + 1]), direction))
        else:
            root = brentq(f, grid[left], grid[right], xtol=1e-14, rtol=RTOL, maxiter=200)
            roots.append((float(root), direction))
    return roots
