"""
Cramér rate function of an edge-weight distribution.

The rate function ``I`` is the Legendre transform of the cumulant generating
function ``K``::

    I(u) = sup_theta (theta u - K(theta))

Because ``K`` is smooth and strictly convex, every ``u`` in ``(0, 1)`` has a
unique dual ``theta`` with ``K'(theta) = u``, and then ``I(u) + K(theta) =
theta u``, ``I'(u) = theta`` and ``I''(u) K''(theta) = 1``. Nothing is
tabulated: every call solves for the dual again.

"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Callable, NamedTuple

from scipy.optimize import brentq

from .config import DEFAULT_TOLERANCES
from .distributions import (
    EdgeWeightDistribution,
    cumulant,
    cumulant_derivatives,
    theta_limit,
)
from .exceptions import BracketFailure, DomainError
from .utils import RTOL


__all__ = [
    "DualPair",
    "RateDerivatives",
    "BoundaryBehavior",
    "dual_of",
    "rate",
    "rate_derivatives",
    "boundary_behavior",
]


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class DualPair:
    """
    Mean weight ``u`` and its dual tilt ``theta``, with ``K'(theta) = u``.

    """

    u: float
    theta: float


class RateDerivatives(NamedTuple):
    """``I'(u)`` and ``I''(u)``."""

    i1: float
    i2: float


@dataclasses.dataclass(frozen=True)
class BoundaryBehavior:
    """
    Values of the rate function at the ends of ``[0, 1]``.

    An infinite value is represented by :data:`math.inf`.

    """

    at_zero: float
    at_one: float

    @property
    def bounded(self) -> bool:
        """Whether ``I`` is finite on the closed interval ``[0, 1]``."""
        return math.isfinite(self.at_zero) and math.isfinite(self.at_one)


def _mean_residual(dist: EdgeWeightDistribution, u: float) -> Callable[[float], float]:
    def residual(theta: float) -> float:
        return cumulant_derivatives(dist, theta).k1 - u

    return residual


def dual_of(dist: EdgeWeightDistribution, u: float) -> DualPair:
    """
    Solve ``K'(theta) = u``.

    The bracket doubles outward from ``[-1, 1]``; Brent's method refines it.
    ``K'`` is increasing, so the root is unique.

    Raises:
        DomainError: If ``u`` isn't in ``(0, 1)``.
        BracketFailure: If ``|theta|`` would exceed the bracketing limit, i.e.
            ``u`` is numerically out of reach for this distribution.

    """
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u!r}")
    residual = _mean_residual(dist, u)
    at_zero = residual(0.0)
    if at_zero == 0.0:
        return DualPair(u, 0.0)

    # Search on the side where K' crosses u.
    direction = 1.0 if at_zero < 0.0 else -1.0
    limit = min(DEFAULT_TOLERANCES.bracket_limit, theta_limit(dist))
    near, far = 0.0, 1.0
    while residual(direction * far) * direction < 0.0:
        if far >= limit:
            raise BracketFailure(u, f"no bracket within |theta| <= {limit:g}")
        near, far = far, min(2.0 * far, limit)

    lo, hi = sorted((direction * near, direction * far))
    theta = brentq(residual, lo, hi, xtol=1e-15, rtol=RTOL, maxiter=200)
    error = abs(residual(theta))
    if error > DEFAULT_TOLERANCES.dual_tol:
        raise BracketFailure(u, f"residual {error:.3g} above tolerance at theta={theta:g}")
    return DualPair(u, theta)


def rate(dist: EdgeWeightDistribution, u: float) -> float:
    """
    Evaluate the rate function ``I(u) = theta u - K(theta)``.

    Raises:
        DomainError: If ``u`` isn't in ``(0, 1)``.
        BracketFailure: See :func:`dual_of`.

    """
    pair = dual_of(dist, u)
    return pair.theta * u - cumulant(dist, pair.theta)


def rate_derivatives(dist: EdgeWeightDistribution, u: float) -> RateDerivatives:
    """
    Evaluate ``I'(u) = theta`` and ``I''(u) = 1 / K''(theta)``.

    Raises:
        DomainError: If ``u`` isn't in ``(0, 1)``.
        BracketFailure: See :func:`dual_of`.

    """
    pair = dual_of(dist, u)
    k2 = cumulant_derivatives(dist, pair.theta).k2
    return RateDerivatives(pair.theta, 1.0 / k2)


def _boundary_value(value: Callable[[float], float]) -> float:
    previous = None
    for step in DEFAULT_TOLERANCES.boundary_steps:
        current = value(step)
        if current > DEFAULT_TOLERANCES.divergence_ceiling:
            return math.inf
        if previous is not None and abs(current - previous) < DEFAULT_TOLERANCES.boundary_cauchy:
            return current
        previous = current
    return math.inf


def boundary_behavior(dist: EdgeWeightDistribution) -> BoundaryBehavior:
    """
    Classify ``I(0)`` and ``I(1)`` as finite or infinite.

    ``I(0) = lim -K(-T)`` and ``I(1) = lim T - K(T)`` as ``T`` grows. A limit
    is finite when successive tilts agree within the Cauchy tolerance and
    infinite when they keep moving or exceed the divergence ceiling.

    """
    at_zero = _boundary_value(lambda t: -cumulant(dist, -t))
    at_one = _boundary_value(lambda t: t - cumulant(dist, t))
    logger.debug("%s: I(0)=%g, I(1)=%g", dist, at_zero, at_one)
    return BoundaryBehavior(at_zero, at_one)
