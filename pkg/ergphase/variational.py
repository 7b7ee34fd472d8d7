"""
Limiting free energy and phase structure of the two-parameter model.

As the number of vertices grows, the normalized free energy converges to::

    psi = sup_u L(u),    L(u) = beta1 u + beta2 u^p - I(u) / 2

where ``I`` is the rate function of the edge-weight distribution and ``p``
the number of edges of the second subgraph. Maximization is carried out in
dual coordinates: ``u = K'(theta)`` is stationary for ``L`` exactly when::

    g(theta) = beta1 + p beta2 K'(theta)^(p-1) - theta / 2 = 0

and ``g`` is smooth, positive as ``theta -> -inf`` and negative as ``theta ->
+inf``, so its roots are always bracketed.

For ``beta2 >= 0`` the parameter plane splits along a decreasing curve
``beta2 = r(beta1)`` that ends at a critical point; across the curve the
maximizer jumps between two values. The curve is traced by equating the
scores of the two local maximizers inside the region bounded by
:func:`bounding_curves`.

"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import functools
import logging
import math
from collections.abc import Sequence
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_TOLERANCES
from .distributions import (
    EdgeWeightDistribution,
    assumption_zeros,
    cumulant_derivatives,
    theta_limit,
)
from .exceptions import (
    AssumptionViolated,
    DomainError,
    InternalInconsistency,
    RangeExhausted,
    TieNotBracketed,
)
from .legendre import DualPair, dual_of, rate
from .typing import ArrayLike, FloatArray
from .utils import RTOL, bracketed_root, sign_change_roots


__all__ = [
    "ModelParams",
    "Maximizer",
    "MaximizerSet",
    "CriticalPoint",
    "BoundingCurves",
    "PhaseSample",
    "PhaseCurve",
    "score",
    "score_at_theta",
    "stationary_points",
    "maximizers",
    "psi_infinity",
    "m_of",
    "n_of",
    "f_of",
    "critical_point",
    "bounding_curves",
    "transition_beta2",
    "phase_curve",
]


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """
    Parameters of the model.

    Attributes:
        beta1: Weight of the edge density.
        beta2: Weight of the density of the second subgraph; ``beta2 >= 0``
            is the attractive regime.
        p: Number of edges of the second subgraph.

    """

    beta1: float
    beta2: float
    p: int = 2

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise DomainError(f"parameters must be finite, got {self}")
        if int(self.p) != self.p or self.p < 2:
            raise DomainError(f"p must be an integer >= 2, got {self.p}")

    @property
    def attractive(self) -> bool:
        return self.beta2 >= 0.0

    def scaled(self, factor: float) -> ModelParams:
        return ModelParams(self.beta1 * factor, self.beta2 * factor, self.p)


@dataclasses.dataclass(frozen=True)
class Maximizer:
    """A local maximizer of ``L`` and its score."""

    pair: DualPair
    score: float

    @property
    def u(self) -> float:
        return self.pair.u

    @property
    def theta(self) -> float:
        return self.pair.theta


@dataclasses.dataclass(frozen=True)
class MaximizerSet:
    """
    Global maximizers of ``L`` at a parameter point.

    Attributes:
        points: One maximizer, or two tied ones ordered by ``u``.
        psi: Limiting free energy, the maximal score.
        on_transition: Whether two maximizers tie.

    """

    points: tuple[Maximizer, ...]
    psi: float
    on_transition: bool

    @property
    def u_values(self) -> tuple[float, ...]:
        return tuple(point.u for point in self.points)


@dataclasses.dataclass(frozen=True)
class CriticalPoint:
    """
    End point ``(beta1_c, beta2_c)`` of the phase transition curve.

    ``theta0`` is the unique zero of ``K'''K' + (p - 2)(K'')^2`` and
    ``u0 = K'(theta0)``.

    """

    beta1_c: float
    beta2_c: float
    u0: float
    theta0: float


class BoundingCurves(NamedTuple):
    """Values of ``beta2`` between which ``L`` has two local maximizers."""

    upper: float
    lower: float


class PhaseSample(NamedTuple):
    """
    Point ``(beta1, r(beta1))`` of the transition curve.

    ``upper`` and ``lower`` are the bounding curves at ``beta1``; ``u1`` and
    ``u2`` are the coexisting maximizers on the curve.

    """

    beta1: float
    beta2: float
    upper: float
    lower: float
    u1: float
    u2: float


@dataclasses.dataclass(frozen=True)
class PhaseCurve:
    """Samples of the transition curve, ending at the critical point."""

    samples: tuple[PhaseSample, ...]
    critical: CriticalPoint

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)


# Scores


def score(dist: EdgeWeightDistribution, params: ModelParams, u: float) -> float:
    """
    Evaluate ``L(u) = beta1 u + beta2 u^p - I(u) / 2``.

    Raises:
        DomainError: If ``u`` isn't in ``(0, 1)``.
        BracketFailure: If the dual of ``u`` can't be found.

    """
    return params.beta1 * u + params.beta2 * u**params.p - rate(dist, u) / 2.0


def score_at_theta(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    theta: ArrayLike,
) -> float | FloatArray:
    """
    Evaluate ``L`` at ``u = K'(theta)``.

    The rate function is taken from the Legendre identity ``I(u) = theta u -
    K(theta)``, so this stays well defined when ``u`` rounds to 0 or 1.

    """
    k0, u, _, _ = cumulant_derivatives(dist, theta)
    return params.beta1 * u + params.beta2 * u**params.p - (theta * u - k0) / 2.0


def _stationarity(dist: EdgeWeightDistribution, params: ModelParams) -> Callable[..., float | FloatArray]:
    def g(theta: ArrayLike) -> float | FloatArray:
        u = cumulant_derivatives(dist, theta).k1
        return params.beta1 + params.p * params.beta2 * u ** (params.p - 1) - np.asarray(theta) / 2.0

    return g


def _scan_width(dist: EdgeWeightDistribution, params: ModelParams) -> float:
    width = (
        2.0 * abs(params.beta1)
        + 2.0 * params.p * abs(params.beta2)
        + DEFAULT_TOLERANCES.scan_margin
    )
    return min(width, theta_limit(dist))


def _stationary_scan(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    grid: int,
) -> list[tuple[DualPair, int]]:
    width = _scan_width(dist, params)
    g = _stationarity(dist, params)
    thetas = np.linspace(-width, width, grid)
    roots = sign_change_roots(g, thetas)
    if not roots:
        raise RangeExhausted(f"no stationary point of L in |theta| <= {width:g} for {params}")
    theta_values = np.array([theta for theta, _ in roots])
    us = np.atleast_1d(cumulant_derivatives(dist, theta_values).k1)
    return [
        (DualPair(float(u), theta), direction)
        for u, (theta, direction) in zip(us, roots)
    ]


def stationary_points(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    grid: int = DEFAULT_TOLERANCES.scan_grid,
) -> list[DualPair]:
    """
    Find all stationary points of ``L``, ordered by ``theta``.

    The roots of ``g`` are located by a sign scan over ``|theta| <=
    2|beta1| + 2p|beta2| + 50`` and refined with Brent's method. There are
    one or three of them.

    Raises:
        RangeExhausted: If ``g`` doesn't change sign on the scanned range.

    """
    return [pair for pair, _ in _stationary_scan(dist, params, grid)]


def maximizers(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    tie_tol: float = DEFAULT_TOLERANCES.tie_tol,
    grid: int = DEFAULT_TOLERANCES.scan_grid,
) -> MaximizerSet:
    """
    Find the global maximizers of ``L``.

    Stationary points where ``g`` crosses downward are local maxima; the best
    scores win and two of them within ``tie_tol`` put the parameters on the
    transition curve. ``beta2 < 0`` is accepted: ``L`` is then strictly
    concave and the maximizer is unique.

    Raises:
        InternalInconsistency: If a maximizer fails the stationarity check or
            the free energy disagrees with its dual expression.

    """
    if not params.attractive:
        logger.debug("beta2 = %g < 0: stationarity-only interpretation", params.beta2)
    g = _stationarity(dist, params)
    candidates = []
    for pair, direction in _stationary_scan(dist, params, grid):
        if direction > 0:
            continue
        residual = abs(g(pair.theta))
        if residual > DEFAULT_TOLERANCES.stationarity_tol:
            raise InternalInconsistency(
                f"stationarity residual {residual:.3g} at theta={pair.theta:g} for {params}"
            )
        candidates.append(Maximizer(pair, float(score_at_theta(dist, params, pair.theta))))

    psi = max(candidate.score for candidate in candidates)
    points = tuple(c for c in candidates if psi - c.score <= tie_tol)
    best = max(points, key=lambda point: point.score)
    _check_dual_form(dist, params, best, psi)
    logger.debug("%s, %s: psi=%.12g at u=%s", dist, params, psi, [pt.u for pt in points])
    return MaximizerSet(points, psi, len(points) > 1)


def _check_dual_form(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    best: Maximizer,
    psi: float,
) -> None:
    k0, u, _, _ = cumulant_derivatives(dist, best.theta)
    dual = (1 - params.p) * params.beta2 * u**params.p + k0 / 2.0
    if abs(dual - psi) > DEFAULT_TOLERANCES.psi_check_tol * max(1.0, abs(psi)):
        raise InternalInconsistency(
            f"free energy {psi!r} disagrees with its dual form {dual!r} for {params}"
        )


def psi_infinity(dist: EdgeWeightDistribution, params: ModelParams) -> float:
    """
    Compute the limiting free energy ``sup_u L(u)``.

    The value is cross-checked against ``(1 - p) beta2 K'(theta)^p +
    K(theta) / 2`` at the maximizing ``theta``.

    Raises:
        InternalInconsistency: If the two forms disagree.

    """
    return maximizers(dist, params).psi


# Curves m, n and f


def _n_theta(k1: float, k2: float, p: int) -> float:
    return 2.0 * p * (p - 1) * k2 * k1 ** (p - 2)


def _f_theta(theta: float, k1: float, k2: float, p: int) -> float:
    return k1 / (2.0 * (p - 1) * k2) - theta / 2.0


def m_of(dist: EdgeWeightDistribution, p: int, u: float) -> float:
    """Evaluate ``m(u) = I''(u) / (2 p (p - 1) u^(p-2))``."""
    theta = dual_of(dist, u).theta
    k2 = cumulant_derivatives(dist, theta).k2
    return 1.0 / (2.0 * p * (p - 1) * k2 * u ** (p - 2))


def n_of(dist: EdgeWeightDistribution, p: int, theta: float) -> float:
    """Evaluate ``n(theta) = 2 p (p - 1) K''(theta) K'(theta)^(p-2)``."""
    _, k1, k2, _ = cumulant_derivatives(dist, theta)
    return _n_theta(k1, k2, p)


def f_of(dist: EdgeWeightDistribution, p: int, u: float) -> float:
    """Evaluate ``f(u) = u I''(u) / (2 (p - 1)) - I'(u) / 2``."""
    theta = dual_of(dist, u).theta
    k2 = cumulant_derivatives(dist, theta).k2
    return u / (2.0 * (p - 1) * k2) - theta / 2.0


# Phase structure


@functools.lru_cache(maxsize=64)
def _critical_point(dist: EdgeWeightDistribution, p: int) -> CriticalPoint:
    zeros = assumption_zeros(dist, p)
    if len(zeros) != 1:
        raise AssumptionViolated(len(zeros), p)
    (theta0,) = zeros
    _, u0, k2, _ = cumulant_derivatives(dist, theta0)
    return CriticalPoint(
        beta1_c=-_f_theta(theta0, u0, k2, p),
        beta2_c=1.0 / _n_theta(u0, k2, p),
        u0=u0,
        theta0=theta0,
    )


def critical_point(dist: EdgeWeightDistribution, p: int) -> CriticalPoint:
    """
    Locate the critical point ``(-f(u0), m(u0))``.

    ``u0`` minimizes ``m``; in dual coordinates ``theta0`` maximizes ``n``,
    i.e. it's the zero of ``K'''K' + (p - 2)(K'')^2``.

    Raises:
        AssumptionViolated: If that function doesn't have exactly one zero.

    """
    if int(p) != p or p < 2:
        raise DomainError(f"p must be an integer >= 2, got {p}")
    return _critical_point(dist, int(p))


def _outward_root(
    f: Callable[[float], float],
    start: float,
    direction: float,
    limit: float,
) -> float:
    # f is negative at start and increases away from it.
    near, step = start, 1.0
    while True:
        far = start + direction * step
        if abs(far) >= limit:
            far = direction * limit
            if f(far) <= 0.0:
                raise RangeExhausted(f"no sign change within |theta| <= {limit:g}")
        if f(far) > 0.0:
            break
        near, step = far, 2.0 * step
    lo, hi = sorted((near, far))
    return brentq(f, lo, hi, xtol=1e-14, rtol=RTOL, maxiter=200)


def _bounding_thetas(dist: EdgeWeightDistribution, p: int, beta1: float) -> tuple[float, float]:
    critical = critical_point(dist, p)
    if not beta1 < critical.beta1_c:
        raise DomainError(
            f"beta1={beta1:g} must lie below the critical value {critical.beta1_c:g}"
        )

    def excess(theta: float) -> float:
        _, k1, k2, _ = cumulant_derivatives(dist, theta)
        return _f_theta(theta, k1, k2, p) + beta1

    limit = theta_limit(dist)
    theta_a = _outward_root(excess, critical.theta0, -1.0, limit)
    theta_b = _outward_root(excess, critical.theta0, 1.0, limit)
    return theta_a, theta_b


def bounding_curves(dist: EdgeWeightDistribution, p: int, beta1: float) -> BoundingCurves:
    """
    Evaluate ``(m(a(beta1)), m(b(beta1)))``.

    ``a < u0 < b`` solve ``f(u) = -beta1``. For ``beta2`` strictly between
    the two values, ``L`` has two local maximizers.

    Raises:
        DomainError: If ``beta1 >= beta1_c``.

    """
    theta_a, theta_b = _bounding_thetas(dist, p, beta1)
    return BoundingCurves(upper=1.0 / n_of(dist, p, theta_a), lower=1.0 / n_of(dist, p, theta_b))


def _transition_sample(dist: EdgeWeightDistribution, p: int, beta1: float) -> PhaseSample:
    critical = critical_point(dist, p)
    if not beta1 < critical.beta1_c - DEFAULT_TOLERANCES.transition_margin:
        raise DomainError(
            f"beta1={beta1:g} is within {DEFAULT_TOLERANCES.transition_margin:g} of "
            f"or above the critical value {critical.beta1_c:g}"
        )
    theta_a, theta_b = _bounding_thetas(dist, p, beta1)
    upper = 1.0 / n_of(dist, p, theta_a)
    lower = 1.0 / n_of(dist, p, theta_b)

    def local_maxima(beta2: float) -> tuple[float, float]:
        params = ModelParams(beta1, beta2, p)
        g = _stationarity(dist, params)
        width = _scan_width(dist, params)
        left = bracketed_root(g, -width, theta_a)
        right = bracketed_root(g, theta_b, width)
        return left, right

    def difference(beta2: float) -> float:
        params = ModelParams(beta1, beta2, p)
        left, right = local_maxima(beta2)
        return float(score_at_theta(dist, params, right) - score_at_theta(dist, params, left))

    # upper grows like exp(-2 beta1) for some distributions; the tie sits
    # much closer to lower, so the bracket is grown from there.
    d_lower = difference(lower)
    hi = min(upper, 2.0 * lower)
    d_hi = difference(hi)
    while d_hi <= 0.0 and hi < upper:
        hi = min(upper, lower + 2.0 * (hi - lower))
        d_hi = difference(hi)
    if not (d_lower <= 0.0 <= d_hi):
        raise TieNotBracketed(
            f"score difference {d_lower:.3g} .. {d_hi:.3g} on [{lower:g}, {hi:g}] "
            f"at beta1={beta1:g}"
        )
    beta2 = brentq(difference, lower, hi, xtol=1e-13, rtol=RTOL, maxiter=200)
    gap = abs(difference(beta2))
    if gap > DEFAULT_TOLERANCES.tie_tol:
        logger.warning("score gap %.3g at beta1=%g above the tie tolerance", gap, beta1)
    left, right = local_maxima(beta2)
    u1, u2 = cumulant_derivatives(dist, np.array([left, right])).k1
    return PhaseSample(beta1, beta2, upper, lower, float(u1), float(u2))


def transition_beta2(dist: EdgeWeightDistribution, p: int, beta1: float) -> float:
    """
    Compute ``r(beta1)``, where the two local maximizers of ``L`` tie.

    The score difference of the right and left local maximizers increases in
    ``beta2``; its zero between the bounding curves is the transition.

    Raises:
        DomainError: If ``beta1`` isn't below ``beta1_c`` by the margin.
        TieNotBracketed: If the difference doesn't change sign.

    """
    return _transition_sample(dist, p, beta1).beta2


def phase_curve(
    dist: EdgeWeightDistribution,
    p: int,
    beta1_min: float,
    step: float,
    workers: int = 1,
) -> PhaseCurve:
    """
    Sample the transition curve on ``[beta1_min, beta1_c)``.

    Samples are spaced by ``step`` and the critical point is appended. Up to
    ``workers`` samples are computed concurrently.

    Raises:
        DomainError: If ``beta1_min >= beta1_c`` or ``step <= 0``.
        InternalInconsistency: If the samples don't decrease strictly.

    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    critical = critical_point(dist, p)
    if not beta1_min < critical.beta1_c:
        raise DomainError(
            f"beta1_min={beta1_min:g} must lie below the critical value {critical.beta1_c:g}"
        )
    stop = critical.beta1_c - DEFAULT_TOLERANCES.transition_margin
    count = int(math.floor((stop - beta1_min) / step)) + 1
    beta1s = [beta1_min + k * step for k in range(count)]
    beta1s = [b for b in beta1s if b < stop]

    def sample(beta1: float) -> PhaseSample:
        return _transition_sample(dist, p, beta1)

    samples: Sequence[PhaseSample]
    if workers > 1 and len(beta1s) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            samples = list(executor.map(sample, beta1s))
    else:
        samples = [sample(beta1) for beta1 in beta1s]

    end = PhaseSample(
        critical.beta1_c,
        critical.beta2_c,
        critical.beta2_c,
        critical.beta2_c,
        critical.u0,
        critical.u0,
    )
    curve = (*samples, end)
    for before, after in zip(curve, curve[1:]):
        if not after.beta2 < before.beta2:
            raise InternalInconsistency(
                f"transition curve isn't decreasing between beta1={before.beta1:g} "
                f"and beta1={after.beta1:g}"
            )
    logger.info("%s, p=%d: %d transition samples", dist, p, len(samples))
    return PhaseCurve(curve, critical)
