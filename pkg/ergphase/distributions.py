"""
Edge-weight distributions and their cumulant generating functions.

An :class:`EdgeWeightDistribution` is a non-degenerate law on ``[0, 1]``. Its
cumulant generating function ``K(theta) = log E[exp(theta X)]`` and the first
three derivatives are evaluated

- in closed form for :func:`bernoulli` and :func:`uniform`;
- as an exact finite sum for :func:`discrete` (and bernoulli, on request);
- by adaptive Gauss-Legendre quadrature for :func:`beta` (and uniform, on
  request).

Every path works in the log domain: the tilt ``exp(theta x)`` is factored at
the support endpoint that maximizes ``theta x``, so no intermediate exceeds
floating point range. Derivatives are the tilted mean, variance and third
central moment.

All evaluation functions accept a scalar or an array of ``theta`` and return
floats or arrays accordingly.

"""

from __future__ import annotations

import dataclasses
import enum
import functools
import logging
import math
from collections.abc import Iterable, Mapping
from typing import Callable, Literal, NamedTuple, Union

import numpy as np
from scipy.special import betaln, expit, logsumexp, roots_legendre

from .config import DEFAULT_TOLERANCES
from .exceptions import (
    DegenerateDistribution,
    DomainError,
    InvalidDistribution,
    InvalidSpec,
    OverflowGuard,
    UnsupportedDistribution,
)
from .typing import ArrayLike, FloatArray
from .utils import sign_change_roots


__all__ = [
    "Kind",
    "CumulantDerivatives",
    "EdgeWeightDistribution",
    "bernoulli",
    "uniform",
    "beta",
    "discrete",
    "parse_distribution",
    "cumulant",
    "cumulant_derivatives",
    "theta_limit",
    "sample_weight",
    "sample_weights",
    "assumption_zeros",
    "assumption_zero_count",
]


logger = logging.getLogger(__name__)


PROBABILITY_TOL = 1e-12

# Below this |theta| the uniform closed form loses digits to cancellation;
# the Taylor expansion is used instead.
_UNIFORM_SERIES_CUTOFF = 0.2

# Quadrature evaluates at most this many (theta, node) products at once.
_QUADRATURE_CHUNK = 1 << 21


class Kind(enum.Enum):
    """Family of an edge-weight distribution."""

    BERNOULLI = "bernoulli"
    UNIFORM = "uniform"
    BETA = "beta"
    DISCRETE = "discrete"


Method = Literal["auto", "closed", "numeric"]


Value = Union[float, FloatArray]


class CumulantDerivatives(NamedTuple):
    """
    ``K(theta)`` and its first three derivatives.

    Fields are floats for a scalar ``theta`` and arrays otherwise.

    """

    k0: Value
    k1: Value
    k2: Value
    k3: Value


@dataclasses.dataclass(frozen=True)
class EdgeWeightDistribution:
    """
    Non-degenerate probability distribution on ``[0, 1]``.

    Use the factories :func:`bernoulli`, :func:`uniform`, :func:`beta`,
    :func:`discrete` or :func:`parse_distribution` rather than the
    constructor.

    Attributes:
        kind: Family.
        params: ``(q,)`` for bernoulli, ``(a, b)`` for beta, empty otherwise.
        atoms: ``(x, p)`` pairs for discrete, sorted by ``x``; the two atoms
            of a bernoulli distribution; empty otherwise.
        quadrature_nodes: Initial Gauss-Legendre node count for density
            based evaluation.
        symmetric: Whether the distribution is symmetric about ``1/2``.
            Declared from the parameters, then verified against the moments.

    Raises:
        InvalidDistribution: If the parameters are out of range or the
            symmetry declaration is inconsistent with the moments.
        DegenerateDistribution: If the variance is zero.

    """

    kind: Kind
    params: tuple[float, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()
    quadrature_nodes: int = DEFAULT_TOLERANCES.quad_nodes
    symmetric: bool = False

    def __post_init__(self) -> None:
        if self.quadrature_nodes < 1:
            raise InvalidDistribution("quadrature_nodes must be positive")
        if self.kind is Kind.BERNOULLI:
            (q,) = self.params
            if not 0.0 <= q <= 1.0:
                raise InvalidDistribution(f"bernoulli q={q} isn't a probability")
        elif self.kind is Kind.BETA:
            a, b = self.params
            if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
                raise InvalidDistribution(f"beta shapes must be > 0, got a={a}, b={b}")
        if self.atoms:
            _check_atoms(self.atoms)
        if not self.variance > 0:
            raise DegenerateDistribution(f"{self} has zero variance")
        if self.symmetric:
            k3 = cumulant_derivatives(self, 0.0).k3
            if abs(self.mean - 0.5) > PROBABILITY_TOL or abs(k3) > 1e-10:
                raise InvalidDistribution(
                    f"{self} is declared symmetric but E X = {self.mean!r}, "
                    f"K'''(0) = {k3!r}"
                )

    def __str__(self) -> str:
        if self.kind is Kind.BERNOULLI:
            return f"bernoulli:q={self.params[0]:g}"
        if self.kind is Kind.UNIFORM:
            return "uniform"
        if self.kind is Kind.BETA:
            return f"beta:a={self.params[0]:g},b={self.params[1]:g}"
        return "discrete:" + ",".join(f"{x:g}={p:g}" for x, p in self.atoms)

    @property
    def mean(self) -> float:
        if self.kind is Kind.UNIFORM:
            return 0.5
        if self.kind is Kind.BETA:
            a, b = self.params
            return a / (a + b)
        return math.fsum(x * p for x, p in self.atoms)

    @property
    def variance(self) -> float:
        if self.kind is Kind.UNIFORM:
            return 1.0 / 12.0
        if self.kind is Kind.BETA:
            a, b = self.params
            return a * b / ((a + b) ** 2 * (a + b + 1.0))
        mean = self.mean
        return math.fsum(p * (x - mean) ** 2 for x, p in self.atoms)

    @property
    def support(self) -> tuple[float, float]:
        """Endpoints of the convex hull of the support."""
        if self.atoms:
            return self.atoms[0][0], self.atoms[-1][0]
        return 0.0, 1.0

    @property
    def has_density(self) -> bool:
        return self.kind in (Kind.UNIFORM, Kind.BETA)

    def log_density(self, x: FloatArray) -> FloatArray:
        """
        Log density on ``(0, 1)``.

        Raises:
            UnsupportedDistribution: For atomic distributions.

        """
        if self.kind is Kind.UNIFORM:
            return np.zeros_like(x)
        if self.kind is Kind.BETA:
            a, b = self.params
            return (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - betaln(a, b)
        raise UnsupportedDistribution(f"{self} has no density")


def _check_atoms(atoms: tuple[tuple[float, float], ...]) -> None:
    previous = -math.inf
    for x, p in atoms:
        if not 0.0 <= x <= 1.0:
            raise InvalidDistribution(f"atom {x} lies outside [0, 1]")
        if not 0.0 < p <= 1.0:
            raise InvalidDistribution(f"atom {x} has probability {p}")
        if x <= previous:
            raise InvalidDistribution("atoms must be distinct and sorted")
        previous = x
    total = math.fsum(p for _, p in atoms)
    if abs(total - 1.0) > PROBABILITY_TOL:
        raise InvalidDistribution(f"probabilities sum to {total!r}, not 1")


def bernoulli(q: float = 0.5, **kwargs: int) -> EdgeWeightDistribution:
    """Weight 1 with probability ``q``, 0 otherwise."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DegenerateDistribution(f"bernoulli q={q} is degenerate")
    return EdgeWeightDistribution(
        Kind.BERNOULLI,
        params=(q,),
        atoms=((0.0, 1.0 - q), (1.0, q)),
        symmetric=q == 0.5,
        **kwargs,
    )


def uniform(**kwargs: int) -> EdgeWeightDistribution:
    """Uniform weight on ``[0, 1]``."""
    return EdgeWeightDistribution(Kind.UNIFORM, symmetric=True, **kwargs)


def beta(a: float, b: float, **kwargs: int) -> EdgeWeightDistribution:
    """Beta(a, b) weight."""
    a, b = float(a), float(b)
    return EdgeWeightDistribution(Kind.BETA, params=(a, b), symmetric=a == b, **kwargs)


def discrete(
    atoms: Mapping[float, float] | Iterable[tuple[float, float]],
    **kwargs: int,
) -> EdgeWeightDistribution:
    """
    Finitely supported weight.

    Args:
        atoms: Mapping or pairs ``x -> p``. Atoms with ``p = 0`` are dropped.

    """
    items = atoms.items() if isinstance(atoms, Mapping) else atoms
    pairs = sorted((float(x), float(p)) for x, p in items)
    pairs = [(x, p) for x, p in pairs if p != 0.0]
    if len(pairs) < 2:
        raise DegenerateDistribution("a discrete distribution needs two atoms")
    symmetric = _atoms_symmetric(pairs)
    return EdgeWeightDistribution(
        Kind.DISCRETE, atoms=tuple(pairs), symmetric=symmetric, **kwargs
    )


def _atoms_symmetric(pairs: list[tuple[float, float]]) -> bool:
    mirrored = sorted((1.0 - x, p) for x, p in pairs)
    return all(
        abs(x - y) <= PROBABILITY_TOL and abs(p - q) <= PROBABILITY_TOL
        for (x, p), (y, q) in zip(pairs, mirrored)
    )


def _parse_float(spec: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidSpec(spec, f"{text!r} isn't a number") from None
    if not math.isfinite(value):
        raise InvalidSpec(spec, f"{text!r} isn't finite")
    return value


def _parse_pairs(spec: str, body: str) -> list[tuple[str, str]]:
    pairs = []
    for item in body.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise InvalidSpec(spec, f"expected key=value, got {item!r}")
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_distribution(spec: str) -> EdgeWeightDistribution:
    """
    Parse a distribution spec string.

    Accepted forms are ``bernoulli:q=0.5``, ``uniform``, ``beta:a=2,b=2`` and
    ``discrete:0=0.5,1=0.5`` (atom=probability pairs).

    Raises:
        InvalidSpec: If the string doesn't parse or has unknown keys.

    """
    name, sep, body = spec.strip().partition(":")
    name = name.strip().lower()
    if name == "uniform":
        if sep:
            raise InvalidSpec(spec, "uniform takes no parameters")
        return uniform()
    if not sep:
        raise InvalidSpec(spec, f"{name or 'distribution'} needs parameters")
    pairs = _parse_pairs(spec, body)
    try:
        if name == "discrete":
            atoms: dict[float, float] = {}
            for key, value in pairs:
                x = _parse_float(spec, key)
                if x in atoms:
                    raise InvalidSpec(spec, f"duplicate atom {key}")
                atoms[x] = _parse_float(spec, value)
            return discrete(atoms)
        expected = {"bernoulli": ("q",), "beta": ("a", "b")}.get(name)
        if expected is None:
            raise InvalidSpec(spec, f"unknown distribution {name!r}")
        values: dict[str, float] = {}
        for key, value in pairs:
            if key not in expected:
                raise InvalidSpec(spec, f"unknown key {key!r} for {name}")
            if key in values:
                raise InvalidSpec(spec, f"duplicate key {key!r}")
            values[key] = _parse_float(spec, value)
        missing = [key for key in expected if key not in values]
        if missing:
            raise InvalidSpec(spec, f"missing {', '.join(missing)}")
        if name == "bernoulli":
            return bernoulli(values["q"])
        return beta(values["a"], values["b"])
    except InvalidSpec:
        raise
    except InvalidDistribution as exc:
        raise InvalidSpec(spec, str(exc)) from None


# Cumulant generating function


def _atom_derivatives(dist: EdgeWeightDistribution, theta: FloatArray) -> tuple[FloatArray, ...]:
    xs = np.array([x for x, _ in dist.atoms])
    log_ps = np.log([p for _, p in dist.atoms])
    z = theta[:, None] * xs + log_ps
    k0 = logsumexp(z, axis=1)
    weights = np.exp(z - k0[:, None])
    k1 = weights @ xs
    centered = xs - k1[:, None]
    k2 = np.sum(weights * centered**2, axis=1)
    k3 = np.sum(weights * centered**3, axis=1)
    return k0, k1, k2, k3


def _bernoulli_closed(dist: EdgeWeightDistribution, theta: FloatArray) -> tuple[FloatArray, ...]:
    (q,) = dist.params
    z = theta + math.log(q) - math.log1p(-q)
    k0 = math.log1p(-q) + np.logaddexp(0.0, z)
    k1 = expit(z)
    k2 = k1 * expit(-z)
    k3 = -k2 * np.tanh(z / 2.0)
    return k0, k1, k2, k3


def _uniform_closed(theta: FloatArray) -> tuple[FloatArray, ...]:
    small = np.abs(theta) < _UNIFORM_SERIES_CUTOFF
    t = np.where(small, 1.0, theta)
    a = np.abs(t)
    s = np.exp(-a)
    rest = -np.expm1(-a)
    k0 = np.where(t > 0, t, 0.0) + np.log(rest) - np.log(a)
    k1 = np.where(t > 0, 1.0 / rest, -s / rest) - 1.0 / t
    k2 = 1.0 / t**2 - s / rest**2
    k3 = -2.0 / t**3 + np.sign(t) * s * (1.0 + s) / rest**3

    # Taylor expansion of log((e^t - 1) / t) = t/2 + log(sinh(t/2) / (t/2)).
    t = theta
    t2 = t * t
    s0 = t / 2 + t2 / 24 - t2**2 / 2880 + t2**3 / 181440 - t2**4 / 9676800 + t2**5 / 479001600
    s1 = 0.5 + t / 12 - t * t2 / 720 + t * t2**2 / 30240 - t * t2**3 / 1209600 + t * t2**4 / 47900160
    s2 = 1 / 12 - t2 / 240 + t2**2 / 6048 - t2**3 / 172800 + t2**4 / 5322240
    s3 = -t / 120 + t * t2 / 1512 - t * t2**2 / 28800 + t * t2**3 / 665280
    return (
        np.where(small, s0, k0),
        np.where(small, s1, k1),
        np.where(small, s2, k2),
        np.where(small, s3, k3),
    )


@functools.lru_cache(maxsize=32)
def _legendre_nodes(count: int) -> tuple[FloatArray, FloatArray]:
    x, w = roots_legendre(count)
    return (x + 1.0) / 2.0, w / 2.0


def _quadrature_pass(
    log_density: Callable[[FloatArray], FloatArray],
    theta: FloatArray,
    count: int,
) -> tuple[FloatArray, ...]:
    x, w = _legendre_nodes(count)
    log_weights = np.log(w) + log_density(x)
    chunk = max(1, _QUADRATURE_CHUNK // count)
    parts = []
    for start in range(0, theta.size, chunk):
        t = theta[start : start + chunk]
        # The endpoint maximizing theta * x is 1 for theta > 0 and 0 otherwise.
        anchor = np.where(t > 0, t, 0.0)
        z = t[:, None] * x - anchor[:, None] + log_weights
        log_mass = logsumexp(z, axis=1)
        weights = np.exp(z - log_mass[:, None])
        k1 = weights @ x
        centered = x - k1[:, None]
        k2 = np.sum(weights * centered**2, axis=1)
        k3 = np.sum(weights * centered**3, axis=1)
        parts.append((anchor + log_mass, k1, k2, k3))
    return tuple(np.concatenate([part[i] for part in parts]) for i in range(4))


def _quadrature(dist: EdgeWeightDistribution, theta: FloatArray) -> tuple[FloatArray, ...]:
    count = dist.quadrature_nodes
    previous = _quadrature_pass(dist.log_density, theta, count)
    while True:
        count *= 2
        current = _quadrature_pass(dist.log_density, theta, count)
        change = max(float(np.max(np.abs(c - p), initial=0.0)) for c, p in zip(current, previous))
        if change < DEFAULT_TOLERANCES.quad_tol:
            return current
        if count >= DEFAULT_TOLERANCES.quad_max_nodes:
            logger.warning(
                "quadrature for %s stopped at %d nodes with change %.3g",
                dist,
                count,
                change,
            )
            return current
        previous = current


def _derivative_arrays(
    dist: EdgeWeightDistribution,
    theta: FloatArray,
    method: Method,
) -> tuple[FloatArray, ...]:
    if method not in ("auto", "closed", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if dist.kind is Kind.BERNOULLI:
        if method == "numeric":
            return _atom_derivatives(dist, theta)
        return _bernoulli_closed(dist, theta)
    if dist.kind is Kind.UNIFORM:
        if method == "numeric":
            return _quadrature(dist, theta)
        return _uniform_closed(theta)
    if dist.kind is Kind.DISCRETE:
        return _atom_derivatives(dist, theta)
    if method == "closed":
        raise UnsupportedDistribution(f"{dist} has no closed form cumulant")
    return _quadrature(dist, theta)


def theta_limit(dist: EdgeWeightDistribution, method: Method = "auto") -> float:
    """
    Largest ``|theta|`` at which ``dist`` may be evaluated with ``method``.

    Quadrature and atom sums stop at the overflow guard. The closed forms are
    written in terms of ``exp(-|theta|)`` only and accept tilts up to the
    bracketing limit.

    """
    if dist.kind in (Kind.UNIFORM, Kind.BERNOULLI) and method != "numeric":
        return DEFAULT_TOLERANCES.bracket_limit
    return DEFAULT_TOLERANCES.overflow_guard


def cumulant_derivatives(
    dist: EdgeWeightDistribution,
    theta: ArrayLike,
    *,
    method: Method = "auto",
) -> CumulantDerivatives:
    """
    Evaluate ``K``, ``K'``, ``K''`` and ``K'''`` at ``theta``.

    Args:
        dist: Edge-weight distribution.
        theta: Scalar or array of tilts.
        method: ``"closed"`` forces the closed form (bernoulli, uniform),
            ``"numeric"`` forces the atom sum or quadrature, ``"auto"`` picks
            the closed form when there is one.

    Raises:
        OverflowGuard: If ``|theta|`` exceeds the overflow guard.
        DomainError: If ``theta`` isn't finite.
        UnsupportedDistribution: If ``method="closed"`` for a beta law.

    """
    values = np.asarray(theta, dtype=np.float64)
    flat = values.reshape(-1)
    if not np.all(np.isfinite(flat)):
        raise DomainError("theta must be finite")
    limit = theta_limit(dist, method)
    if flat.size and np.max(np.abs(flat)) > limit:
        raise OverflowGuard(float(flat[np.argmax(np.abs(flat))]), limit)
    k0, k1, k2, k3 = _derivative_arrays(dist, flat, method)
    k0 = np.where(flat == 0.0, 0.0, k0)
    if values.ndim == 0:
        return CumulantDerivatives(float(k0[0]), float(k1[0]), float(k2[0]), float(k3[0]))
    shape = values.shape
    return CumulantDerivatives(
        k0.reshape(shape), k1.reshape(shape), k2.reshape(shape), k3.reshape(shape)
    )


def cumulant(dist: EdgeWeightDistribution, theta: ArrayLike, *, method: Method = "auto") -> Value:
    """
    Evaluate ``K(theta) = log E[exp(theta X)]``.

    ``K(0) = 0`` exactly.

    Raises:
        OverflowGuard: If ``|theta|`` exceeds the overflow guard.

    """
    return cumulant_derivatives(dist, theta, method=method).k0


# Sampling


def sample_weights(
    dist: EdgeWeightDistribution,
    rng: np.random.Generator,
    size: int | tuple[int, ...],
) -> FloatArray:
    """Draw independent weights distributed according to ``dist``."""
    if dist.kind is Kind.UNIFORM:
        return rng.random(size)
    if dist.kind is Kind.BETA:
        a, b = dist.params
        return rng.beta(a, b, size)
    if dist.kind is Kind.BERNOULLI:
        return (rng.random(size) < dist.params[0]).astype(np.float64)
    xs = np.array([x for x, _ in dist.atoms])
    ps = np.array([p for _, p in dist.atoms])
    return rng.choice(xs, size=size, p=ps / ps.sum())


def sample_weight(dist: EdgeWeightDistribution, rng: np.random.Generator) -> float:
    """Draw one weight distributed according to ``dist``."""
    return float(sample_weights(dist, rng, 1)[0])


# Single-zero assumption


def _assumption_function(dist: EdgeWeightDistribution, p: int) -> Callable[[ArrayLike], Value]:
    def h(theta: ArrayLike) -> Value:
        _, k1, k2, k3 = cumulant_derivatives(dist, theta)
        return k3 * k1 + (p - 2) * k2 * k2

    return h


def assumption_zeros(
    dist: EdgeWeightDistribution,
    p: int,
    theta_lo: float = -DEFAULT_TOLERANCES.assumption_range,
    theta_hi: float = DEFAULT_TOLERANCES.assumption_range,
    grid: int = DEFAULT_TOLERANCES.assumption_grid,
) -> list[float]:
    """
    Locate the zeros of ``h(theta) = K'''(theta) K'(theta) + (p - 2) K''(theta)^2``.

    Sign changes of ``h`` on a uniform grid are refined with Brent's method.
    A grid node where ``h`` vanishes exactly counts as a zero when the signs
    on either side differ.

    """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if not theta_lo < theta_hi:
        raise DomainError("theta_lo must be smaller than theta_hi")
    if grid < 100:
        raise DomainError("the grid needs at least 100 points")
    h = _assumption_function(dist, p)
    thetas = np.linspace(theta_lo, theta_hi, grid)
    zeros = [root for root, _ in sign_change_roots(h, thetas)]
    logger.debug("%s, p=%d: %d assumption zero(s) at %s", dist, p, len(zeros), zeros)
    return zeros


def assumption_zero_count(
    dist: EdgeWeightDistribution,
    p: int,
    theta_lo: float = -DEFAULT_TOLERANCES.assumption_range,
    theta_hi: float = DEFAULT_TOLERANCES.assumption_range,
    grid: int = DEFAULT_TOLERANCES.assumption_grid,
) -> int:
    """
    Count the zeros of ``K'''K' + (p - 2)(K'')^2`` on ``[theta_lo, theta_hi]``.

    The count certifies the single-zero assumption behind the phase
    structure; it doesn't prove it beyond the scanned range.

    """
    return len(assumption_zeros(dist, p, theta_lo, theta_hi, grid))
