"""
Behaviour of the model near degeneracy.

Far from the origin of the parameter plane the typical graph is either almost
empty or almost complete, depending on the side of the line ``beta1 =
-beta2``:

* in the sparse region, ``beta1 < -beta2``, the dual of the maximizer
  satisfies ``theta ~ 2 beta1`` whatever the edge-weight distribution, but
  ``u`` and ``psi`` depend on it;
* in the nearly complete region, ``beta1 > -beta2``, ``theta ~ 2 (beta1 + p
  beta2)`` and ``psi ~ beta1 + beta2``, both universally.

Here ``x ~ y`` means that ``x / y -> 1`` along rays going to infinity.

"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Optional

from scipy.special import logit

from .distributions import (
    EdgeWeightDistribution,
    Kind,
    bernoulli,
    cumulant_derivatives,
    parse_distribution,
)
from .exceptions import DomainError, UnsupportedDistribution
from .variational import ModelParams, maximizers


__all__ = [
    "Region",
    "ErComparison",
    "DegeneracyReport",
    "TABLE_ROWS",
    "region",
    "theta_approx",
    "u_approx_closed_form",
    "psi_approx",
    "er_comparison",
    "degeneracy_report",
    "standard_tables",
]


logger = logging.getLogger(__name__)


class Region(enum.Enum):
    """Side of the line ``beta1 = -beta2``."""

    SPARSE = "sparse"
    NEARLY_COMPLETE = "nearly_complete"


def region(params: ModelParams) -> Region:
    """
    Classify ``params`` as sparse or nearly complete.

    Raises:
        DomainError: On the dividing line ``beta1 = -beta2``.

    """
    if params.beta1 < -params.beta2:
        return Region.SPARSE
    if params.beta1 > -params.beta2:
        return Region.NEARLY_COMPLETE
    raise DomainError(f"{params} lies on the line beta1 = -beta2")


def theta_approx(params: ModelParams) -> float:
    """
    Approximate the dual of the maximizer.

    Returns ``2 beta1`` in the sparse region and ``2 (beta1 + p beta2)`` in the
    nearly complete region.

    Raises:
        DomainError: On the dividing line.

    """
    if region(params) is Region.SPARSE:
        return 2.0 * params.beta1
    return 2.0 * (params.beta1 + params.p * params.beta2)


def u_approx_closed_form(dist: EdgeWeightDistribution, params: ModelParams) -> float:
    """
    Approximate the maximizer for bernoulli(1/2) and uniform weights.

    With ``t = theta_approx(params)``:

    * bernoulli(1/2): ``exp(t)`` when sparse, ``1 - exp(-t)`` otherwise;
    * uniform: ``-1 / t`` when sparse, ``1 - 1 / t`` otherwise.

    Raises:
        UnsupportedDistribution: For any other distribution, since the
            maximizer isn't universal.
        DomainError: On the dividing line.

    """
    theta = theta_approx(params)
    sparse = region(params) is Region.SPARSE
    if dist.kind is Kind.BERNOULLI and dist.params == (0.5,):
        return math.exp(theta) if sparse else -math.expm1(-theta)
    if dist.kind is Kind.UNIFORM:
        return -1.0 / theta if sparse else 1.0 - 1.0 / theta
    raise UnsupportedDistribution(f"no closed form approximation of u for {dist}")


def psi_approx(dist: EdgeWeightDistribution, params: ModelParams) -> float:
    """
    Approximate the limiting free energy.

    In the sparse region this is ``(1 - p) beta2 K'(2 beta1)^p + K(2 beta1) /
    2``, which depends on the distribution; in the nearly complete region it's
    ``beta1 + beta2``.

    Raises:
        DomainError: On the dividing line.

    """
    if region(params) is Region.NEARLY_COMPLETE:
        return params.beta1 + params.beta2
    k0, k1, _, _ = cumulant_derivatives(dist, 2.0 * params.beta1)
    return (1 - params.p) * params.beta2 * k1**params.p + k0 / 2.0


@dataclasses.dataclass(frozen=True)
class ErComparison:
    """
    Free energies of the model and of the Erdős-Rényi graph with the same
    edge density, for bernoulli(1/2) weights.

    ``psi_exp`` and ``psi_er`` count graphs rather than weigh them with the
    uniform probability, so they exceed the probability normalisation by
    ``log(2) / 2``; ``psi_exp_probability`` is ``psi_exp`` in the normalisation
    of :func:`~ergphase.variational.psi_infinity`.

    Attributes:
        psi_exp: Free energy of the model.
        psi_er: Free energy of the Erdős-Rényi graph with edge probability
            ``u``.
        u: Edge density.
        beta_prime: Parameter of that Erdős-Rényi graph, with ``u =
            exp(2 beta') / (1 + exp(2 beta'))``.
        psi_exp_probability: ``psi_exp - log(2) / 2``.

    """

    psi_exp: float
    psi_er: float
    u: float
    beta_prime: float
    psi_exp_probability: float

    @property
    def gap(self) -> float:
        return self.psi_exp - self.psi_er


def er_comparison(params: ModelParams, u: Optional[float] = None) -> ErComparison:
    """
    Compare the model with the Erdős-Rényi graph that has the same density.

    The free energies don't coincide unless ``beta2 = 0``: their difference is
    ``(1 - p) beta2 u^p``.

    Args:
        params: Attractive parameters.
        u: Edge density; defaults to the maximizer of the bernoulli(1/2)
            model (the larger one, on the transition curve).

    Raises:
        DomainError: If ``beta2 < 0`` or ``u`` isn't in ``(0, 1)``.

    """
    if not params.attractive:
        raise DomainError(f"the comparison needs beta2 >= 0, got {params.beta2}")
    if u is None:
        found = maximizers(bernoulli(0.5), params)
        u = max(point.u for point in found.points)
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u!r}")
    psi_er = -math.log1p(-u) / 2.0
    psi_exp = (1 - params.p) * params.beta2 * u**params.p + psi_er
    return ErComparison(
        psi_exp=psi_exp,
        psi_er=psi_er,
        u=u,
        beta_prime=float(logit(u)) / 2.0,
        psi_exp_probability=psi_exp - math.log(2.0) / 2.0,
    )


def _relative_error(approx: float, exact: float) -> float:
    if exact == 0.0:
        return abs(approx)
    return abs(approx - exact) / abs(exact)


@dataclasses.dataclass(frozen=True)
class DegeneracyReport:
    """
    Exact and approximate maximizer and free energy at one parameter point.

    ``u_approx`` is :obj:`None` for distributions without a closed form
    approximation.

    """

    dist: EdgeWeightDistribution
    params: ModelParams
    theta_opt: float
    u_opt: float
    theta_approx: float
    u_approx: Optional[float]
    psi_exact: float
    psi_approx: float
    region: Region

    @property
    def theta_error(self) -> float:
        """Relative error of ``theta_approx``."""
        return _relative_error(self.theta_approx, self.theta_opt)

    @property
    def u_error(self) -> Optional[float]:
        """Relative error of ``u_approx``."""
        if self.u_approx is None:
            return None
        return _relative_error(self.u_approx, self.u_opt)

    @property
    def psi_error(self) -> float:
        """Relative error of ``psi_approx``."""
        return _relative_error(self.psi_approx, self.psi_exact)

    def as_row(self) -> list[str]:
        """
        Render the report with the precision of published tables: two
        decimals for ``theta``, three for ``u``.

        """
        return [
            f"{self.params.beta1:g}",
            f"{self.params.beta2:g}",
            f"{self.theta_opt:.2f}",
            f"{self.u_opt:.3f}",
            f"{self.theta_approx:.2f}",
            "" if self.u_approx is None else f"{self.u_approx:.3f}",
            f"{self.psi_exact:.6f}",
            f"{self.psi_approx:.6f}",
            self.region.value,
        ]


def degeneracy_report(dist: EdgeWeightDistribution, params: ModelParams) -> DegeneracyReport:
    """
    Compare the exact maximizer and free energy with their approximations.

    Raises:
        DomainError: On the dividing line.

    """
    where = region(params)
    found = maximizers(dist, params)
    best = max(found.points, key=lambda point: point.score)
    try:
        u_approx: Optional[float] = u_approx_closed_form(dist, params)
    except UnsupportedDistribution:
        u_approx = None
    report = DegeneracyReport(
        dist=dist,
        params=params,
        theta_opt=best.theta,
        u_opt=best.u,
        theta_approx=theta_approx(params),
        u_approx=u_approx,
        psi_exact=found.psi,
        psi_approx=psi_approx(dist, params),
        region=where,
    )
    logger.debug(
        "%s, %s: theta %.4g vs %.4g, psi %.6g vs %.6g",
        dist,
        params,
        report.theta_opt,
        report.theta_approx,
        report.psi_exact,
        report.psi_approx,
    )
    return report


# Published near-degeneracy comparisons: distribution, beta1, beta2 at p = 2.
TABLE_ROWS: tuple[tuple[str, float, float], ...] = (
    ("bernoulli:q=0.5", -2.0, -4.0),
    ("bernoulli:q=0.5", 1.0, 1.0),
    ("uniform", -4.0, -6.0),
    ("uniform", 3.0, 2.0),
)


def standard_tables() -> list[DegeneracyReport]:
    """Compute the reports of :data:`TABLE_ROWS`."""
    return [
        degeneracy_report(parse_distribution(spec), ModelParams(beta1, beta2, 2))
        for spec, beta1, beta2 in TABLE_ROWS
    ]
