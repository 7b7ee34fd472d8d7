from __future__ import annotations

from .asymptotics import (
    DegeneracyReport,
    ErComparison,
    Region,
    degeneracy_report,
    er_comparison,
    psi_approx,
    region,
    standard_tables,
    theta_approx,
    u_approx_closed_form,
)
from .config import DEFAULT_TOLERANCES, RunConfig, Tolerances
from .distributions import (
    CumulantDerivatives,
    EdgeWeightDistribution,
    Kind,
    assumption_zero_count,
    assumption_zeros,
    bernoulli,
    beta,
    cumulant,
    cumulant_derivatives,
    discrete,
    parse_distribution,
    sample_weight,
    sample_weights,
    uniform,
)
from .exceptions import (
    AssumptionViolated,
    BracketFailure,
    DegenerateDistribution,
    DomainError,
    ErgPhaseError,
    InternalInconsistency,
    InvalidDistribution,
    InvalidSpec,
    NumericalError,
    OverflowGuard,
    RangeExhausted,
    TieNotBracketed,
    TooLarge,
    UnsupportedDistribution,
    UnsupportedSubgraph,
)
from .legendre import (
    BoundaryBehavior,
    DualPair,
    RateDerivatives,
    boundary_behavior,
    dual_of,
    rate,
    rate_derivatives,
)
from .sampler import (
    ChainState,
    ChainTrace,
    ExactModel,
    SubgraphKind,
    SubgraphSpec,
    WeightedGraph,
    constant_graph_density,
    exact_small_model,
    hom_density,
    mh_step,
    mh_steps,
    parse_subgraph,
    run_chain,
)
from .variational import (
    BoundingCurves,
    CriticalPoint,
    Maximizer,
    MaximizerSet,
    ModelParams,
    PhaseCurve,
    PhaseSample,
    bounding_curves,
    critical_point,
    f_of,
    m_of,
    maximizers,
    n_of,
    phase_curve,
    psi_infinity,
    score,
    score_at_theta,
    stationary_points,
    transition_beta2,
)
from .version import version as __version__  # noqa: F401


__all__ = [
    # .asymptotics
    "DegeneracyReport",
    "ErComparison",
    "Region",
    "degeneracy_report",
    "er_comparison",
    "psi_approx",
    "region",
    "standard_tables",
    "theta_approx",
    "u_approx_closed_form",
    # .config
    "DEFAULT_TOLERANCES",
    "RunConfig",
    "Tolerances",
    # .distributions
    "CumulantDerivatives",
    "EdgeWeightDistribution",
    "Kind",
    "assumption_zero_count",
    "assumption_zeros",
    "bernoulli",
    "beta",
    "cumulant",
    "cumulant_derivatives",
    "discrete",
    "parse_distribution",
    "sample_weight",
    "sample_weights",
    "uniform",
    # .exceptions
    "AssumptionViolated",
    "BracketFailure",
    "DegenerateDistribution",
    "DomainError",
    "ErgPhaseError",
    "InternalInconsistency",
    "InvalidDistribution",
    "InvalidSpec",
    "NumericalError",
    "OverflowGuard",
    "RangeExhausted",
    "TieNotBracketed",
    "TooLarge",
    "UnsupportedDistribution",
    "UnsupportedSubgraph",
    # .legendre
    "BoundaryBehavior",
    "DualPair",
    "RateDerivatives",
    "boundary_behavior",
    "dual_of",
    "rate",
    "rate_derivatives",
    # .sampler
    "ChainState",
    "ChainTrace",
    "ExactModel",
    "SubgraphKind",
    "SubgraphSpec",
    "WeightedGraph",
    "constant_graph_density",
    "exact_small_model",
    "hom_density",
    "mh_step",
    "mh_steps",
    "parse_subgraph",
    "run_chain",
    # .variational
    "BoundingCurves",
    "CriticalPoint",
    "Maximizer",
    "MaximizerSet",
    "ModelParams",
    "PhaseCurve",
    "PhaseSample",
    "bounding_curves",
    "critical_point",
    "f_of",
    "m_of",
    "maximizers",
    "n_of",
    "phase_curve",
    "psi_infinity",
    "score",
    "score_at_theta",
    "stationary_points",
    "transition_beta2",
]
