"""
:mod:`ergphase.exceptions` defines the following hierarchy of exceptions.

* :exc:`ErgPhaseError`
    * :exc:`InvalidDistribution`
        * :exc:`DegenerateDistribution`
        * :exc:`InvalidSpec`
    * :exc:`DomainError`
        * :exc:`UnsupportedDistribution`
        * :exc:`UnsupportedSubgraph`
        * :exc:`TooLarge`
    * :exc:`AssumptionViolated`
    * :exc:`NumericalError`
        * :exc:`OverflowGuard`
        * :exc:`BracketFailure`
        * :exc:`RangeExhausted`
        * :exc:`TieNotBracketed`
        * :exc:`InternalInconsistency`

Every class has a ``code`` attribute: a short reason code that the command
line interface prints on failure.

"""

from __future__ import annotations


__all__ = [
    "ErgPhaseError",
    "InvalidDistribution",
    "DegenerateDistribution",
    "InvalidSpec",
    "DomainError",
    "UnsupportedDistribution",
    "UnsupportedSubgraph",
    "TooLarge",
    "AssumptionViolated",
    "NumericalError",
    "OverflowGuard",
    "BracketFailure",
    "RangeExhausted",
    "TieNotBracketed",
    "InternalInconsistency",
]


class ErgPhaseError(Exception):
    """
    Base class for all exceptions defined by ergphase.

    """

    code = "error"


class InvalidDistribution(ErgPhaseError, ValueError):
    """
    Raised when an edge-weight distribution can't be constructed.

    """

    code = "invalid-distribution"


class DegenerateDistribution(InvalidDistribution):
    """
    Raised when an edge-weight distribution has zero variance.

    """

    code = "degenerate-distribution"


class InvalidSpec(InvalidDistribution):
    """
    Raised when a distribution, subgraph or configuration string doesn't parse.

    """

    code = "invalid-spec"

    def __init__(self, spec: str, msg: str) -> None:
        self.spec = spec
        self.msg = msg

    def __str__(self) -> str:
        return f"{self.spec!r} isn't valid: {self.msg}"


class DomainError(ErgPhaseError, ValueError):
    """
    Raised when an argument lies outside the domain of an operation.

    """

    code = "domain"


class UnsupportedDistribution(DomainError):
    """
    Raised when an operation has no formula for the given distribution.

    """

    code = "unsupported-distribution"


class UnsupportedSubgraph(DomainError):
    """
    Raised when a subgraph pattern isn't supported by an operation.

    """

    code = "unsupported-subgraph"


class TooLarge(DomainError):
    """
    Raised when exact enumeration is requested for a model that's too large.

    """

    code = "too-large"


class AssumptionViolated(ErgPhaseError):
    """
    Raised when ``K'''K' + (p-2)(K'')^2`` doesn't have exactly one zero.

    Attributes:
        count: Number of zeros found on the scanned range.
        p: Edge count of the subgraph.

    """

    code = "assumption-violated"

    def __init__(self, count: int, p: int) -> None:
        self.count = count
        self.p = p

    def __str__(self) -> str:
        return (
            f"expected exactly one zero of K'''K' + (p-2)(K'')^2 for p={self.p}, "
            f"found {self.count}"
        )


class NumericalError(ErgPhaseError):
    """
    Base class for failures of the numerical machinery.

    """

    code = "numerical"


class OverflowGuard(NumericalError):
    """
    Raised when a cumulant is requested beyond the overflow guard.

    """

    code = "overflow-guard"

    def __init__(self, theta: float, limit: float) -> None:
        self.theta = theta
        self.limit = limit

    def __str__(self) -> str:
        return f"|theta| = {abs(self.theta):g} exceeds the overflow guard {self.limit:g}"


class BracketFailure(NumericalError):
    """
    Raised when the dual of a mean weight can't be bracketed.

    This happens when the mean weight is numerically at a boundary that the
    distribution can't reach.

    """

    code = "bracket-failure"

    def __init__(self, target: float, msg: str) -> None:
        self.target = target
        self.msg = msg

    def __str__(self) -> str:
        return f"can't solve K'(theta) = {self.target!r}: {self.msg}"


class RangeExhausted(NumericalError):
    """
    Raised when a scan finds no sign change on its guarded range.

    """

    code = "range-exhausted"


class TieNotBracketed(NumericalError):
    """
    Raised when the score difference doesn't change sign between the
    bounding curves.

    """

    code = "tie-not-bracketed"


class InternalInconsistency(NumericalError):
    """
    Raised when two independent evaluations of the same quantity disagree.

    """

    code = "internal-inconsistency"
