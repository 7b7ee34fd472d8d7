"""
Finite graphs drawn from the model.

On ``n`` vertices with edge weights ``x_ij`` in ``[0, 1]`` the model has
density::

    exp(n^2 (beta1 t(edge, G) + beta2 t(H2, G) - psi_n))

with respect to independent draws from the edge-weight distribution, where
``t(H, G)`` is the homomorphism density of ``H`` in the weighted graph ``G``.
Loops carry no weight: the diagonal of the weight matrix is zero.

:func:`run_chain` samples it with single-edge Metropolis-Hastings dynamics:
a uniform pair of vertices gets a fresh weight drawn from the distribution,
accepted with probability ``min(1, exp(n^2 delta))``. Densities are kept up
to date in ``O(n)`` per step for two-stars and triangles.

"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import logging
import math
import string
from collections.abc import Iterable, Iterator
from typing import Optional

import networkx as nx
import numpy as np
from scipy.special import logsumexp

from .config import DEFAULT_TOLERANCES
from .distributions import EdgeWeightDistribution, sample_weights
from .exceptions import (
    DomainError,
    InvalidSpec,
    TooLarge,
    UnsupportedSubgraph,
)
from .typing import FloatArray, Seed
from .variational import ModelParams


__all__ = [
    "SubgraphKind",
    "SubgraphSpec",
    "parse_subgraph",
    "WeightedGraph",
    "hom_density",
    "constant_graph_density",
    "ChainState",
    "ChainTrace",
    "ExactModel",
    "energy_change",
    "mh_step",
    "mh_steps",
    "run_chain",
    "exact_small_model",
]


logger = logging.getLogger(__name__)


# Largest vertex count of a generic pattern handled by hom_density.
MAX_GENERIC_VERTICES = 4

# Random draws are made in batches of this size.
BATCH_SIZE = 4096


class SubgraphKind(enum.Enum):
    EDGE = "edge"
    TWO_STAR = "two_star"
    TRIANGLE = "triangle"
    GENERIC = "generic"


@dataclasses.dataclass(frozen=True)
class SubgraphSpec:
    """
    Simple connected graph ``H`` on the vertices ``0, ..., k - 1``.

    Use :meth:`edge`, :meth:`two_star`, :meth:`triangle`, :meth:`generic` or
    :func:`parse_subgraph` to build one.

    Raises:
        InvalidSpec: If the graph has loops, repeated edges, isolated
            vertices or several components.

    """

    kind: SubgraphKind
    vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertices))
        for u, v in self.edges:
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InvalidSpec(str(self), f"edge {u}-{v} has an unknown vertex")
            if u == v:
                raise InvalidSpec(str(self), f"loop at vertex {u}")
            if graph.has_edge(u, v):
                raise InvalidSpec(str(self), f"repeated edge {u}-{v}")
            graph.add_edge(u, v)
        if not self.edges or not nx.is_connected(graph):
            raise InvalidSpec(str(self), "subgraph must be connected")

    def __str__(self) -> str:
        if self.kind is SubgraphKind.GENERIC:
            return "generic:" + ",".join(f"{u}-{v}" for u, v in self.edges)
        return self.kind.value

    @property
    def p(self) -> int:
        """Number of edges."""
        return len(self.edges)

    @classmethod
    def edge(cls) -> SubgraphSpec:
        return cls(SubgraphKind.EDGE, 2, ((0, 1),))

    @classmethod
    def two_star(cls) -> SubgraphSpec:
        return cls(SubgraphKind.TWO_STAR, 3, ((0, 1), (0, 2)))

    @classmethod
    def triangle(cls) -> SubgraphSpec:
        return cls(SubgraphKind.TRIANGLE, 3, ((0, 1), (1, 2), (0, 2)))

    @classmethod
    def generic(cls, edges: Iterable[tuple[int, int]]) -> SubgraphSpec:
        """Build a pattern from its edge list; vertices are numbered from 0."""
        edges = tuple((int(u), int(v)) for u, v in edges)
        vertices = 1 + max((max(edge) for edge in edges), default=-1)
        return cls(SubgraphKind.GENERIC, vertices, edges)


def parse_subgraph(spec: str) -> SubgraphSpec:
    """
    Parse ``edge``, ``two_star``, ``triangle`` or ``generic:0-1,1-2,...``.

    Raises:
        InvalidSpec: If the string doesn't parse.

    """
    name, sep, body = spec.strip().partition(":")
    name = name.strip().lower().replace("-", "_")
    if name != "generic":
        if sep:
            raise InvalidSpec(spec, f"{name} takes no parameters")
        try:
            kind = SubgraphKind(name)
        except ValueError:
            raise InvalidSpec(spec, f"unknown subgraph {name!r}") from None
        return getattr(SubgraphSpec, kind.value)()
    edges = []
    for item in body.split(","):
        u, dash, v = item.strip().partition("-")
        if not dash or not u.isdigit() or not v.isdigit():
            raise InvalidSpec(spec, f"expected an edge like 0-1, got {item!r}")
        edges.append((int(u), int(v)))
    return SubgraphSpec.generic(edges)


@dataclasses.dataclass(eq=False)
class WeightedGraph:
    """
    Symmetric weight matrix with entries in ``[0, 1]`` and zero diagonal.

    Raises:
        DomainError: If the matrix violates any of these constraints.

    """

    weights: FloatArray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise DomainError(f"weights must be a square matrix, got shape {weights.shape}")
        if weights.shape[0] < 2:
            raise DomainError("a graph needs at least two vertices")
        if not np.array_equal(weights, weights.T):
            raise DomainError("weights must be symmetric")
        if np.any(np.diag(weights) != 0.0):
            raise DomainError("the diagonal must be zero")
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise DomainError("weights must lie in [0, 1]")
        self.weights = weights

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def random(
        cls,
        dist: EdgeWeightDistribution,
        n: int,
        rng: np.random.Generator,
    ) -> WeightedGraph:
        """Draw independent weights for every pair of vertices."""
        weights = np.zeros((n, n))
        upper = np.triu_indices(n, k=1)
        weights[upper] = sample_weights(dist, rng, len(upper[0]))
        return cls(weights + weights.T)

    @classmethod
    def constant(cls, u: float, n: int) -> WeightedGraph:
        """Weighted complete graph with every weight equal to ``u``."""
        return cls(u * (np.ones((n, n)) - np.eye(n)))


def hom_density(graph: WeightedGraph, h: SubgraphSpec) -> float:
    """
    Compute the homomorphism density ``t(H, G)``.

    This is the average, over all maps from the vertices of ``H`` to those of
    ``G``, of the product of the weights of the images of the edges of ``H``.
    Non-injective maps are included.

    Raises:
        UnsupportedSubgraph: For a generic pattern with more than four
            vertices.

    """
    w = graph.weights
    n = graph.n
    if h.kind is SubgraphKind.EDGE:
        return float(w.sum()) / n**2
    if h.kind is SubgraphKind.TWO_STAR:
        return float(np.sum(w.sum(axis=1) ** 2)) / n**3
    if h.kind is SubgraphKind.TRIANGLE:
        return float(np.sum((w @ w) * w)) / n**3
    if h.vertices > MAX_GENERIC_VERTICES:
        raise UnsupportedSubgraph(
            f"{h} has {h.vertices} vertices; at most {MAX_GENERIC_VERTICES} are supported"
        )
    letters = string.ascii_lowercase
    subscripts = ",".join(letters[u] + letters[v] for u, v in h.edges) + "->"
    total = np.einsum(subscripts, *([w] * h.p), optimize=True)
    return float(total) / n**h.vertices


def constant_graph_density(u: float, n: int, h: SubgraphSpec) -> float:
    """
    Compute ``t(H, G)`` for the complete graph on ``n`` vertices with all
    weights equal to ``u``.

    This is what a graph that concentrates on the constant ``u`` looks like
    at finite ``n``; it tends to ``u^p``.

    """
    return hom_density(WeightedGraph.constant(u, n), h)


# Markov chain


@dataclasses.dataclass(eq=False)
class ChainState:
    """
    State of a Metropolis-Hastings chain.

    The state owns its graph and updates it in place. Row sums and the
    totals behind ``t1`` and ``t2`` are cached and kept up to date
    incrementally.

    Raises:
        UnsupportedSubgraph: If ``h2`` isn't a two-star or a triangle.

    """

    graph: WeightedGraph
    h2: SubgraphSpec
    rng: np.random.Generator
    step: int = 0
    accepted: int = 0
    row_sums: FloatArray = dataclasses.field(init=False, repr=False)
    edge_total: float = dataclasses.field(init=False)
    h2_total: float = dataclasses.field(init=False)

    def __post_init__(self) -> None:
        if self.h2.kind not in (SubgraphKind.TWO_STAR, SubgraphKind.TRIANGLE):
            raise UnsupportedSubgraph(f"the chain supports two_star and triangle, not {self.h2}")
        self.refresh()

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def t1(self) -> float:
        """Edge density."""
        return self.edge_total / self.n**2

    @property
    def t2(self) -> float:
        """Density of ``h2``."""
        return self.h2_total / self.n**3

    def refresh(self) -> float:
        """
        Recompute the cached sums from scratch.

        Returns:
            Largest discrepancy between cached and recomputed densities.

        """
        w = self.graph.weights
        # Nothing is cached yet on the first call, from __post_init__.
        cached = (self.t1, self.t2) if hasattr(self, "edge_total") else None
        self.row_sums = w.sum(axis=1)
        self.edge_total = float(self.row_sums.sum())
        if self.h2.kind is SubgraphKind.TWO_STAR:
            self.h2_total = float(np.sum(self.row_sums**2))
        else:
            self.h2_total = float(np.sum((w @ w) * w))
        if cached is None:
            return 0.0
        return max(abs(cached[0] - self.t1), abs(cached[1] - self.t2))


def _h2_change(state: ChainState, i: int, j: int, delta: float) -> float:
    if state.h2.kind is SubgraphKind.TWO_STAR:
        return 2.0 * delta * (state.row_sums[i] + state.row_sums[j]) + 2.0 * delta * delta
    w = state.graph.weights
    return 6.0 * delta * float(w[i] @ w[j])


def energy_change(
    state: ChainState,
    params: ModelParams,
    i: int,
    j: int,
    y: float,
) -> float:
    """
    Compute ``n^2 (beta1 dt1 + beta2 dt2)`` for setting the weight of the pair
    ``(i, j)`` to ``y``.

    This is the log acceptance ratio of the proposal.

    """
    delta = y - state.graph.weights[i, j]
    d_edge = 2.0 * delta
    d_h2 = _h2_change(state, i, j, delta)
    return params.beta1 * d_edge + params.beta2 * d_h2 / state.n


def _check_params(state: ChainState, params: ModelParams) -> None:
    if params.p != state.h2.p:
        raise DomainError(f"p={params.p} doesn't match {state.h2} with {state.h2.p} edges")


def _attempt(
    state: ChainState,
    params: ModelParams,
    i: int,
    j: int,
    y: float,
    log_u: float,
) -> None:
    w = state.graph.weights
    delta = y - w[i, j]
    d_h2 = _h2_change(state, i, j, delta)
    state.step += 1
    if log_u < params.beta1 * 2.0 * delta + params.beta2 * d_h2 / state.n:
        w[i, j] = w[j, i] = y
        state.row_sums[i] += delta
        state.row_sums[j] += delta
        state.edge_total += 2.0 * delta
        state.h2_total += d_h2
        state.accepted += 1
    if state.step % DEFAULT_TOLERANCES.cache_refresh == 0:
        drift = state.refresh()
        if drift > 1e-9:
            logger.warning("cached densities drifted by %.3g at step %d", drift, state.step)


def _random_pair(rng: np.random.Generator, n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(n, size=size)
    j = rng.integers(n - 1, size=size)
    j = j + (j >= i)
    return i, j


def mh_step(
    state: ChainState,
    dist: EdgeWeightDistribution,
    params: ModelParams,
) -> ChainState:
    """
    Run one Metropolis-Hastings step and return the updated ``state``.

    Raises:
        DomainError: If ``params.p`` doesn't match the edge count of
            ``state.h2``.

    """
    return mh_steps(state, dist, params, 1, batch=1)


def mh_steps(
    state: ChainState,
    dist: EdgeWeightDistribution,
    params: ModelParams,
    count: int,
    batch: int = BATCH_SIZE,
) -> ChainState:
    """
    Run ``count`` Metropolis-Hastings steps.

    Pairs, proposals and acceptance thresholds are drawn in batches.

    """
    _check_params(state, params)
    rng = state.rng
    n = state.n
    remaining = count
    while remaining > 0:
        size = min(batch, remaining)
        i, j = _random_pair(rng, n, size)
        ys = sample_weights(dist, rng, size)
        log_us = np.log(rng.random(size))
        for a, b, y, log_u in zip(i.tolist(), j.tolist(), ys.tolist(), log_us.tolist()):
            _attempt(state, params, a, b, y, log_u)
        remaining -= size
    return state


@dataclasses.dataclass(frozen=True)
class ChainTrace:
    """
    Thinned observables of a chain.

    Attributes:
        n: Number of vertices.
        steps: Step counts after burn-in at which observables were recorded.
        t_edge: Edge density at each record.
        t_h2: Density of the second subgraph at each record.
        acceptance_rate: Fraction of accepted proposals after burn-in.

    """

    n: int
    steps: np.ndarray
    t_edge: FloatArray
    t_h2: FloatArray
    acceptance_rate: float

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[tuple[int, float, float]]:
        return zip(self.steps.tolist(), self.t_edge.tolist(), self.t_h2.tolist())

    @property
    def mean_t1(self) -> float:
        return float(np.mean(self.t_edge))

    @property
    def mean_t2(self) -> float:
        return float(np.mean(self.t_h2))

    @property
    def mean_edge_weight(self) -> float:
        """Average weight over pairs of distinct vertices, ``t1 n / (n - 1)``."""
        return self.mean_t1 * self.n / (self.n - 1)


def run_chain(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    h2: SubgraphSpec,
    n: int,
    steps: int,
    burn_in: Optional[int] = None,
    thin: Optional[int] = None,
    seed: Seed = None,
) -> ChainTrace:
    """
    Sample the model with a Metropolis-Hastings chain.

    The initial graph has independent weights drawn from ``dist``. Results
    are deterministic given an integer ``seed``.

    Args:
        dist: Edge-weight distribution.
        params: Parameters; ``params.p`` must match ``h2``.
        h2: Second subgraph, a two-star or a triangle.
        n: Number of vertices.
        steps: Steps recorded after burn-in.
        burn_in: Steps discarded first; defaults to 200 sweeps.
        thin: Steps between records; defaults to one sweep, i.e. the number
            of pairs of vertices.
        seed: Seed or generator.

    Raises:
        DomainError: On invalid sizes or a mismatched ``p``.
        UnsupportedSubgraph: If ``h2`` isn't a two-star or a triangle.

    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    sweep = n * (n - 1) // 2
    burn_in = 200 * sweep if burn_in is None else burn_in
    thin = sweep if thin is None else thin
    if steps < 1 or thin < 1 or burn_in < 0:
        raise DomainError(f"invalid chain lengths steps={steps}, burn_in={burn_in}, thin={thin}")
    if not params.attractive:
        logger.warning("beta2 = %g < 0: sampling the repulsive model", params.beta2)

    rng = np.random.default_rng(seed)
    state = ChainState(WeightedGraph.random(dist, n, rng), h2, rng)
    _check_params(state, params)
    mh_steps(state, dist, params, burn_in)
    state.refresh()
    start_step, start_accepted = state.step, state.accepted

    records = steps // thin
    recorded_steps = np.empty(records, dtype=np.int64)
    t_edge = np.empty(records)
    t_h2 = np.empty(records)
    for k in range(records):
        mh_steps(state, dist, params, thin)
        recorded_steps[k] = state.step - start_step
        t_edge[k] = state.t1
        t_h2[k] = state.t2
    tail = steps - records * thin
    if tail:
        mh_steps(state, dist, params, tail)

    attempted = state.step - start_step
    rate = (state.accepted - start_accepted) / attempted
    logger.info(
        "%s, %s, n=%d: %d records, acceptance %.3f, mean t1 %.4f",
        dist,
        params,
        n,
        records,
        rate,
        float(np.mean(t_edge)) if records else math.nan,
    )
    return ChainTrace(n, recorded_steps, t_edge, t_h2, rate)


# Exact enumeration


@dataclasses.dataclass(frozen=True)
class ExactModel:
    """
    Exact distribution of a small model.

    Attributes:
        psi_n: Free energy ``log(Z) / n^2``.
        pairs: Vertex pairs ``(i, j)``, ``i < j``, in the order used by
            ``states``.
        states: Weight of every pair, for each configuration.
        pmf: Probability of each configuration.

    """

    psi_n: float
    pairs: tuple[tuple[int, int], ...]
    states: tuple[tuple[float, ...], ...]
    pmf: FloatArray

    def probability(self, state: tuple[float, ...]) -> float:
        return float(self.pmf[self.states.index(tuple(state))])


MAX_EXACT_VERTICES = 3
MAX_EXACT_ATOMS = 4


def exact_small_model(
    dist: EdgeWeightDistribution,
    params: ModelParams,
    h2: SubgraphSpec,
    n: int,
) -> ExactModel:
    """
    Enumerate every weight configuration of a model with at most three
    vertices.

    Raises:
        TooLarge: If ``n > 3``, or ``dist`` isn't finitely supported on at most
            four atoms.
        DomainError: If ``n < 2`` or ``params.p`` doesn't match ``h2``.

    """
    if not dist.atoms or len(dist.atoms) > MAX_EXACT_ATOMS:
        raise TooLarge(f"exact enumeration needs at most {MAX_EXACT_ATOMS} atoms, not {dist}")
    if n > MAX_EXACT_VERTICES:
        raise TooLarge(f"exact enumeration needs n <= {MAX_EXACT_VERTICES}, got {n}")
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if params.p != h2.p:
        raise DomainError(f"p={params.p} doesn't match {h2} with {h2.p} edges")

    pairs = tuple(itertools.combinations(range(n), 2))
    states = tuple(itertools.product([x for x, _ in dist.atoms], repeat=len(pairs)))
    log_prob = dict((x, math.log(p)) for x, p in dist.atoms)
    edge = SubgraphSpec.edge()
    log_weights = np.empty(len(states))
    for index, state in enumerate(states):
        weights = np.zeros((n, n))
        for (i, j), x in zip(pairs, state):
            weights[i, j] = weights[j, i] = x
        graph = WeightedGraph(weights)
        energy = params.beta1 * hom_density(graph, edge) + params.beta2 * hom_density(graph, h2)
        log_weights[index] = n * n * energy + math.fsum(log_prob[x] for x in state)
    log_z = float(logsumexp(log_weights))
    return ExactModel(
        psi_n=log_z / n**2,
        pairs=pairs,
        states=states,
        pmf=np.exp(log_weights - log_z),
    )
