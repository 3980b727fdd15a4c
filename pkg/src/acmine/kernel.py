"""Subspace-weighted norms, exponential-kernel reweighting and subspace fitness.

Edge weights for a subspace ``D`` are ``exp(-norm / (theta * std))`` where
``norm`` is the uniform-weight Euclidean norm of the attribute differences
restricted to ``D`` and ``std`` is the population standard deviation of that
norm over all edges. Dividing by ``std`` instead of z-scoring the norms gives
the same fitness, because fitness is a ratio of weight sums and the z-score
shift only multiplies every weight by a common constant.

Fitness of a community ``C`` is ``invol / vol`` where ``invol`` sums weights
over ordered pairs inside ``C`` (each internal edge twice) and ``vol`` sums the
weighted degrees of the members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import AttributeSchema, AttributedGraph, attribute_difference

ADD = "add"
REMOVE = "remove"

# norm_update may produce slightly negative radicands through cancellation
_NEG_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Subspace:
    """Set of attribute dimension indices with implied uniform weights ``1/|dims|``."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(sorted({int(d) for d in dims}))
        object.__setattr__(self, "dims", dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __contains__(self, dim) -> bool:
        return int(dim) in self.dims

    def __iter__(self):
        return iter(self.dims)

    def check(self, r: int) -> "Subspace":
        if not self.dims:
            raise ValueError("subspace must be non-empty")
        if self.dims[0] < 0 or self.dims[-1] >= r:
            raise ValueError(f"subspace {self.dims} out of range for r={r}")
        return self

    def weights(self, r: int) -> np.ndarray:
        w = np.zeros(r)
        w[list(self.dims)] = 1.0 / len(self.dims)
        return w

    def with_dim(self, dim: int) -> "Subspace":
        return Subspace(self.dims + (dim,))

    def without_dim(self, dim: int) -> "Subspace":
        return Subspace(d for d in self.dims if d != dim)

    def issuperset(self, other: "Subspace") -> bool:
        return set(other.dims) <= set(self.dims)

    def jaccard(self, other: "Subspace") -> float:
        a, b = set(self.dims), set(other.dims)
        return len(a & b) / len(a | b) if a | b else 1.0


@dataclass(frozen=True)
class KernelConfig:
    theta: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")


def subspace_norm(vec_a, vec_b, subspace: Subspace, schema: AttributeSchema) -> float:
    """Uniform-weight Euclidean norm of the difference of two vectors on ``subspace``."""
    total = 0.0
    for i in subspace.dims:
        diff = attribute_difference(schema, i, vec_a[i], vec_b[i])
        total += diff * diff
    return math.sqrt(total / len(subspace))


# a removal that should cancel to 0 leaves a residue of a few ulps of the
# operands, which sqrt would turn into a ~1e-8 norm; such residues are zeroed
_CANCEL_ULPS = 16.0
_EPS = float(np.finfo(float).eps)
_TINY = float(np.finfo(float).tiny)


def _remove_square(total, sq, size: int):
    """``total - sq`` with cancellation residue below rounding level set to 0."""
    out = total - sq
    tol = _CANCEL_ULPS * size * _EPS * np.maximum(total, sq)
    return np.where(np.abs(out) <= tol, 0.0, out)


def norm_update(old_norm, old_size: int, dim_diff, mode: str):
    """Norm after adding / removing one dimension, from the cached norm alone.

    Works on scalars and on numpy arrays of per-edge norms.
    """
    if mode == ADD:
        new_size = old_size + 1
        radicand = (old_size * np.square(old_norm) + np.square(dim_diff)) / new_size
    elif mode == REMOVE:
        if old_size < 2:
            raise ValueError("cannot remove a dimension from a 1-dimensional subspace")
        new_size = old_size - 1
        radicand = _remove_square(old_size * np.square(old_norm), np.square(dim_diff), old_size) / new_size
        if np.any(radicand < -_NEG_TOL):
            raise ArithmeticError("negative radicand in norm_update: stale norm cache")
        radicand = np.maximum(radicand, 0.0)
    else:
        raise ValueError(f"mode must be {ADD!r} or {REMOVE!r}")
    out = np.sqrt(radicand)
    return float(out) if np.ndim(out) == 0 else out


def norm_variance(norms: np.ndarray) -> float:
    """Population variance; exactly 0 when all norms coincide."""
    m = len(norms)
    if m == 0:
        return 0.0
    mean = norms.sum() / m
    dev = norms - mean
    var = float(np.dot(dev, dev)) / m
    # rounding in the mean leaves ~ulp-sized residue for constant input
    if var <= 1e-24 * max(mean * mean, 1.0) and norms.min() == norms.max():
        return 0.0
    return var


def kernel_weights(norms: np.ndarray, scale: float) -> np.ndarray:
    if scale == 0.0:
        return np.ones_like(norms)
    w = np.exp(-norms / scale)
    # keep weights strictly positive even when exp underflows
    return np.maximum(w, _TINY)


@dataclass(frozen=True, eq=False)
class WeightedView:
    """Edge weights of a graph under one subspace.

    Attributes
    ----------
    norms, weights : per-edge arrays aligned with ``graph.edges``
    sumsq : per-edge sum of squared differences over the subspace (``|D| * norm**2``)
    variance : population variance of ``norms``
    scale : ``theta * sqrt(variance)``; 0 means the degenerate all-ones weighting
    wd : weighted degree of every node
    """

    subspace: Subspace
    theta: float
    norms: np.ndarray
    variance: float
    scale: float
    weights: np.ndarray
    wd: np.ndarray
    sumsq: np.ndarray

    @property
    def total_weight(self) -> float:
        return float(self.wd.sum())


def _make_view(graph: AttributedGraph, subspace: Subspace, theta: float, sumsq: np.ndarray) -> WeightedView:
    norms = np.sqrt(sumsq / len(subspace))
    variance = norm_variance(norms)
    scale = theta * math.sqrt(variance)
    weights = kernel_weights(norms, scale)
    wd = np.bincount(graph.edges[:, 0], weights=weights, minlength=graph.n).astype(float)
    wd += np.bincount(graph.edges[:, 1], weights=weights, minlength=graph.n)
    for arr in (norms, weights, wd, sumsq):
        arr.setflags(write=False)
    return WeightedView(subspace, theta, norms, variance, scale, weights, wd, sumsq)


def reweigh(graph: AttributedGraph, subspace: Subspace, config: KernelConfig = KernelConfig()) -> WeightedView:
    """Weight every edge of ``graph`` under ``subspace`` from scratch."""
    subspace.check(graph.r)
    sumsq = graph.squared_differences()[list(subspace.dims)].sum(axis=0)
    return _make_view(graph, subspace, config.theta, sumsq)


def _step_sumsq(view: WeightedView, graph: AttributedGraph, dim: int, mode: str) -> np.ndarray:
    # |D| * norm**2 +/- diff**2, i.e. the norm_update radicand before dividing by |D*|
    sq = graph.squared_differences()[dim]
    if mode == ADD:
        return view.sumsq + sq
    return np.maximum(_remove_square(view.sumsq, sq, len(view.subspace)), 0.0)


def update_view(view: WeightedView, graph: AttributedGraph, dim: int, mode: str) -> WeightedView:
    """Add or remove one dimension, updating cached norms in O(m).

    The cache holds ``|D| * norm**2`` per edge rather than the norm itself;
    this is the same update as :func:`norm_update` but avoids the precision
    loss of squaring a square root when a removal leaves a near-zero norm.
    """
    dim = int(dim)
    if mode == ADD:
        if dim in view.subspace:
            raise ValueError(f"dimension {dim} already in subspace")
        if not 0 <= dim < graph.r:
            raise ValueError(f"dimension {dim} out of range")
        new_sub = view.subspace.with_dim(dim)
    elif mode == REMOVE:
        if dim not in view.subspace:
            raise ValueError(f"dimension {dim} not in subspace")
        if len(view.subspace) < 2:
            raise ValueError("cannot remove the last dimension of a subspace")
        new_sub = view.subspace.without_dim(dim)
    else:
        raise ValueError(f"mode must be {ADD!r} or {REMOVE!r}")
    return _make_view(graph, new_sub, view.theta, _step_sumsq(view, graph, dim, mode))


def scaled_view(view: WeightedView, k: float) -> WeightedView:
    """Copy of ``view`` with every edge weight multiplied by ``k``."""
    weights = view.weights * k
    wd = view.wd * k
    return WeightedView(view.subspace, view.theta, view.norms, view.variance, view.scale,
                        weights, wd, view.sumsq)


class CommunityState:
    """A node set with cached fitness sums under one weighted view.

    Besides ``invol`` and ``vol`` it keeps, for every node, the weight
    (``win``) and number (``nin``) of its edges into the community so that
    node moves and their fitness deltas cost O(degree).
    """

    def __init__(self, graph: AttributedGraph, view: WeightedView, members: Iterable[int]):
        self.graph = graph
        self.view = view
        self.members: set[int] = {int(v) for v in members}
        if not self.members:
            raise ValueError("community must be non-empty")
        if min(self.members) < 0 or max(self.members) >= graph.n:
            raise ValueError("community member outside the graph")
        self.inside = np.zeros(graph.n, dtype=bool)
        self.inside[list(self.members)] = True
        self.refresh()

    def refresh(self, view: WeightedView | None = None) -> None:
        """Recompute every cached sum from scratch, optionally under a new view."""
        if view is not None:
            self.view = view
        g, w = self.graph, self.view.weights
        u, v = g.edges[:, 0], g.edges[:, 1]
        iu, iv = self.inside[u], self.inside[v]
        n = g.n
        # bincount returns ints for empty input, hence the explicit float cast
        self.win = (np.bincount(u[iv], weights=w[iv], minlength=n)
                    + np.bincount(v[iu], weights=w[iu], minlength=n)).astype(float)
        self.nin = np.bincount(u[iv], minlength=n) + np.bincount(v[iu], minlength=n)
        self.invol = 2.0 * float(w[iu & iv].sum())
        self.vol = float(self.view.wd[self.inside].sum())

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return bool(self.inside[int(v)])

    @property
    def fitness(self) -> float:
        return self.invol / self.vol if self.vol > 0 else 0.0

    def internal_degree(self, v: int) -> float:
        """Weight of the edges from ``v`` into the community, computed from adjacency."""
        nbrs = self.graph.adjacent(v)
        return float(self.view.weights[self.graph.incident(v)][self.inside[nbrs]].sum())

    def move(self, v: int, mode: str) -> None:
        v = int(v)
        g = self.graph
        nbrs, eids = g.adjacent(v), g.incident(v)
        w = self.view.weights[eids]
        if mode == ADD:
            if self.inside[v]:
                raise ValueError(f"node {v} already in community")
            self.invol += 2.0 * self.win[v]
            self.vol += self.view.wd[v]
            self.inside[v] = True
            self.members.add(v)
            np.add.at(self.win, nbrs, w)
            np.add.at(self.nin, nbrs, 1)
        elif mode == REMOVE:
            if not self.inside[v]:
                raise ValueError(f"node {v} not in community")
            if len(self.members) < 2:
                raise ValueError("cannot remove the last member")
            self.invol -= 2.0 * self.win[v]
            self.vol -= self.view.wd[v]
            self.inside[v] = False
            self.members.discard(v)
            np.subtract.at(self.win, nbrs, w)
            np.subtract.at(self.nin, nbrs, 1)
        else:
            raise ValueError(f"mode must be {ADD!r} or {REMOVE!r}")

    def copy(self) -> "CommunityState":
        new = object.__new__(CommunityState)
        new.graph, new.view = self.graph, self.view
        new.members = set(self.members)
        new.inside = self.inside.copy()
        new.win, new.nin = self.win.copy(), self.nin.copy()
        new.invol, new.vol = self.invol, self.vol
        return new


def fitness_from_sums(invol, vol):
    """``invol / vol`` with the convention that zero volume gives fitness 0."""
    invol = np.asarray(invol, dtype=float)
    vol = np.asarray(vol, dtype=float)
    safe = np.where(vol > 0, vol, 1.0)
    out = np.where(vol > 0, invol / safe, 0.0)
    return float(out) if out.ndim == 0 else out


def subspace_fitness(view: WeightedView, community: CommunityState) -> float:
    if len(community) == 0:
        raise ValueError("empty community")
    if community.view is not view:
        community = CommunityState(community.graph, view, community.members)
    return community.fitness


def fitness_delta_node(view: WeightedView, community: CommunityState, node: int, mode: str) -> float:
    """Fitness change of adding / removing ``node``, in O(deg(node)).

    Each internal edge is counted twice in ``invol``, so a move changes it by
    twice the node's internal weighted degree.
    """
    if community.view is not view:
        community = CommunityState(community.graph, view, community.members)
    node = int(node)
    g = community.graph
    if mode == ADD:
        if node in community:
            raise ValueError(f"node {node} already in community")
        if not community.inside[g.adjacent(node)].any():
            raise ValueError(f"node {node} has no neighbour in the community")
        sign = 1.0
    elif mode == REMOVE:
        if node not in community:
            raise ValueError(f"node {node} not in community")
        if len(community) < 2:
            raise ValueError("cannot remove the last member")
        sign = -1.0
    else:
        raise ValueError(f"mode must be {ADD!r} or {REMOVE!r}")
    wd_in = community.internal_degree(node)
    invol = community.invol + sign * 2.0 * wd_in
    vol = community.vol + sign * float(view.wd[node])
    return fitness_from_sums(invol, vol) - community.fitness


def candidate_fitness(
    graph: AttributedGraph,
    view: WeightedView,
    inside: np.ndarray,
    local_edges: np.ndarray,
    dim: int,
    mode: str,
    scale: float,
) -> float:
    """Fitness of a fixed community under the subspace ``view.subspace`` +/- ``dim``.

    Only the edges touching the community (``local_edges``) are reweighted;
    ``scale`` is the candidate subspace's kernel scale, which depends on all
    edges and is supplied by the caller.
    """
    k = len(view.subspace) + (1 if mode == ADD else -1)
    sq = graph.squared_differences()[dim, local_edges]
    sumsq = view.sumsq[local_edges]
    sumsq = sumsq + sq if mode == ADD else np.maximum(_remove_square(sumsq, sq, len(view.subspace)), 0.0)
    w = kernel_weights(np.sqrt(sumsq / k), scale)
    both = inside[graph.edges[local_edges, 0]] & inside[graph.edges[local_edges, 1]]
    internal = float(w[both].sum())
    vol = float(w.sum()) + internal
    return fitness_from_sums(2.0 * internal, vol)


def candidate_scale(graph: AttributedGraph, view: WeightedView, dim: int, mode: str) -> float:
    """Kernel scale of ``view.subspace`` +/- ``dim`` (an O(m) pass over all edges).

    Matches the scale of ``update_view(view, graph, dim, mode)`` bit for bit.
    """
    k = len(view.subspace) + (1 if mode == ADD else -1)
    if k < 1:
        raise ValueError("cannot remove a dimension from a 1-dimensional subspace")
    norms = np.sqrt(_step_sumsq(view, graph, dim, mode) / k)
    return view.theta * math.sqrt(norm_variance(norms))
