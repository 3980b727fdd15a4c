"""Greedy hill climbing over community members and subspace dimensions."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .graph import AttributedGraph
from .kernel import (
    ADD,
    REMOVE,
    CommunityState,
    KernelConfig,
    Subspace,
    WeightedView,
    candidate_fitness,
    candidate_scale,
    fitness_from_sums,
    reweigh,
    update_view,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    max_alternations: int = 50
    # gains at or below this are treated as float noise, not improvements
    min_gain: float = 1e-12
    view_cache_size: int = 64


class ViewCache:
    """Weighted views and kernel scales keyed by subspace.

    Views depend only on the subspace, so seeds that pass through the same
    subspace share them. Scales are tiny and kept without bound; views are
    evicted least-recently-used.
    """

    def __init__(self, graph: AttributedGraph, kernel: KernelConfig, max_views: int = 64):
        self.graph = graph
        self.kernel = kernel
        self.max_views = max_views
        self._views: OrderedDict[Subspace, WeightedView] = OrderedDict()
        self._scales: dict[Subspace, float] = {}
        self.builds = 0

    def _store(self, view: WeightedView) -> WeightedView:
        self._views[view.subspace] = view
        self._scales.setdefault(view.subspace, view.scale)
        while len(self._views) > self.max_views:
            self._views.popitem(last=False)
        return view

    def get(self, subspace: Subspace) -> WeightedView:
        view = self._views.get(subspace)
        if view is None:
            self.builds += 1
            return self._store(reweigh(self.graph, subspace, self.kernel))
        self._views.move_to_end(subspace)
        return view

    def step(self, view: WeightedView, dim: int, mode: str) -> WeightedView:
        """View for ``view.subspace`` +/- ``dim``, built incrementally when not cached."""
        sub = view.subspace.with_dim(dim) if mode == ADD else view.subspace.without_dim(dim)
        cached = self._views.get(sub)
        if cached is not None:
            self._views.move_to_end(sub)
            return cached
        self.builds += 1
        return self._store(update_view(view, self.graph, dim, mode))

    def scale(self, view: WeightedView, dim: int, mode: str) -> float:
        sub = view.subspace.with_dim(dim) if mode == ADD else view.subspace.without_dim(dim)
        s = self._scales.get(sub)
        if s is None:
            s = candidate_scale(self.graph, view, dim, mode)
            self._scales[sub] = s
        return s


@dataclass
class AdjustOutcome:
    community: frozenset[int]
    subspace: Subspace
    fitness: float
    iterations: int
    capped: bool = False
    trace: list[float] = field(default_factory=list, repr=False)


def adjust_community(view: WeightedView, community: CommunityState, min_gain: float = 1e-12,
                     trace: list[float] | None = None) -> CommunityState:
    """Apply the best single-node add/remove until none raises fitness.

    Removals are listed before additions and each group in ascending node
    id, so ``argmax`` breaks ties in that order. ``community`` is updated in
    place and returned.
    """
    if community.view is not view:
        community.refresh(view)
    wd = view.wd
    while True:
        members = np.flatnonzero(community.inside)
        frontier = np.flatnonzero((community.nin > 0) & ~community.inside)
        base = community.fitness
        invol, vol = community.invol, community.vol
        if len(members) >= 2:
            rem = fitness_from_sums(invol - 2.0 * community.win[members], vol - wd[members]) - base
        else:
            members, rem = members[:0], np.empty(0)
        add = fitness_from_sums(invol + 2.0 * community.win[frontier], vol + wd[frontier]) - base
        gains = np.concatenate([np.atleast_1d(rem), np.atleast_1d(add)])
        if len(gains) == 0:
            break
        best = int(np.argmax(gains))
        if not gains[best] > min_gain:
            break
        if best < len(members):
            community.move(int(members[best]), REMOVE)
        else:
            community.move(int(frontier[best - len(members)]), ADD)
        if trace is not None:
            trace.append(community.fitness)
    # drop accumulated rounding before handing the sums on
    community.refresh()
    return community


def _local_edges(graph: AttributedGraph, inside: np.ndarray) -> np.ndarray:
    members = np.flatnonzero(inside)
    parts = [graph.edge_ids[graph.indptr[v] : graph.indptr[v + 1]] for v in members]
    return np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)


def adjust_subspace(graph: AttributedGraph, view: WeightedView, community: CommunityState,
                    cache: ViewCache | None = None, min_gain: float = 1e-12,
                    trace: list[float] | None = None) -> tuple[Subspace, WeightedView]:
    """Apply the best single-dimension add/remove until none raises fitness.

    Candidates are scored by reweighting only the edges touching the
    community; the kernel scale of each candidate subspace needs every edge
    and is cached per subspace. Only the winning candidate's full view is
    materialized. On return ``community`` has been refreshed under the final
    view.
    """
    if cache is None:
        cache = ViewCache(graph, KernelConfig(view.theta))
    if community.view is not view:
        community.refresh(view)
    local = _local_edges(graph, community.inside)
    inside = community.inside
    r = graph.r
    while True:
        base = community.fitness
        actions: list[tuple[int, str]] = []
        if len(view.subspace) >= 2:
            actions += [(i, REMOVE) for i in view.subspace.dims]
        actions += [(i, ADD) for i in range(r) if i not in view.subspace]
        best_gain, best_action = min_gain, None
        for dim, mode in actions:
            scale = cache.scale(view, dim, mode)
            gain = candidate_fitness(graph, view, inside, local, dim, mode, scale) - base
            if gain > best_gain:
                best_gain, best_action = gain, (dim, mode)
        if best_action is None:
            break
        view = cache.step(view, *best_action)
        community.refresh(view)
        if trace is not None:
            trace.append(community.fitness)
    return view.subspace, view


def converge_pair(graph: AttributedGraph, seed, initial_subspace: Subspace,
                  kernel: KernelConfig = KernelConfig(), config: SearchConfig = SearchConfig(),
                  cache: ViewCache | None = None) -> AdjustOutcome:
    """Alternate community and subspace adjustment until neither changes."""
    if cache is None:
        cache = ViewCache(graph, kernel, config.view_cache_size)
    initial_subspace.check(graph.r)
    view = cache.get(initial_subspace)
    community = CommunityState(graph, view, seed)
    trace = [community.fitness]
    capped = True
    it = 0
    for it in range(1, config.max_alternations + 1):
        before = (frozenset(community.members), view.subspace)
        adjust_community(view, community, config.min_gain, trace)
        _, view = adjust_subspace(graph, view, community, cache, config.min_gain, trace)
        if (frozenset(community.members), view.subspace) == before:
            capped = False
            break
    if capped:
        logger.warning("converge_pair hit the %d-alternation cap", config.max_alternations)
    return AdjustOutcome(frozenset(community.members), view.subspace, community.fitness, it, capped, trace)
