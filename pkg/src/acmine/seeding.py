"""Community seeds from the backbone of edges that agree on the concerned attributes."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import AttributedGraph
from .kernel import Subspace

MAX_SWEEPS = 100


@dataclass(frozen=True)
class SeedingConfig:
    pi: float = 1.0
    min_seed_size: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if not self.pi > 0:
            raise ValueError("pi must be positive")
        if self.min_seed_size < 2:
            raise ValueError("min_seed_size must be at least 2")


def backbone_mask(graph: AttributedGraph, concerned: Subspace, pi: float) -> np.ndarray:
    """Boolean mask over ``graph.edges`` selecting the backbone edges.

    An edge survives when, on every concerned dimension, its difference is
    below ``pi`` percent of that dimension's mean difference over all edges.
    A dimension whose mean difference is 0 only admits zero differences.
    """
    concerned.check(graph.r)
    keep = np.ones(graph.m, dtype=bool)
    if graph.m == 0:
        return keep
    diffs = graph.edge_differences()
    for i in concerned.dims:
        avg = float(diffs[i].mean())
        if avg == 0.0:
            keep &= diffs[i] == 0.0
        else:
            keep &= diffs[i] < (pi / 100.0) * avg
    return keep


def build_backbone(graph: AttributedGraph, concerned: Subspace, config: SeedingConfig) -> np.ndarray:
    """Backbone edges as an ``(k, 2)`` array."""
    return graph.edges[backbone_mask(graph, concerned, config.pi)]


def label_propagation(backbone: np.ndarray, n: int, rng_seed: int = 0) -> dict[int, int]:
    """Asynchronous label propagation over the backbone edges.

    Every node starts with its own id as label. Each sweep visits the covered
    nodes in a freshly shuffled order and gives each the most frequent label
    among its neighbours, ties going to the smallest label. Stops after a
    sweep without changes or after ``MAX_SWEEPS`` sweeps. Nodes without
    backbone edges are left out of the result.
    """
    backbone = np.asarray(backbone, dtype=np.int64).reshape(-1, 2)
    if len(backbone) == 0:
        return {}
    adj: dict[int, list[int]] = defaultdict(list)
    for u, v in backbone.tolist():
        adj[u].append(v)
        adj[v].append(u)
    nodes = sorted(adj)
    labels = {v: v for v in nodes}
    rng = np.random.default_rng(rng_seed)
    for _ in range(MAX_SWEEPS):
        changed = False
        for v in rng.permutation(nodes).tolist():
            counts: dict[int, int] = {}
            for u in adj[v]:
                lab = labels[u]
                counts[lab] = counts.get(lab, 0) + 1
            top = max(counts.values())
            best = min(lab for lab, c in counts.items() if c == top)
            if best != labels[v]:
                labels[v] = best
                changed = True
        if not changed:
            break
    return labels


def extract_seeds(partition: dict[int, int], config: SeedingConfig) -> list[frozenset[int]]:
    """Label groups of at least ``min_seed_size`` nodes, largest first."""
    groups: dict[int, list[int]] = defaultdict(list)
    for node, lab in partition.items():
        groups[lab].append(node)
    seeds = [frozenset(g) for g in groups.values() if len(g) >= config.min_seed_size]
    seeds.sort(key=lambda s: (-len(s), min(s)))
    return seeds


def construct_seeds(graph: AttributedGraph, concerned: Subspace, config: SeedingConfig) -> list[frozenset[int]]:
    backbone = build_backbone(graph, concerned, config)
    return extract_seeds(label_propagation(backbone, graph.n, config.rng_seed), config)
