"""End-to-end mining of a diverse community organization for concerned attributes."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .graph import AttributedGraph
from .kernel import KernelConfig, Subspace
from .search import AdjustOutcome, SearchConfig, ViewCache, converge_pair
from .seeding import SeedingConfig, construct_seeds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiversityConfig:
    beta_c: float = 0.5
    beta_d: float = 0.5

    def __post_init__(self):
        for name in ("beta_c", "beta_d"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class OrganizationPair:
    community: frozenset[int]
    subspace: Subspace
    fitness: float

    def sort_key(self):
        return (-self.fitness, -len(self.community), sorted(self.community))


@dataclass
class MineStats:
    seeds: int = 0
    skipped_visited: int = 0
    discarded_concerned: int = 0
    capped: int = 0
    mined: int = 0
    kept: int = 0
    view_builds: int = 0


@dataclass
class Organization:
    pairs: list[OrganizationPair]
    provenance: dict = field(default_factory=dict)
    stats: MineStats = field(default_factory=MineStats)

    def __len__(self) -> int:
        return len(self.pairs)

    def communities(self) -> list[frozenset[int]]:
        return [p.community for p in self.pairs]


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def is_redundant(a: OrganizationPair, b: OrganizationPair, diversity: DiversityConfig = DiversityConfig()) -> bool:
    """Whether ``a`` is redundant with respect to ``b``."""
    return (
        a.fitness <= b.fitness
        and jaccard(a.community, b.community) >= diversity.beta_c
        and jaccard(a.subspace.dims, b.subspace.dims) >= diversity.beta_d
    )


def select_diverse(pairs, diversity: DiversityConfig = DiversityConfig()) -> Organization:
    """Keep pairs in descending fitness unless redundant w.r.t. one already kept."""
    kept: list[OrganizationPair] = []
    for p in sorted(pairs, key=OrganizationPair.sort_key):
        if not any(is_redundant(p, q, diversity) for q in kept):
            kept.append(p)
    return Organization(kept)


def _converge_worker(args):
    graph, seed, concerned, kernel, search = args
    return converge_pair(graph, seed, concerned, kernel, search)


def mine(
    graph: AttributedGraph,
    concerned: Subspace,
    diversity: DiversityConfig = DiversityConfig(),
    seeding: SeedingConfig = SeedingConfig(),
    kernel: KernelConfig = KernelConfig(),
    search: SearchConfig = SearchConfig(),
    workers: int = 0,
) -> Organization:
    """Mine the diverse organization of communities whose subspaces contain ``concerned``.

    Seeds are processed largest first; a seed whose nodes all belong to
    already accepted communities is skipped. With ``workers > 0`` seeds are
    converged in parallel processes and that skipping is disabled, leaving
    de-duplication to :func:`select_diverse`.
    """
    concerned.check(graph.r)
    stats = MineStats()
    provenance = {
        "concerned": list(concerned.dims),
        "diversity": asdict(diversity),
        "seeding": asdict(seeding),
        "kernel": asdict(kernel),
        "search": asdict(search),
        "parallel": workers > 0,
    }
    seeds = construct_seeds(graph, concerned, seeding)
    stats.seeds = len(seeds)
    if not seeds:
        logger.warning("no community seeds: the backbone is empty or too fragmented")
        return Organization([], provenance, stats)

    if workers > 0:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = [(graph, s, concerned, kernel, search) for s in seeds]
            outcomes: list[AdjustOutcome | None] = list(pool.map(_converge_worker, jobs))
    else:
        outcomes = []
        cache = ViewCache(graph, kernel, search.view_cache_size)
        visited: set[int] = set()
        for s in seeds:
            if s <= visited:
                stats.skipped_visited += 1
                outcomes.append(None)
                continue
            out = converge_pair(graph, s, concerned, kernel, search, cache)
            outcomes.append(out)
            if out.subspace.issuperset(concerned):
                visited |= out.community
        stats.view_builds = cache.builds

    pairs = []
    for out in outcomes:
        if out is None:
            continue
        stats.capped += out.capped
        if not out.subspace.issuperset(concerned):
            stats.discarded_concerned += 1
            continue
        pairs.append(OrganizationPair(out.community, out.subspace, out.fitness))
    stats.mined = len(pairs)
    org = select_diverse(pairs, diversity)
    stats.kept = len(org.pairs)
    org.provenance, org.stats = provenance, stats
    return org
