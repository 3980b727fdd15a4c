"""LFR-style attributed benchmarks with planted communities and planted subspaces."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .graph import (
    BINARY,
    CATEGORICAL,
    KINDS,
    NUMERICAL,
    AttributeSchema,
    AttributedGraph,
    Dimension,
    from_arrays,
)
from .kernel import Subspace

logger = logging.getLogger(__name__)


class InfeasibleParams(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkParams:
    n: int = 5000
    tau1: float = 2.0
    tau2: float = 1.0
    d_avg: float = 30.0
    d_max: int = 100
    c_min: int = 40
    c_max: int | None = None  # defaults to 2 * c_min
    mu: float = 0.2
    r: int = 20
    t: int = 6
    p: float = 0.9
    type: str = NUMERICAL
    rng_seed: int = 0
    # attribute sampling scheme
    delta: float = 0.05
    binary_background: float = 0.2
    categories: int = 10
    noise: str = "node"  # "node": one draw per member; "entry": per (member, dim) draw

    @property
    def cmax(self) -> int:
        return 2 * self.c_min if self.c_max is None else self.c_max

    def validate(self) -> "BenchmarkParams":
        errs = []
        if self.n < 2:
            errs.append("n must be at least 2")
        if not 1 <= self.c_min <= self.cmax <= self.n:
            errs.append(f"need 1 <= c_min <= c_max <= n (got {self.c_min}, {self.cmax}, {self.n})")
        if not 1 <= self.t <= self.r:
            errs.append(f"need 1 <= t <= r (got t={self.t}, r={self.r})")
        if not 1 <= self.d_avg <= self.d_max < self.n:
            errs.append(f"need 1 <= d_avg <= d_max < n (got {self.d_avg}, {self.d_max}, {self.n})")
        if not 0.0 <= self.mu < 1.0:
            errs.append("mu must lie in [0, 1)")
        if not 0.0 <= self.p <= 1.0:
            errs.append("p must lie in [0, 1]")
        if self.type not in KINDS:
            errs.append(f"type must be one of {KINDS}")
        if self.categories < 2:
            errs.append("categories must be at least 2")
        if errs:
            raise InfeasibleParams("; ".join(errs))
        d_min = solve_min_degree(self.tau1, self.d_avg, self.d_max)
        k_in = round((1.0 - self.mu) * max(1, round(d_min)))
        if k_in >= self.cmax:
            raise InfeasibleParams(
                f"c_max={self.cmax} cannot host even the smallest internal degree {k_in} "
                f"(d_min={d_min:.2f}, mu={self.mu})"
            )
        return self

    def to_json(self) -> dict:
        out = asdict(self)
        out["c_max"] = self.cmax
        return out


@dataclass
class GroundTruth:
    communities: list[frozenset[int]]
    subspaces: list[Subspace]

    def membership(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int64)
        for k, c in enumerate(self.communities):
            out[list(c)] = k
        return out


def _power_mean(lo: float, hi: float, tau: float) -> float:
    """Mean of the density proportional to x**-tau on [lo, hi]."""
    if hi <= lo:
        return lo

    def integral(k):  # integral of x**(k - tau)
        e = k + 1.0 - tau
        return math.log(hi / lo) if abs(e) < 1e-12 else (hi**e - lo**e) / e

    return integral(1) / integral(0)


def sample_power_law(rng: np.random.Generator, lo: float, hi: float, tau: float, size: int) -> np.ndarray:
    u = rng.random(size)
    if hi <= lo:
        return np.full(size, float(lo))
    if abs(tau - 1.0) < 1e-12:
        return lo * (hi / lo) ** u
    e = 1.0 - tau
    return (lo**e + u * (hi**e - lo**e)) ** (1.0 / e)


def solve_min_degree(tau: float, d_avg: float, d_max: float) -> float:
    """Lower cutoff of the degree power law whose mean equals ``d_avg``."""
    if d_avg >= d_max:
        return float(d_max)
    f = lambda x: _power_mean(x, d_max, tau) - d_avg  # noqa: E731
    if f(1.0) > 0:
        raise InfeasibleParams(f"d_avg={d_avg} is below the smallest attainable mean with d_max={d_max}")
    return brentq(f, 1.0, d_avg, xtol=1e-10)


def _community_sizes(rng, params: BenchmarkParams) -> list[int]:
    n, lo, hi = params.n, params.c_min, params.cmax
    sizes: list[int] = []
    while sum(sizes) < n:
        s = int(round(sample_power_law(rng, lo, hi, params.tau2, 1)[0]))
        sizes.append(min(max(s, lo), hi))
    # trim the last community first, then shave the largest ones
    excess = sum(sizes) - n
    cut = min(excess, sizes[-1] - lo)
    sizes[-1] -= cut
    excess -= cut
    while excess > 0:
        k = int(np.argmax(sizes))
        if sizes[k] > lo:
            sizes[k] -= 1
            excess -= 1
            continue
        # every community is at c_min: drop one and spread its nodes
        sizes.pop()
        deficit = n - sum(sizes)
        for k in range(len(sizes)):
            grow = min(deficit, hi - sizes[k])
            sizes[k] += grow
            deficit -= grow
        if deficit:
            raise InfeasibleParams("community sizes cannot cover n within [c_min, c_max]")
        excess = 0
    return sizes


def _assign(rng, degrees: np.ndarray, k_in: np.ndarray, sizes: list[int]) -> np.ndarray:
    """Assign nodes to communities, largest internal degree first."""
    n = len(degrees)
    sizes_arr = np.array(sizes)
    free = sizes_arr.copy()
    comm = np.full(n, -1, dtype=np.int64)
    order = np.argsort(-k_in, kind="stable")
    adjusted = 0
    for v in order.tolist():
        ok = (free > 0) & (sizes_arr > k_in[v])
        if not ok.any():
            # shrink the node so it fits the largest community with room
            ok = free > 0
            cap = int(sizes_arr[ok].max()) - 1
            k_in[v] = cap
            adjusted += 1
        cand = np.flatnonzero(ok)
        pick = int(rng.choice(cand, p=free[cand] / free[cand].sum()))
        comm[v] = pick
        free[pick] -= 1
    if adjusted:
        logger.info("capped the internal degree of %d node(s) to fit their community", adjusted)
    return comm


def _wire(rng, stubs: np.ndarray, taken: set, ok, budget: list[int]) -> tuple[list[tuple[int, int]], int]:
    """Configuration-model pairing of ``stubs`` followed by random edge swaps.

    Pairs that form a self-loop, a duplicate or fail ``ok`` are rewired by
    swapping endpoints with a random accepted edge while ``budget`` lasts;
    the rest are dropped.
    """
    stubs = rng.permutation(stubs)
    edges: list[tuple[int, int]] = []
    bad: list[tuple[int, int]] = []
    for a, b in stubs.reshape(-1, 2).tolist():
        key = (a, b) if a < b else (b, a)
        if a != b and key not in taken and ok(a, b):
            taken.add(key)
            edges.append(key)
        else:
            bad.append((a, b))
    while bad and edges and budget[0] > 0:
        budget[0] -= 1
        a, b = bad.pop()
        k = int(rng.integers(len(edges)))
        c, d = edges[k]
        if rng.random() < 0.5:
            c, d = d, c
        e1 = (a, c) if a < c else (c, a)
        e2 = (b, d) if b < d else (d, b)
        if (a != c and b != d and e1 != e2 and e1 not in taken and e2 not in taken
                and ok(a, c) and ok(b, d)):
            taken.discard(edges[k])
            edges[k] = e1
            edges.append(e2)
            taken.add(e1)
            taken.add(e2)
        else:
            bad.insert(0, (a, b))
    return edges, len(bad)


def _parity_fix(rng, members: np.ndarray, deg: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    """Move one random member's degree by +/-1 within [lo, hi]; False if impossible."""
    for v in rng.permutation(members).tolist():
        if deg[v] < hi[v]:
            deg[v] += 1
            return True
        if deg[v] > lo[v]:
            deg[v] -= 1
            return True
    return False


def generate_structure(params: BenchmarkParams):
    """Degree sequence, communities and wiring. Returns ``(edges, membership, sizes, rng)``."""
    params.validate()
    rng = np.random.default_rng(params.rng_seed)
    n = params.n
    d_min = solve_min_degree(params.tau1, params.d_avg, params.d_max)
    degrees = np.clip(np.rint(sample_power_law(rng, d_min, params.d_max, params.tau1, n)), 1, params.d_max)
    degrees = degrees.astype(np.int64)
    sizes = _community_sizes(rng, params)
    k_in = np.rint((1.0 - params.mu) * degrees).astype(np.int64)
    # capping k_in below shrinks the node rather than pushing stubs outside,
    # so the mixing fraction stays near mu
    k_out = degrees - k_in
    comm = _assign(rng, degrees, k_in, sizes)
    sizes_arr = np.bincount(comm, minlength=len(sizes))
    k_in = np.minimum(k_in, sizes_arr[comm] - 1)

    fixes = 0
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        if k_in[members].sum() % 2:
            fixes += _parity_fix(rng, members, k_in, np.zeros(n, int), sizes_arr[comm] - 1)
    if k_out.sum() % 2:
        fixes += _parity_fix(rng, np.arange(n), k_out, np.zeros(n, int), params.d_max - k_in)
    if fixes:
        logger.info("applied %d +/-1 degree adjustment(s) for stub parity", fixes)

    # rewiring budget: 10 attempts per target edge, spent pool by pool
    taken: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    dropped = 0
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        stubs = np.repeat(members, k_in[members])
        e, bad = _wire(rng, stubs, taken, lambda a, b: True, [5 * len(stubs)])
        edges += e
        dropped += bad
    stubs = np.repeat(np.arange(n), k_out)
    e, bad = _wire(rng, stubs, taken, lambda a, b: comm[a] != comm[b], [5 * len(stubs)])
    edges += e
    dropped += bad
    if dropped:
        logger.info("dropped %d stub pair(s) that could not be rewired", dropped)
    return np.array(sorted(edges), dtype=np.int64).reshape(-1, 2), comm, len(sizes), rng


def attach_attributes(rng: np.random.Generator, membership: np.ndarray, n_comms: int,
                      params: BenchmarkParams) -> tuple[np.ndarray, list[Subspace], AttributeSchema]:
    """Raw attribute matrix with a planted size-``t`` subspace per community.

    On its subspace each member gets, with probability ``p``, a value close to
    the community's own (numerical: within ``delta`` of a random center;
    binary: 1; categorical: the community's category) and background noise
    otherwise. All other dimensions are background noise.
    """
    n, r, t, p = len(membership), params.r, params.t, params.p
    kind = params.type
    if kind == NUMERICAL:
        values = rng.random((n, r))
    elif kind == BINARY:
        values = (rng.random((n, r)) < params.binary_background).astype(float)
    else:
        values = rng.integers(params.categories, size=(n, r)).astype(float)
    subspaces = []
    for c in range(n_comms):
        dims = np.sort(rng.choice(r, size=t, replace=False))
        subspaces.append(Subspace(dims.tolist()))
        members = np.flatnonzero(membership == c)
        if params.noise == "node":
            similar = np.repeat(rng.random((len(members), 1)) < p, t, axis=1)
        else:
            similar = rng.random((len(members), t)) < p
        if kind == NUMERICAL:
            center = rng.random(t)
            near = center + rng.uniform(-params.delta, params.delta, size=(len(members), t))
            planted = np.clip(near, 0.0, 1.0)
        elif kind == BINARY:
            planted = np.ones((len(members), t))
        else:
            planted = np.broadcast_to(rng.integers(params.categories, size=t).astype(float), (len(members), t))
        block = values[np.ix_(members, dims)]
        values[np.ix_(members, dims)] = np.where(similar, planted, block)
    if kind == CATEGORICAL:
        domain = tuple(f"c{k}" for k in range(params.categories))
        schema = AttributeSchema(tuple(Dimension(f"a{i}", kind, domain) for i in range(r)))
    else:
        schema = AttributeSchema(tuple(Dimension(f"a{i}", kind) for i in range(r)))
    return values, subspaces, schema


def generate(params: BenchmarkParams) -> tuple[AttributedGraph, GroundTruth]:
    edges, comm, n_comms, rng = generate_structure(params)
    values, subspaces, schema = attach_attributes(rng, comm, n_comms, params)
    graph = from_arrays(params.n, edges, values, schema, normalize=True)
    communities = [frozenset(np.flatnonzero(comm == c).tolist()) for c in range(n_comms)]
    return graph, GroundTruth(communities, subspaces)


def pick_concerned(ground_truth: GroundTruth, k: int, rng_seed: int = 0) -> Subspace:
    """``k`` random dimensions from the planted subspace of one random community."""
    if not ground_truth.communities:
        raise ValueError("empty ground truth")
    rng = np.random.default_rng(rng_seed)
    c = int(rng.integers(len(ground_truth.communities)))
    dims = ground_truth.subspaces[c].dims
    if not 1 <= k <= len(dims):
        raise ValueError(f"k={k} must lie in [1, {len(dims)}]")
    return Subspace(rng.choice(dims, size=k, replace=False).tolist())


def mixing(graph: AttributedGraph, ground_truth: GroundTruth) -> float:
    """Fraction of edges that join different planted communities."""
    if graph.m == 0:
        return 0.0
    comm = ground_truth.membership(graph.n)
    return float(np.mean(comm[graph.edges[:, 0]] != comm[graph.edges[:, 1]]))


def save_ground_truth(gt: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c, sub in zip(gt.communities, gt.subspaces):
            fh.write(" ".join(map(str, sorted(c))) + " | " + " ".join(map(str, sub.dims)) + "\n")


def load_ground_truth(path) -> GroundTruth:
    comms, subs = [], []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("|") != 1:
            raise ValueError(f"ground truth line {lineno}: expected 'members | dims'")
        left, right = line.split("|")
        try:
            comms.append(frozenset(int(x) for x in left.split()))
            subs.append(Subspace(int(x) for x in right.split()))
        except ValueError:
            raise ValueError(f"ground truth line {lineno}: non-integer id") from None
    return GroundTruth(comms, subs)
