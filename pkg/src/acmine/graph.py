"""Attributed graph model, attribute schema and plain-text I/O.

Files
-----
edges  : ``u v`` per line, 0-based ids, ``#`` starts a comment.
nodes  : ``id<TAB>v1<TAB>...<TAB>vr`` per line, values ordered as in the schema.
schema : JSON ``{"dims": [{"name": ..., "kind": ..., "domain": [...]}, ...]}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NUMERICAL = "numerical"
BINARY = "binary"
CATEGORICAL = "categorical"
KINDS = (NUMERICAL, BINARY, CATEGORICAL)


class GraphFormatError(ValueError):
    """Raised when an input file or an in-memory graph violates the data model."""


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str
    # categorical: allowed values; numerical: observed (min, max) before normalization
    domain: tuple = ()


@dataclass(frozen=True)
class AttributeSchema:
    dims: tuple[Dimension, ...]
    binary_absence_similar: bool = False

    def __post_init__(self):
        if len(self.dims) < 1:
            raise GraphFormatError("schema needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise GraphFormatError(f"duplicate dimension names in {names}")
        for d in self.dims:
            if d.kind not in KINDS:
                raise GraphFormatError(f"dimension {d.name!r}: unknown kind {d.kind!r}")
            if d.kind == CATEGORICAL and len(d.domain) == 0:
                raise GraphFormatError(f"dimension {d.name!r}: empty categorical domain")

    @property
    def r(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    def index(self, name_or_index) -> int:
        """Resolve a dimension name (or a stringified index) to its index."""
        if isinstance(name_or_index, (int, np.integer)):
            i = int(name_or_index)
        else:
            key = str(name_or_index)
            names = self.names
            if key in names:
                return names.index(key)
            if not key.lstrip("-").isdigit():
                raise KeyError(key)
            i = int(key)
        if not 0 <= i < self.r:
            raise KeyError(name_or_index)
        return i

    def to_json(self) -> dict:
        return {
            "binary_absence_similar": self.binary_absence_similar,
            "dims": [
                {"name": d.name, "kind": d.kind, "domain": list(d.domain)} for d in self.dims
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AttributeSchema":
        try:
            dims = tuple(
                Dimension(str(d["name"]), str(d["kind"]), tuple(d.get("domain", ())))
                for d in obj["dims"]
            )
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(f"malformed schema: {exc}") from exc
        return cls(dims, bool(obj.get("binary_absence_similar", False)))


def attribute_difference(schema: AttributeSchema, dim: int, a, b) -> float:
    """Difference in [0, 1] between two (normalized / encoded) values of one dimension.

    Numerical values are compared as ``|a - b|``, categorical ones as
    ``0 if a == b else 1``. A binary pair differs by 0 only when both nodes
    have the attribute (``a == b == 1``); with ``schema.binary_absence_similar``
    a ``(0, 0)`` pair also counts as identical.
    """
    kind = schema.dims[dim].kind
    if kind == NUMERICAL:
        return abs(float(a) - float(b))
    if kind == CATEGORICAL:
        return 0.0 if a == b else 1.0
    a, b = int(a), int(b)
    if a == 1 and b == 1:
        return 0.0
    if schema.binary_absence_similar and a == b:
        return 0.0
    return 1.0


def difference_columns(schema: AttributeSchema, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized :func:`attribute_difference` over aligned rows of two value matrices.

    ``x`` and ``y`` have shape ``(k, r)``; the result has the same shape.
    """
    out = np.empty(x.shape, dtype=float)
    for i, d in enumerate(schema.dims):
        a, b = x[:, i], y[:, i]
        if d.kind == NUMERICAL:
            out[:, i] = np.abs(a - b)
        elif d.kind == CATEGORICAL:
            out[:, i] = (a != b).astype(float)
        elif schema.binary_absence_similar:
            out[:, i] = (a != b).astype(float)
        else:
            out[:, i] = 1.0 - ((a == 1) & (b == 1)).astype(float)
    return out


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Immutable undirected simple graph with one attribute vector per node.

    ``values`` is an ``(n, r)`` float matrix: numerical columns are min-max
    normalized, binary columns hold 0/1 and categorical columns hold the index
    of the value inside the dimension's domain.
    """

    n: int
    edges: np.ndarray  # (m, 2) int, u < v, sorted lexicographically
    values: np.ndarray
    schema: AttributeSchema
    indptr: np.ndarray = field(init=False, repr=False)
    neighbors: np.ndarray = field(init=False, repr=False)
    edge_ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        values = np.array(self.values, dtype=float)
        if values.shape != (self.n, self.schema.r):
            raise GraphFormatError(
                f"attribute matrix has shape {values.shape}, expected {(self.n, self.schema.r)}"
            )
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphFormatError("edge endpoint outside [0, n)")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphFormatError("self-loop in edge list")
        lo, hi = np.minimum(edges[:, 0], edges[:, 1]), np.maximum(edges[:, 0], edges[:, 1])
        edges = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(edges) else edges
        if len(edges) != len(lo):
            raise GraphFormatError("duplicate edges in edge list")
        _check_values(self.schema, values)
        edges.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

        # CSR adjacency: every edge appears once per endpoint.
        m = len(edges)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        for name, arr in (("indptr", indptr), ("neighbors", dst[order]), ("edge_ids", eid[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def r(self) -> int:
        return self.schema.r

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacent(self, v: int) -> np.ndarray:
        return self.neighbors[self.indptr[v] : self.indptr[v + 1]]

    def incident(self, v: int) -> np.ndarray:
        """Edge ids incident to ``v``, aligned with :meth:`adjacent`."""
        return self.edge_ids[self.indptr[v] : self.indptr[v + 1]]

    def edge_differences(self) -> np.ndarray:
        """Per-dimension, per-edge attribute differences, shape ``(r, m)``. Cached, read-only."""
        cached = self.__dict__.get("_diffs")
        if cached is None:
            if self.m == 0:
                cached = np.zeros((self.r, 0))
            else:
                u, v = self.edges[:, 0], self.edges[:, 1]
                cached = np.ascontiguousarray(
                    difference_columns(self.schema, self.values[u], self.values[v]).T
                )
            cached.setflags(write=False)
            object.__setattr__(self, "_diffs", cached)
        return cached

    def squared_differences(self) -> np.ndarray:
        """Elementwise square of :meth:`edge_differences`. Cached, read-only."""
        cached = self.__dict__.get("_sqdiffs")
        if cached is None:
            cached = np.square(self.edge_differences())
            cached.setflags(write=False)
            object.__setattr__(self, "_sqdiffs", cached)
        return cached

    def same_as(self, other: "AttributedGraph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.values, other.values)
            and self.schema.names == other.schema.names
        )


def _check_values(schema: AttributeSchema, values: np.ndarray) -> None:
    for i, d in enumerate(schema.dims):
        col = values[:, i]
        if d.kind == NUMERICAL:
            if col.size and (col.min() < 0.0 or col.max() > 1.0):
                raise GraphFormatError(f"dimension {d.name!r}: numerical values not in [0, 1]")
        elif d.kind == BINARY:
            if not np.all((col == 0) | (col == 1)):
                raise GraphFormatError(f"dimension {d.name!r}: binary values must be 0/1")
        else:
            k = len(d.domain)
            if not np.all((col >= 0) & (col < k) & (col == np.floor(col))):
                raise GraphFormatError(f"dimension {d.name!r}: categorical code out of domain")


def normalize_columns(schema: AttributeSchema, raw: np.ndarray) -> tuple[AttributeSchema, np.ndarray]:
    """Min-max normalize numerical columns; constant columns become all zeros."""
    values = np.array(raw, dtype=float)
    dims = []
    for i, d in enumerate(schema.dims):
        if d.kind == NUMERICAL and len(values):
            lo, hi = float(values[:, i].min()), float(values[:, i].max())
            values[:, i] = (values[:, i] - lo) / (hi - lo) if hi > lo else 0.0
            d = Dimension(d.name, d.kind, (lo, hi))
        dims.append(d)
    return AttributeSchema(tuple(dims), schema.binary_absence_similar), values


@dataclass
class LoadReport:
    self_loops: int = 0
    duplicates: int = 0

    @property
    def warnings(self) -> int:
        return self.self_loops + self.duplicates


def _lines(source) -> Iterable[tuple[int, str]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from enumerate(fh.read().splitlines(), start=1)
    else:
        yield from enumerate((line.rstrip("\n") for line in source), start=1)


def parse_edges(source) -> list[tuple[int, int, int]]:
    """Parse ``u v`` lines into ``(u, v, lineno)`` triples."""
    out = []
    for lineno, line in _lines(source):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"edges line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"edges line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"edges line {lineno}: negative node id")
        out.append((u, v, lineno))
    return out


def parse_nodes(source, schema: AttributeSchema) -> np.ndarray:
    """Parse node rows into a raw (unnormalized) value matrix ordered by node id."""
    rows: dict[int, list[float]] = {}
    for lineno, line in _lines(source):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        try:
            node = int(parts[0])
        except ValueError:
            raise GraphFormatError(f"nodes line {lineno}: bad node id {parts[0]!r}") from None
        if len(parts) - 1 != schema.r:
            raise GraphFormatError(
                f"nodes line {lineno}: {len(parts) - 1} values for a {schema.r}-dimension schema"
            )
        if node in rows:
            raise GraphFormatError(f"nodes line {lineno}: node {node} listed twice")
        row = []
        for d, tok in zip(schema.dims, parts[1:]):
            tok = tok.strip()
            if d.kind == CATEGORICAL:
                domain = [str(x) for x in d.domain]
                if tok not in domain:
                    raise GraphFormatError(
                        f"nodes line {lineno}: value {tok!r} not in domain of {d.name!r}"
                    )
                row.append(float(domain.index(tok)))
                continue
            try:
                x = float(tok)
            except ValueError:
                raise GraphFormatError(
                    f"nodes line {lineno}: non-numeric value {tok!r} for {d.name!r}"
                ) from None
            if d.kind == BINARY and x not in (0.0, 1.0):
                raise GraphFormatError(f"nodes line {lineno}: binary value {tok!r} for {d.name!r}")
            if not np.isfinite(x):
                raise GraphFormatError(f"nodes line {lineno}: non-finite value for {d.name!r}")
            row.append(x)
        rows[node] = row
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise GraphFormatError("node ids must be exactly 0..n-1")
    return np.array([rows[i] for i in range(n)], dtype=float).reshape(n, schema.r)


def read_schema(source) -> AttributeSchema:
    if isinstance(source, dict):
        return AttributeSchema.from_json(source)
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = "".join(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"schema: {exc}") from exc
    return AttributeSchema.from_json(obj)


def load_graph(edges_source, nodes_source, schema_source) -> tuple[AttributedGraph, LoadReport]:
    """Read and validate an attributed graph.

    Self-loops and duplicate edges are dropped and counted in the returned
    report; every other defect raises :class:`GraphFormatError`.
    """
    schema = read_schema(schema_source)
    raw = parse_nodes(nodes_source, schema)
    n = len(raw)
    report = LoadReport()
    seen: set[tuple[int, int]] = set()
    kept = []
    for u, v, lineno in parse_edges(edges_source):
        if u >= n or v >= n:
            raise GraphFormatError(f"edges line {lineno}: unknown node {max(u, v)}")
        if u == v:
            report.self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            report.duplicates += 1
            continue
        seen.add(key)
        kept.append(key)
    if report.warnings:
        logger.warning(
            "dropped %d self-loop(s) and %d duplicate edge(s)", report.self_loops, report.duplicates
        )
    schema, values = normalize_columns(schema, raw)
    return AttributedGraph(n, np.array(kept, dtype=np.int64).reshape(-1, 2), values, schema), report


def from_arrays(
    n: int,
    edges: Sequence,
    values,
    schema: AttributeSchema,
    normalize: bool = True,
) -> AttributedGraph:
    """Build a graph from in-memory arrays, dropping self-loops and duplicates."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = e[e[:, 0] != e[:, 1]]
    if len(e):
        e = np.unique(np.sort(e, axis=1), axis=0)
    vals = np.asarray(values, dtype=float).reshape(n, schema.r)
    if normalize:
        schema, vals = normalize_columns(schema, vals)
    return AttributedGraph(n, e, vals, schema)


def format_value(dim: Dimension, x: float) -> str:
    if dim.kind == CATEGORICAL:
        return str(dim.domain[int(x)])
    if dim.kind == BINARY:
        return str(int(x))
    return repr(float(x))


def save_graph(graph: AttributedGraph, edges_path, nodes_path, schema_path) -> None:
    """Write the three graph files; numerical values are written normalized."""
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={graph.n} m={graph.m}\n")
        for u, v in graph.edges.tolist():
            fh.write(f"{u} {v}\n")
    dims = graph.schema.dims
    with open(nodes_path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(graph.values.tolist()):
            fh.write("\t".join([str(i)] + [format_value(d, x) for d, x in zip(dims, row)]) + "\n")
    with open(schema_path, "w", encoding="utf-8") as fh:
        json.dump(graph.schema.to_json(), fh, indent=2)
        fh.write("\n")
