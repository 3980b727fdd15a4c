import numpy as np
import pytest
from hypothesis import strategies as st

from acmine.graph import AttributeSchema, Dimension, from_arrays

from oracles import clique_edges


def numerical_schema(r):
    return AttributeSchema(tuple(Dimension(f"a{i}", "numerical") for i in range(r)))


def mixed_schema():
    return AttributeSchema((
        Dimension("x", "numerical"),
        Dimension("flag", "binary"),
        Dimension("area", "categorical", ("DB", "ML", "TH")),
    ))


def make_graph(n, edges, values=None, r=1, normalize=False):
    if values is None:
        values = np.zeros((n, r))
    values = np.asarray(values, dtype=float).reshape(n, -1)
    return from_arrays(n, edges, values, numerical_schema(values.shape[1]), normalize=normalize)


def random_graph(rng, n, r, p_edge=0.3, kinds=("numerical",)):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p_edge]
    dims, cols = [], []
    for i in range(r):
        kind = kinds[i % len(kinds)]
        if kind == "numerical":
            cols.append(rng.random(n))
            dims.append(Dimension(f"a{i}", kind))
        elif kind == "binary":
            cols.append((rng.random(n) < 0.5).astype(float))
            dims.append(Dimension(f"a{i}", kind))
        else:
            cols.append(rng.integers(3, size=n).astype(float))
            dims.append(Dimension(f"a{i}", kind, ("p", "q", "s")))
    schema = AttributeSchema(tuple(dims))
    return from_arrays(n, edges, np.stack(cols, axis=1), schema, normalize=False)


@st.composite
def small_graphs(draw, max_n=8, max_r=4):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(3, max_n))
    r = draw(st.integers(1, max_r))
    rng = np.random.default_rng(seed)
    kinds = draw(st.sampled_from([("numerical",), ("numerical", "binary", "categorical")]))
    return random_graph(rng, n, r, p_edge=draw(st.floats(0.3, 0.9)), kinds=kinds)


@pytest.fixture
def two_cliques():
    """Two 6-cliques joined by the bridge 5-6."""
    edges = clique_edges(range(6)) + clique_edges(range(6, 12)) + [(5, 6)]
    return make_graph(12, edges)


# acceptance criterion number -> summary line, filled by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
