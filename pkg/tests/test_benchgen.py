import numpy as np
import pytest
from scipy import stats

from acmine.benchgen import (
    BenchmarkParams,
    GroundTruth,
    InfeasibleParams,
    attach_attributes,
    generate,
    load_ground_truth,
    mixing,
    pick_concerned,
    sample_power_law,
    save_ground_truth,
    solve_min_degree,
)
from acmine.evaluation import ground_truth_organization
from acmine.kernel import Subspace

SMALL = dict(n=1000, d_avg=20, d_max=50, c_min=20, c_max=40, r=20, t=6)


def test_defaults():
    p = BenchmarkParams()
    assert (p.n, p.tau1, p.tau2, p.d_avg, p.d_max, p.c_min, p.cmax) == (5000, 2.0, 1.0, 30, 100, 40, 80)
    assert (p.mu, p.r, p.t, p.p) == (0.2, 20, 6, 0.9)


def test_min_degree_hits_target_mean():
    d_min = solve_min_degree(2.0, 20, 50)
    draws = sample_power_law(np.random.default_rng(0), d_min, 50, 2.0, 200_000)
    assert draws.min() >= d_min and draws.max() <= 50
    assert draws.mean() == pytest.approx(20, rel=0.01)


def test_zero_mixing():
    g, gt = generate(BenchmarkParams(**SMALL, mu=0.0, rng_seed=0))
    assert mixing(g, gt) <= 0.02


@pytest.mark.parametrize("seed", [0, 1])
def test_mean_degree_and_sizes(seed):
    params = BenchmarkParams(**SMALL, rng_seed=seed)
    g, gt = generate(params)
    assert 2 * g.m / g.n == pytest.approx(20, rel=0.10)
    assert abs(mixing(g, gt) - 0.2) <= 0.05
    sizes = [len(c) for c in gt.communities]
    assert all(20 <= s <= 40 for s in sizes)
    assert sorted(set().union(*gt.communities)) == list(range(1000))
    assert sum(sizes) == 1000
    assert all(len(sub) == 6 for sub in gt.subspaces)


def test_generation_is_deterministic():
    params = BenchmarkParams(n=300, d_avg=10, d_max=25, c_min=20, c_max=40, r=6, t=3, rng_seed=4)
    (g1, t1), (g2, t2) = generate(params), generate(params)
    assert g1.same_as(g2)
    assert t1 == t2


def raw_attributes(kind, p, seed=0, noise="node"):
    params = BenchmarkParams(n=400, r=8, t=4, p=p, type=kind, noise=noise, rng_seed=seed)
    rng = np.random.default_rng(seed)
    membership = np.repeat(np.arange(4), 100)
    values, subs, schema = attach_attributes(rng, membership, 4, params)
    return membership, values, subs, schema


@pytest.mark.parametrize("noise", ["node", "entry"])
def test_full_probability_numerical_members_stay_near_center(noise):
    membership, values, subs, _ = raw_attributes("numerical", 1.0, noise=noise)
    for c, sub in enumerate(subs):
        block = values[membership == c][:, list(sub.dims)]
        assert np.all(block.max(axis=0) - block.min(axis=0) <= 0.1 + 1e-12)


def test_full_probability_binary_members_are_one():
    membership, values, subs, _ = raw_attributes("binary", 1.0)
    for c, sub in enumerate(subs):
        assert np.all(values[membership == c][:, list(sub.dims)] == 1.0)


def test_full_probability_categorical_members_share_category():
    membership, values, subs, schema = raw_attributes("categorical", 1.0)
    assert len(schema.dims[0].domain) == 10
    for c, sub in enumerate(subs):
        block = values[membership == c][:, list(sub.dims)]
        assert np.all(block == block[0])


def test_zero_probability_is_background():
    membership, values, subs, _ = raw_attributes("numerical", 0.0, seed=3)
    planted = np.concatenate([values[membership == c][:, list(s.dims)].ravel() for c, s in enumerate(subs)])
    background = []
    for c, s in enumerate(subs):
        other = [i for i in range(values.shape[1]) if i not in s]
        background.append(values[membership == c][:, other].ravel())
    assert stats.ks_2samp(planted, np.concatenate(background)).pvalue > 0.01


def test_pick_concerned():
    _, gt = generate(BenchmarkParams(n=300, d_avg=10, d_max=25, c_min=20, c_max=40, r=8, t=4, rng_seed=2))
    for seed in range(5):
        sub = pick_concerned(gt, 2, seed)
        assert len(sub) == 2
        assert any(sub.issuperset(s) is False and set(sub.dims) <= set(s.dims) for s in gt.subspaces)
        assert ground_truth_organization(gt, sub)
    full = pick_concerned(gt, 4, 0)
    assert full in gt.subspaces
    with pytest.raises(ValueError):
        pick_concerned(gt, 5, 0)
    with pytest.raises(ValueError):
        pick_concerned(GroundTruth([], []), 1, 0)


def test_ground_truth_round_trip(tmp_path):
    gt = GroundTruth([frozenset({0, 1, 2}), frozenset({3, 4})], [Subspace([1, 2]), Subspace([0])])
    save_ground_truth(gt, tmp_path / "truth.txt")
    assert load_ground_truth(tmp_path / "truth.txt") == gt


@pytest.mark.parametrize(
    "kw",
    [
        dict(c_min=5, c_max=5, d_avg=30),  # smallest internal degree exceeds every community
        dict(c_min=50, c_max=40),
        dict(t=30),
        dict(mu=1.0),
        dict(d_avg=200),
        dict(type="ordinal"),
    ],
)
def test_infeasible_parameters_raise(kw):
    with pytest.raises(InfeasibleParams):
        BenchmarkParams(**{**SMALL, **kw}).validate()
