import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acmine.benchgen import GroundTruth
from acmine.evaluation import f1, ground_truth_organization, quality_q
from acmine.kernel import Subspace


def test_f1_half_overlap():
    assert f1({1, 2, 3, 4}, {3, 4, 5, 6}) == 0.5


def test_f1_edge_cases():
    assert f1({1, 2}, {1, 2}) == 1.0
    assert f1({1, 2}, {3}) == 0.0
    assert f1({1, 2}, set()) == 0.0
    with pytest.raises(ValueError):
        f1(set(), {1})


def test_f1_is_symmetric_on_nonempty_sets():
    assert f1({1, 2, 3}, {3, 4}) == f1({3, 4}, {1, 2, 3}) == pytest.approx(0.4)


def test_perfect_and_empty_detection():
    truth = [{1, 2, 3}, {4, 5, 6}]
    assert quality_q(truth, [{4, 5, 6}, {1, 2, 3}]).q == 1.0
    assert quality_q(truth, []).q == 0.0


def test_best_match_per_truth_community():
    truth = [{1, 2, 3, 4}, {5, 6, 7, 8}]
    rep = quality_q(truth, [{3, 4, 5, 6}, {5, 6, 7, 8, 9}])
    # truth 0 best is 0.5 against detected 0; truth 1 best is 8/9 against detected 1
    assert rep.per_truth_best == [(0, 0.5, 0), (1, pytest.approx(8 / 9), 1)]
    assert rep.q == pytest.approx((0.5 + 8 / 9) / 2)


def test_empty_truth_raises():
    with pytest.raises(ValueError):
        quality_q([], [{1}])


def test_subspace_overlap_is_reported_not_scored():
    rep = quality_q([{1, 2}], [{1, 2}], truth_subspaces=[[0, 1]], detected_subspaces=[[1, 2]])
    assert rep.q == 1.0 and rep.subspace_jaccard == [pytest.approx(1 / 3)]


def test_ground_truth_organization_filters_by_subspace():
    gt = GroundTruth([frozenset({1, 2}), frozenset({3, 4}), frozenset({5})],
                     [Subspace([0, 1]), Subspace([1, 2]), Subspace([0, 2])])
    assert ground_truth_organization(gt, Subspace([0])) == [frozenset({1, 2}), frozenset({5})]
    assert ground_truth_organization(gt, [1]) == [frozenset({1, 2}), frozenset({3, 4})]
    assert ground_truth_organization(gt, [0, 1, 2]) == []


def test_report_serialization():
    rep = quality_q([{1, 2}], [{1}])
    assert json.loads(rep.to_json())["q"] == pytest.approx(2 / 3)
    assert rep.csv_row(seed=3).startswith("3,")


communities = st.sets(st.integers(0, 15), min_size=1, max_size=6)


@settings(max_examples=100, deadline=None)
@given(st.lists(communities, min_size=1, max_size=4), st.lists(communities, max_size=4), communities)
def test_adding_a_detection_never_lowers_q(truth, detected, extra):
    before = quality_q(truth, detected).q
    after = quality_q(truth, detected + [extra]).q
    assert 0.0 <= before <= after <= 1.0
