import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spadecluster.errors import ParameterError
from spadecluster.metrics import acc, confusion_matrix, hungarian_max_assignment


def exhaustive_best(cost):
    k = cost.shape[0]
    return max(sum(cost[i, p[i]] for i in range(k)) for p in itertools.permutations(range(k)))


def exhaustive_acc(pred, truth):
    """Try every injective map from cluster ids to label ids."""
    p_ids, t_ids = sorted(set(pred)), sorted(set(truth))
    k = max(len(p_ids), len(t_ids))
    targets = t_ids + [None] * (k - len(t_ids))
    best = 0
    for perm in itertools.permutations(targets, len(p_ids)):
        mapping = dict(zip(p_ids, perm))
        best = max(best, sum(mapping[p] == t for p, t in zip(pred, truth)))
    return best / len(pred)


def test_identity_dominant():
    np.testing.assert_array_equal(hungarian_max_assignment(np.diag([5.0, 5.0, 5.0])), [0, 1, 2])


def test_two_by_two_swap():
    cost = np.array([[1.0, 9.0], [9.0, 1.0]])
    perm = hungarian_max_assignment(cost)
    np.testing.assert_array_equal(perm, [1, 0])
    assert cost[[0, 1], perm].sum() == 18


@pytest.mark.parametrize("seed", range(10))
def test_random_six_by_six(seed):
    cost = np.random.default_rng(seed).integers(0, 50, (6, 6)).astype(float)
    perm = hungarian_max_assignment(cost)
    assert sorted(perm.tolist()) == list(range(6))
    assert cost[np.arange(6), perm].sum() == exhaustive_best(cost)


def test_non_square_rejected():
    with pytest.raises(ParameterError):
        hungarian_max_assignment(np.zeros((2, 3)))


def test_acc_examples():
    truth = np.array([0, 0, 1, 1, 2, 2])
    pred = np.array([1, 1, 0, 2, 2, 2])
    assert exhaustive_acc(pred.tolist(), truth.tolist()) == pytest.approx(5 / 6)
    assert acc(pred, truth) == pytest.approx(5 / 6)
    assert acc(truth, truth) == 1.0
    assert acc(np.array([2, 0, 1])[truth], truth) == 1.0


def test_acc_length_mismatch():
    with pytest.raises(ParameterError):
        acc([0, 1], [0, 1, 1])


def test_acc_unequal_label_counts():
    truth = [0, 0, 1, 1, 2, 2]
    pred = [0, 0, 0, 1, 1, 1]
    assert acc(pred, truth) == pytest.approx(exhaustive_acc(pred, truth))


def test_confusion_sums_to_n():
    cm = confusion_matrix([0, 1, 1, 2], [1, 1, 0, 0])
    assert cm.counts.sum() == cm.n == 4


labels = st.lists(st.integers(0, 4), min_size=1, max_size=30)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_acc_invariances(data):
    truth = np.array(data.draw(labels))
    pred = np.array(data.draw(st.lists(st.integers(0, 4), min_size=len(truth), max_size=len(truth))))
    base = acc(pred, truth)
    assert base == pytest.approx(exhaustive_acc(pred.tolist(), truth.tolist()))
    p1 = np.array(data.draw(st.permutations(range(5))))
    p2 = np.array(data.draw(st.permutations(range(5))))
    assert acc(p1[pred], truth) == base
    assert acc(pred, p2[truth]) == base
    assert acc(truth, pred) == base


@settings(max_examples=50, deadline=None)
@given(labels)
def test_constant_prediction_floor(truth):
    truth = np.array(truth)
    assert acc(np.zeros_like(truth), truth) >= np.bincount(truth).max() / truth.size
