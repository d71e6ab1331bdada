"""Clustering accuracy under the best cluster-to-class matching."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (k_pred, k_true)
    n: int


def hungarian_max_assignment(cost):
    """Permutation ``perm`` maximizing ``sum(cost[i, perm[i]])``."""
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ParameterError("cost matrix has non-finite entries")
    rows, cols = linear_sum_assignment(c, maximize=True)
    perm = np.empty(c.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def _encode(labels):
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes.ravel()


def confusion_matrix(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ParameterError(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ParameterError("label vectors are empty")
    p, t = _encode(pred), _encode(truth)
    counts = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(counts, (p, t), 1)
    return ConfusionMatrix(counts, int(pred.size))


def acc(pred, truth):
    """Fraction of points whose cluster maps to their class.

    Cluster ids are matched to class ids one-to-one by the assignment that
    maximizes agreement; the confusion matrix is zero-padded to square when
    the two label sets differ in size.
    """
    cm = confusion_matrix(pred, truth)
    k = max(cm.counts.shape)
    square = np.zeros((k, k), dtype=np.int64)
    square[: cm.counts.shape[0], : cm.counts.shape[1]] = cm.counts
    perm = hungarian_max_assignment(square)
    matched = int(square[np.arange(k), perm].sum())
    return matched / cm.n
