"""Confusion-matrix scores and the MMD divergence probe."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import DatasetError, Label

MEDIAN_HEURISTIC = "median"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with FAULTY as the positive class."""
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(predicted, truth):
    predicted, truth = list(predicted), list(truth)
    if len(predicted) != len(truth):
        raise ValueError(f"length mismatch: {len(predicted)} predictions, {len(truth)} labels")
    if not predicted:
        raise ValueError("cannot score an empty prediction list")
    tp = fp = tn = fn = 0
    for p, t in zip(predicted, truth):
        if t is None:
            raise ValueError("truth contains an unlabeled instance")
        if p is Label.FAULTY:
            if t is Label.FAULTY:
                tp += 1
            else:
                fp += 1
        elif t is Label.FAULTY:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


def f_measure(cm):
    """(precision, recall, f1); any zero denominator yields 0 rather than NaN."""
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    s = precision + recall
    f1 = 2.0 * precision * recall / s if s else 0.0
    return precision, recall, f1


def accuracy(cm):
    return (cm.tp + cm.tn) / cm.total if cm.total else 0.0


def _as_matrix(data):
    if hasattr(data, "features"):
        return data.features
    x = np.asarray(data, dtype=np.float64)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def median_bandwidth(a, b):
    pooled = np.vstack([_as_matrix(a), _as_matrix(b)])
    if pooled.shape[0] < 2:
        return 1.0
    med = float(np.median(_kernels.pdist(pooled)))
    return med if med > 0 else 1.0


def mmd(a, b, bandwidth=MEDIAN_HEURISTIC):
    """Squared MMD with a Gaussian kernel exp(-d^2 / (2 * bandwidth^2)).

    Within-set sums skip the diagonal (unbiased form) whenever a set has at
    least two points; negative estimates are clipped to 0.
    """
    xa, xb = _as_matrix(a), _as_matrix(b)
    if xa.shape[1] != xb.shape[1]:
        raise DatasetError(f"feature width mismatch: {xa.shape[1]} vs {xb.shape[1]}")
    m, n = xa.shape[0], xb.shape[0]
    if m == 0 or n == 0:
        raise DatasetError("mmd needs two nonempty sets")
    if bandwidth == MEDIAN_HEURISTIC:
        bandwidth = median_bandwidth(xa, xb)
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    gamma = 1.0 / (2.0 * bandwidth * bandwidth)
    ksum = _kernels.gaussian_kernel_sum

    def within(x, k):
        if k >= 2:
            return ksum(x, x, gamma, True) / (k * (k - 1))
        return ksum(x, x, gamma, False) / (k * k)

    value = within(xa, m) + within(xb, n) - 2.0 * ksum(xa, xb, gamma) / (m * n)
    return max(value, 0.0)
