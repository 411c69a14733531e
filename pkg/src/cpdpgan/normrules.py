"""Distance-statistics normalization rules (TCA+ style) used as the baseline preprocessor.

Each project is summarized by statistics of its pairwise Euclidean distances.
Source and target summaries are compared characteristic by characteristic,
and the first matching rule picks how both projects get normalized.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import DatasetError

CHARACTERISTICS = ("mean", "median", "min", "max", "std", "n_instances")


@dataclass(frozen=True)
class DistStats:
    mean: float
    median: float
    min: float
    max: float
    std: float
    n_instances: int

    def as_dict(self):
        return {k: getattr(self, k) for k in CHARACTERISTICS}


class SimilarityLevel(enum.IntEnum):
    MUCH_LESS = 0
    LESS = 1
    SAME = 2
    MORE = 3
    MUCH_MORE = 4

    @property
    def label(self):
        return self.name.replace("_", "-")


class NormalizationChoice(enum.Enum):
    NO_NORM = "NO-NORM"
    MIN_MAX = "MIN-MAX"
    ZSCORE_SOURCE_STATS = "ZSCORE-SOURCE-STATS"
    ZSCORE_TARGET_STATS = "ZSCORE-TARGET-STATS"
    ZSCORE = "ZSCORE"


@dataclass(frozen=True)
class SimilarityBands:
    """Ratio cutoffs (target / source) between adjacent similarity levels."""
    much_less: float = 0.4
    less: float = 0.9
    same: float = 1.1
    more: float = 2.5

    def classify(self, ratio):
        if ratio < self.much_less:
            return SimilarityLevel.MUCH_LESS
        if ratio < self.less:
            return SimilarityLevel.LESS
        if ratio <= self.same:
            return SimilarityLevel.SAME
        if ratio <= self.more:
            return SimilarityLevel.MORE
        return SimilarityLevel.MUCH_MORE


DEFAULT_BANDS = SimilarityBands()


def pairwise_dist(dataset):
    """Summary statistics of all n(n-1)/2 pairwise distances (population std)."""
    n = dataset.n_instances
    if n < 2:
        raise DatasetError("pairwise distances need at least 2 instances")
    d = _kernels.pdist(dataset.features)
    return DistStats(
        mean=float(np.mean(d)),
        median=float(np.median(d)),
        min=float(np.min(d)),
        max=float(np.max(d)),
        std=float(np.std(d)),
        n_instances=n,
    )


def compare(source, target, bands=DEFAULT_BANDS):
    levels = {}
    for key in CHARACTERISTICS:
        s = float(getattr(source, key))
        t = float(getattr(target, key))
        if s == 0.0:
            levels[key] = SimilarityLevel.SAME if t == 0.0 else SimilarityLevel.MUCH_MORE
        else:
            levels[key] = bands.classify(t / s)
    return levels


def select_rule(levels, n_source, n_target):
    """Return ``(rule_id, NormalizationChoice)``; rules are tried in order 1..5."""
    extreme = (SimilarityLevel.MUCH_LESS, SimilarityLevel.MUCH_MORE)
    std = levels["std"]
    if levels["mean"] == SimilarityLevel.SAME and std == SimilarityLevel.SAME:
        return 1, NormalizationChoice.NO_NORM
    if all(levels[k] in extreme for k in ("min", "max", "n_instances")):
        return 2, NormalizationChoice.MIN_MAX
    if ((std == SimilarityLevel.MUCH_MORE and n_target < n_source)
            or (std == SimilarityLevel.MUCH_LESS and n_target > n_source)):
        return 3, NormalizationChoice.ZSCORE_SOURCE_STATS
    if ((std == SimilarityLevel.MUCH_MORE and n_target > n_source)
            or (std == SimilarityLevel.MUCH_LESS and n_target < n_source)):
        return 4, NormalizationChoice.ZSCORE_TARGET_STATS
    return 5, NormalizationChoice.ZSCORE


def _zscore(x, mean, std):
    out = np.zeros_like(x)
    ok = std > 0
    out[:, ok] = (x[:, ok] - mean[ok]) / std[ok]
    return out


def _minmax(x):
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    out = np.zeros_like(x)
    ok = span > 0
    out[:, ok] = (x[:, ok] - lo[ok]) / span[ok]
    return out


def apply_normalization(choice, source, target):
    """Normalize both projects per ``choice``; labels, ids and shapes are kept."""
    if source.n_features != target.n_features:
        raise DatasetError(
            f"feature width mismatch: source has {source.n_features}, target has {target.n_features}")
    choice = NormalizationChoice(choice)
    xs, xt = source.features, target.features
    if choice is NormalizationChoice.NO_NORM:
        return source, target
    if choice is NormalizationChoice.MIN_MAX:
        return source.with_features(_minmax(xs)), target.with_features(_minmax(xt))
    if choice is NormalizationChoice.ZSCORE:
        ns = _zscore(xs, xs.mean(axis=0), xs.std(axis=0))
        nt = _zscore(xt, xt.mean(axis=0), xt.std(axis=0))
    else:
        ref = xs if choice is NormalizationChoice.ZSCORE_SOURCE_STATS else xt
        mean, std = ref.mean(axis=0), ref.std(axis=0)
        ns, nt = _zscore(xs, mean, std), _zscore(xt, mean, std)
    return source.with_features(ns), target.with_features(nt)


def select_normalization(source, target, bands=DEFAULT_BANDS):
    """Full rule pass over raw features; returns a dict suitable for JSON output."""
    s_stats, t_stats = pairwise_dist(source), pairwise_dist(target)
    levels = compare(s_stats, t_stats, bands)
    rule_id, choice = select_rule(levels, s_stats.n_instances, t_stats.n_instances)
    return {
        "source": s_stats.as_dict(),
        "target": t_stats.as_dict(),
        "levels": {k: v.label for k, v in levels.items()},
        "rule": rule_id,
        "choice": choice.value,
    }
