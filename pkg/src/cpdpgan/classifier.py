"""Gaussian Naive Bayes over metric vectors, scored in log space."""

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dataset import DatasetError, Label

CLASSES = (Label.FAULTY, Label.CLEAN)
RELATIVE_FLOOR = 1e-9
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class NbModel:
    """Row 0 of ``mean``/``var`` is FAULTY, row 1 is CLEAN."""
    log_prior: np.ndarray  # (2,)
    mean: np.ndarray  # (2, F)
    var: np.ndarray  # (2, F)
    feature_names: tuple = ()
    variance_floor: float = 0.0

    @property
    def n_features(self):
        return self.mean.shape[1]

    def to_dict(self):
        return {
            "classes": [c.value for c in CLASSES],
            "prior": np.exp(self.log_prior).tolist(),
            "mean": self.mean.tolist(),
            "var": self.var.tolist(),
            "feature_names": list(self.feature_names),
            "variance_floor": self.variance_floor,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.log(np.array(data["prior"], dtype=np.float64)),
                   np.array(data["mean"], dtype=np.float64),
                   np.array(data["var"], dtype=np.float64),
                   tuple(data.get("feature_names", ())),
                   float(data.get("variance_floor", 0.0)))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def fit(dataset, variance_floor=None):
    """Class frequencies as priors, ML (population) per-class means and variances.

    ``variance_floor=None`` uses 1e-9 times the largest per-feature variance
    of the whole dataset (or 1e-9 when every feature is constant).
    """
    y = dataset.label_array()
    x = dataset.features
    faulty, clean = x[y == 1], x[y == 0]
    if len(faulty) == 0 or len(clean) == 0:
        raise DatasetError("Naive Bayes needs both FAULTY and CLEAN instances")
    if variance_floor is None:
        spread = float(np.max(np.var(x, axis=0)))
        variance_floor = RELATIVE_FLOOR * spread if spread > 0 else RELATIVE_FLOOR
    if not variance_floor > 0:
        raise ValueError("variance_floor must be positive")
    n = len(y)
    prior = np.array([len(faulty) / n, len(clean) / n])
    mean = np.vstack([faulty.mean(axis=0), clean.mean(axis=0)])
    var = np.maximum(np.vstack([faulty.var(axis=0), clean.var(axis=0)]), variance_floor)
    return NbModel(np.log(prior), mean, var, dataset.feature_names, float(variance_floor))


def joint_log_likelihood(model, x):
    """log P(class) + sum_f log N(x_f; mean, var), shape (n, 2)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != model.n_features:
        raise DatasetError(f"instance has {x.shape[1]} features, model expects {model.n_features}")
    out = np.empty((x.shape[0], 2))
    for c in range(2):
        m, v = model.mean[c], model.var[c]
        out[:, c] = model.log_prior[c] - 0.5 * np.sum(_LOG_2PI + np.log(v) + (x - m) ** 2 / v, axis=1)
    return out


def predict_proba_matrix(model, x):
    # two-class softmax as a logistic of the log-odds: stable, and an exact
    # tie in log-likelihood gives exactly (0.5, 0.5)
    jll = joint_log_likelihood(model, x)
    log_odds = jll[:, 0] - jll[:, 1]
    return np.column_stack([expit(log_odds), expit(-log_odds)])


def _features_of(instance):
    return instance.features if hasattr(instance, "features") else instance


def predict_proba(model, instance):
    """(P(FAULTY | x), P(CLEAN | x)) for one instance."""
    p = predict_proba_matrix(model, np.asarray(_features_of(instance), dtype=np.float64))[0]
    return float(p[0]), float(p[1])


def decide(p_faulty, p_clean):
    # exact ties go to FAULTY
    return Label.FAULTY if p_faulty >= p_clean else Label.CLEAN


def predict(model, instance):
    return decide(*predict_proba(model, instance))


def predict_dataset(model, dataset):
    p = predict_proba_matrix(model, dataset.features)
    return [decide(a, b) for a, b in p]
