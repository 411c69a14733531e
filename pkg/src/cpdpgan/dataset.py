"""Software-metric datasets: CSV loading, summary statistics, synthetic fixtures."""

import csv
import enum
import math
import os
from dataclasses import dataclass

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or unusable dataset input."""


class Label(enum.Enum):
    FAULTY = "faulty"
    CLEAN = "clean"


_LABEL_TOKENS = {
    "1": Label.FAULTY,
    "faulty": Label.FAULTY,
    "0": Label.CLEAN,
    "clean": Label.CLEAN,
}


def parse_label(token):
    try:
        return _LABEL_TOKENS[token.strip().lower()]
    except KeyError:
        raise DatasetError(f"unknown label token {token!r}") from None


@dataclass(frozen=True)
class MetricInstance:
    id: str
    features: tuple
    label: Label | None = None


class ProjectDataset:
    """A named set of metric vectors sharing one feature layout.

    Features are held as a read-only ``(n, F)`` float64 array; labels are a
    tuple with one entry per instance, ``None`` for unlabeled instances.
    """

    def __init__(self, name, feature_names, features, ids=None, labels=None):
        feature_names = tuple(str(f) for f in feature_names)
        if len(feature_names) < 1:
            raise DatasetError("dataset needs at least one feature")
        x = np.array(features, dtype=np.float64, copy=True)
        if x.ndim == 1 and x.size == 0:
            x = x.reshape(0, len(feature_names))
        if x.ndim != 2 or x.shape[1] != len(feature_names):
            raise DatasetError(
                f"feature matrix shape {x.shape} does not match {len(feature_names)} feature names")
        if not np.all(np.isfinite(x)):
            raise DatasetError("features contain NaN or infinity")
        x.setflags(write=False)
        n = x.shape[0]
        if ids is None:
            ids = tuple(f"row-{k}" for k in range(n))
        ids = tuple(str(i) for i in ids)
        if labels is None:
            labels = (None,) * n
        labels = tuple(labels)
        if len(ids) != n or len(labels) != n:
            raise DatasetError("ids/labels length does not match instance count")
        for lab in labels:
            if lab is not None and not isinstance(lab, Label):
                raise DatasetError(f"invalid label {lab!r}")
        self.name = str(name)
        self.feature_names = feature_names
        self.features = x
        self.ids = ids
        self.labels = labels

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def __len__(self):
        return self.n_instances

    @property
    def instances(self):
        return [MetricInstance(i, tuple(row.tolist()), lab)
                for i, row, lab in zip(self.ids, self.features, self.labels)]

    @property
    def is_labeled(self):
        return all(lab is not None for lab in self.labels)

    def label_array(self):
        """1 for FAULTY, 0 for CLEAN; raises if any instance is unlabeled."""
        if not self.is_labeled:
            raise DatasetError(f"dataset {self.name!r} has unlabeled instances")
        return np.array([lab is Label.FAULTY for lab in self.labels], dtype=np.int64)

    def with_features(self, features, name=None):
        return ProjectDataset(name or self.name, self.feature_names, features, self.ids, self.labels)

    def strip_labels(self):
        return ProjectDataset(self.name, self.feature_names, self.features, self.ids)

    def __eq__(self, other):
        if not isinstance(other, ProjectDataset):
            return NotImplemented
        return (self.name == other.name and self.feature_names == other.feature_names
                and self.ids == other.ids and self.labels == other.labels
                and np.array_equal(self.features, other.features))

    def __repr__(self):
        return (f"ProjectDataset(name={self.name!r}, n={self.n_instances}, "
                f"F={self.n_features}, labeled={self.is_labeled})")


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    n_faulty: int
    buggy_rate: float

    @property
    def buggy_rate_display(self):
        return round(self.buggy_rate, 2)


def load_csv(path, label_column=None, name=None):
    """Read a header-first CSV into a :class:`ProjectDataset`.

    An ``id`` column, if present, supplies instance ids; ``label_column``
    (when given) supplies labels. Every other column is a feature, in file
    order. Row numbers in error messages count data rows from 1.
    """
    if not os.path.exists(path):
        raise DatasetError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DatasetError("empty dataset")
    header = [h.strip() for h in rows[0]]
    if label_column is not None and label_column not in header:
        raise DatasetError(f"label column {label_column!r} not found in header")
    id_idx = header.index("id") if "id" in header else None
    label_idx = header.index(label_column) if label_column is not None else None
    feat_idx = [k for k in range(len(header)) if k not in (id_idx, label_idx)]
    if not feat_idx:
        raise DatasetError("no feature columns")

    ids, labels, feats = [], [], []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DatasetError(f"row {r} has {len(row)} cells, header has {len(header)}")
        vec = []
        for k in feat_idx:
            cell = row[k].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"non-numeric value {cell!r} at row {r}, column {header[k]!r}") from None
            if not math.isfinite(v):
                raise DatasetError(f"non-finite value {cell!r} at row {r}, column {header[k]!r}")
            vec.append(v)
        feats.append(vec)
        ids.append(row[id_idx].strip() if id_idx is not None else f"row-{r - 1}")
        if label_idx is not None:
            try:
                labels.append(parse_label(row[label_idx]))
            except DatasetError as exc:
                raise DatasetError(f"{exc} at row {r}, column {label_column!r}") from None
        else:
            labels.append(None)

    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    x = np.array(feats, dtype=np.float64).reshape(len(feats), len(feat_idx))
    return ProjectDataset(name, [header[k] for k in feat_idx], x, ids, labels)


def save_csv(dataset, path, label_column="bug"):
    """Write ``dataset`` so that ``load_csv(path, label_column)`` restores it.

    Floats are written with ``repr`` so the round trip is exact. The label
    column is omitted when the dataset is fully unlabeled.
    """
    write_labels = any(lab is not None for lab in dataset.labels)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["id", *dataset.feature_names]
        if write_labels:
            header.append(label_column)
        w.writerow(header)
        for i, row, lab in zip(dataset.ids, dataset.features, dataset.labels):
            out = [i, *(repr(float(v)) for v in row)]
            if write_labels:
                if lab is None:
                    raise DatasetError("cannot write a partially labeled dataset")
                out.append("1" if lab is Label.FAULTY else "0")
            w.writerow(out)


def stats(dataset):
    if dataset.n_instances == 0:
        raise DatasetError("empty dataset")
    if not dataset.is_labeled:
        raise DatasetError(f"dataset {dataset.name!r} has unlabeled instances")
    n_faulty = sum(lab is Label.FAULTY for lab in dataset.labels)
    return DatasetStats(dataset.n_instances, n_faulty, 100.0 * n_faulty / dataset.n_instances)


def synthesize(n, f, class_means, class_std, buggy_fraction, seed, name="synthetic"):
    """Two-class Gaussian blobs for tests and demos.

    ``class_means`` is ``(faulty_mean, clean_mean)``; exactly
    ``floor(buggy_fraction * n)`` instances are faulty. Instance order is a
    seeded shuffle.
    """
    if n < 1 or f < 1:
        raise DatasetError("n and f must be >= 1")
    if not class_std > 0:
        raise DatasetError("class_std must be positive")
    if not 0.0 <= buggy_fraction <= 1.0:
        raise DatasetError("buggy_fraction must lie in [0, 1]")
    faulty_mean = np.asarray(class_means[0], dtype=np.float64)
    clean_mean = np.asarray(class_means[1], dtype=np.float64)
    if faulty_mean.shape != (f,) or clean_mean.shape != (f,):
        raise DatasetError(f"class means must have length {f}")

    rng = np.random.default_rng(seed)
    n_faulty = math.floor(buggy_fraction * n)
    is_faulty = np.zeros(n, dtype=bool)
    is_faulty[:n_faulty] = True
    is_faulty = is_faulty[rng.permutation(n)]
    centers = np.where(is_faulty[:, None], faulty_mean, clean_mean)
    x = centers + class_std * rng.standard_normal((n, f))
    labels = [Label.FAULTY if b else Label.CLEAN for b in is_faulty]
    return ProjectDataset(name, [f"m{k}" for k in range(f)], x, labels=labels)


def shifted_domain_pair(n=400, shift=5.0, buggy_fraction=0.4, seed=0):
    """Source/target pair for desk-scale adaptation checks.

    Both projects have FAULTY instances around (3, 3) and CLEAN around
    (0, 0) with unit spread; every target feature is then offset by ``shift``.
    """
    means = [(3.0, 3.0), (0.0, 0.0)]
    source = synthesize(n, 2, means, 1.0, buggy_fraction, seed, name="source")
    target = synthesize(n, 2, means, 1.0, buggy_fraction, seed + 1, name="target")
    return source, target.with_features(target.features + shift)
