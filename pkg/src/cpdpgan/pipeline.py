"""End-to-end cross-project run and the epoch sweep.

normalize -> adversarial training -> transform target -> fit Naive Bayes on
source -> predict transformed target -> score against target labels.
"""

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import classifier, metrics, normrules
from . import gan as adversarial
from .dataset import DatasetError

NORMALIZATION_MODES = ("zscore-source-stats", "auto-rules", "none")

SWEEP_COLUMNS = ("source", "target", "epochs", "precision", "recall", "f1", "accuracy",
                 "mmd_before", "mmd_after", "seed")


@dataclass(frozen=True)
class PipelineConfig:
    gan: adversarial.GanConfig = field(default_factory=adversarial.GanConfig)
    normalization: str = "zscore-source-stats"
    variance_floor: float | None = None
    mmd_bandwidth: float | str = metrics.MEDIAN_HEURISTIC

    def __post_init__(self):
        mode = self.normalization.lower().replace("_", "-")
        if mode not in NORMALIZATION_MODES:
            raise ValueError(f"unknown normalization mode {self.normalization!r}; "
                             f"expected one of {', '.join(NORMALIZATION_MODES)}")
        object.__setattr__(self, "normalization", mode)

    @property
    def seed(self):
        return self.gan.seed

    def with_gan(self, **changes):
        return replace(self, gan=replace(self.gan, **changes))

    def to_dict(self):
        return {
            "gan": self.gan.to_dict(),
            "normalization": self.normalization,
            "variance_floor": self.variance_floor,
            "mmd_bandwidth": self.mmd_bandwidth,
        }


@dataclass(frozen=True)
class EvaluationReport:
    source_name: str
    target_name: str
    epochs: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    confusion: metrics.ConfusionMatrix
    mmd_before: float
    mmd_after: float
    seed: int
    normalization: dict
    config: dict

    def to_dict(self):
        return {
            "source": self.source_name,
            "target": self.target_name,
            "epochs": self.epochs,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "confusion": self.confusion.as_dict(),
            "mmd_before": self.mmd_before,
            "mmd_after": self.mmd_after,
            "seed": self.seed,
            "normalization": self.normalization,
            "config": self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_row(self):
        return [self.source_name, self.target_name, self.epochs, repr(self.precision),
                repr(self.recall), repr(self.f1), repr(self.accuracy), repr(self.mmd_before),
                repr(self.mmd_after), self.seed]


@dataclass
class PipelineResult:
    report: EvaluationReport
    model: adversarial.GanModel
    trace: adversarial.TrainingTrace
    nb_model: classifier.NbModel


def normalize(source, target, mode):
    """Apply the configured preprocessing; returns (source, target, description)."""
    if mode == "none":
        choice, info = normrules.NormalizationChoice.NO_NORM, {}
    elif mode == "zscore-source-stats":
        choice, info = normrules.NormalizationChoice.ZSCORE_SOURCE_STATS, {}
    else:
        sel = normrules.select_normalization(source, target)
        choice = normrules.NormalizationChoice(sel["choice"])
        info = {"rule": sel["rule"], "levels": sel["levels"]}
    s, t = normrules.apply_normalization(choice, source, target)
    return s, t, {"mode": mode, "choice": choice.value, **info}


def fit_pipeline(source, target, config):
    if source.n_features != target.n_features:
        raise DatasetError(f"feature width mismatch: source {source.name!r} has "
                           f"{source.n_features} features, target {target.name!r} has "
                           f"{target.n_features}")
    if source.n_instances == 0 or target.n_instances == 0:
        raise DatasetError("empty dataset")
    if not source.is_labeled:
        raise DatasetError(f"source {source.name!r} must be fully labeled")
    if not target.is_labeled:
        raise DatasetError(f"target {target.name!r} needs labels for scoring")

    src, tgt, norm_info = normalize(source, target, config.normalization)
    # everything up to scoring sees the target without labels
    unlabeled = tgt.strip_labels()
    gc = config.gan
    model = adversarial.build(src.n_features, gc.hidden_dims, gc.seed, gc.generator_output)
    if gc.epochs == 0:
        # no adaptation: the baseline scores the normalized target directly
        trace, adapted = adversarial.TrainingTrace(), unlabeled
    else:
        model, trace = adversarial.train(model, src, unlabeled, gc)
        adapted = adversarial.transform(model, unlabeled)

    nb = classifier.fit(src, config.variance_floor)
    predicted = classifier.predict_dataset(nb, adapted)
    # one bandwidth for both probes so before/after are on the same scale
    bandwidth = config.mmd_bandwidth
    if bandwidth == metrics.MEDIAN_HEURISTIC:
        bandwidth = metrics.median_bandwidth(unlabeled, src)
    mmd_before = metrics.mmd(unlabeled, src, bandwidth)
    mmd_after = mmd_before if gc.epochs == 0 else metrics.mmd(adapted, src, bandwidth)

    cm = metrics.confusion(predicted, target.labels)
    precision, recall, f1 = metrics.f_measure(cm)
    report = EvaluationReport(
        source_name=source.name,
        target_name=target.name,
        epochs=gc.epochs,
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=metrics.accuracy(cm),
        confusion=cm,
        mmd_before=mmd_before,
        mmd_after=mmd_after,
        seed=gc.seed,
        normalization=norm_info,
        config=config.to_dict(),
    )
    return PipelineResult(report, model, trace, nb)


def run_pipeline(source, target, config):
    return fit_pipeline(source, target, config).report


def sweep_seeds(epoch_list, base_seed):
    """base_seed + rank of each epoch count among the distinct requested counts.

    For an ascending list this is base_seed + position; keying on the count
    keeps a point's result independent of where it sits in the list.
    """
    ranks = {e: k for k, e in enumerate(sorted(set(epoch_list)))}
    return [base_seed + ranks[e] for e in epoch_list]


def epoch_sweep(source, target, epoch_list, config, max_workers=1):
    epoch_list = [int(e) for e in epoch_list]
    if any(e < 0 for e in epoch_list):
        raise ValueError("epoch counts must be >= 0")
    seeds = sweep_seeds(epoch_list, config.seed)
    configs = [config.with_gan(epochs=e, seed=s) for e, s in zip(epoch_list, seeds)]
    if max_workers and max_workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda c: run_pipeline(source, target, c), configs))
    return [run_pipeline(source, target, c) for c in configs]


def sweep_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()
