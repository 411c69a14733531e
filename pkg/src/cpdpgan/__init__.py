"""Cross-project defect prediction with adversarial domain adaptation.

Target-project metric vectors are pushed toward the source project's
distribution by a generator trained against a discriminator; a Gaussian
Naive Bayes model fit on labeled source data then classifies the
transformed target instances.
"""

from ._kernels import backend
from .classifier import NbModel
from .dataset import DatasetError, Label, ProjectDataset, load_csv, save_csv, stats, synthesize
from .gan import GanConfig, GanModel, LossVariant
from .pipeline import EvaluationReport, PipelineConfig, epoch_sweep, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "DatasetError", "EvaluationReport", "GanConfig", "GanModel", "Label", "LossVariant",
    "NbModel", "PipelineConfig", "ProjectDataset", "backend", "epoch_sweep", "load_csv",
    "run_pipeline", "save_csv", "stats", "synthesize",
]
