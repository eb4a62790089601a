"""Kalman-fused multi-label ensembles with HOMER and classifier-chain components."""

__version__ = "0.1.0"

from .kalman import kalman_gain, measurement_update, variance_update
from .learners import BinaryLearnerSpec, FittedBinaryModel, fit_binary
from .clustering import cluster_labels
from .components import (
    BinaryRelevanceModel,
    ChainModel,
    ConstantModel,
    HomerModel,
    threshold_scores,
)
from .ensembles import (
    BaggedModel,
    ChainFamily,
    HomerFamily,
    KfheModel,
    train_bagged,
    train_kfhe,
)
from .estimators import (
    ALGORITHMS,
    BaggedEnsemble,
    BinaryRelevance,
    ClassifierChain,
    HomerClassifier,
    KfheEnsemble,
    PriorClassifier,
    make_algorithm,
)
from .metrics import (
    DatasetStats,
    MetricReport,
    dataset_stats,
    hamming_loss,
    macro_f,
    per_instance_hamming,
)
from .significance import friedman_finner, wilcoxon_signed_rank
from .datasets import Dataset, DatasetFormatError, load_dataset, load_features, save_csv
from .stratification import (
    FoldAssignment,
    iterative_stratification,
    label_proportion_deviation,
    random_folds,
)
from .experiments import (
    BenchmarkTables,
    CellResult,
    ExperimentConfig,
    run_cv_experiment,
    summarize_results,
)
from .serialize import load_model, save_model

__all__ = [
    "ALGORITHMS",
    "BaggedEnsemble",
    "BaggedModel",
    "BenchmarkTables",
    "BinaryLearnerSpec",
    "BinaryRelevance",
    "BinaryRelevanceModel",
    "CellResult",
    "ChainFamily",
    "ChainModel",
    "ClassifierChain",
    "ConstantModel",
    "Dataset",
    "DatasetFormatError",
    "DatasetStats",
    "ExperimentConfig",
    "FittedBinaryModel",
    "FoldAssignment",
    "HomerClassifier",
    "HomerFamily",
    "HomerModel",
    "KfheEnsemble",
    "KfheModel",
    "MetricReport",
    "PriorClassifier",
    "cluster_labels",
    "dataset_stats",
    "fit_binary",
    "friedman_finner",
    "hamming_loss",
    "iterative_stratification",
    "kalman_gain",
    "label_proportion_deviation",
    "load_dataset",
    "load_features",
    "load_model",
    "macro_f",
    "make_algorithm",
    "measurement_update",
    "per_instance_hamming",
    "random_folds",
    "run_cv_experiment",
    "save_csv",
    "save_model",
    "summarize_results",
    "threshold_scores",
    "train_bagged",
    "train_kfhe",
    "variance_update",
    "wilcoxon_signed_rank",
]
