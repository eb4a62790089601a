"""Multi-label evaluation metrics and dataset statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .validation import as_binary_matrix


def _check_pair(Y_true, Y_pred):
    Y_true = as_binary_matrix(Y_true, "Y_true")
    Y_pred = as_binary_matrix(Y_pred, "Y_pred")
    if Y_true.shape != Y_pred.shape:
        raise ValueError(
            f"label matrix shapes differ: {Y_true.shape} vs {Y_pred.shape}"
        )
    return Y_true, Y_pred


def hamming_loss(Y_true, Y_pred) -> float:
    """Fraction of mismatched label cells over n * q."""
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    return float(np.mean(Y_true != Y_pred))


def per_instance_hamming(y_true_row, y_pred_row) -> float:
    """Fraction of mismatched labels for a single instance."""
    a = np.asarray(y_true_row).ravel()
    b = np.asarray(y_pred_row).ravel()
    if a.shape != b.shape:
        raise ValueError(f"label row lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(np.mean(a != b))


def instance_hamming_losses(Y_true, Y_pred) -> np.ndarray:
    """Per-instance Hamming losses as a length-n vector."""
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    return np.mean(Y_true != Y_pred, axis=1)


def label_confusion(Y_true, Y_pred) -> np.ndarray:
    """Per-label confusion counts, one row (TP, FP, FN, TN) per label."""
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    t = Y_true.astype(bool)
    p = Y_pred.astype(bool)
    tp = (t & p).sum(axis=0)
    fp = (~t & p).sum(axis=0)
    fn = (t & ~p).sum(axis=0)
    tn = (~t & ~p).sum(axis=0)
    return np.column_stack([tp, fp, fn, tn]).astype(np.int64)


def macro_f(Y_true, Y_pred):
    """Label-based macro-averaged F1 and the per-label F1 vector.

    A label with TP = FP = FN = 0 is vacuously perfect and scores 1; a label
    with TP = 0 but errors scores 0.
    """
    conf = label_confusion(Y_true, Y_pred)
    tp, fp, fn = conf[:, 0], conf[:, 1], conf[:, 2]
    denom = 2 * tp + fp + fn
    per_label = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 1.0)
    return float(per_label.mean()), per_label


@dataclass
class MetricReport:
    """Evaluation summary for one (dataset, algorithm, fold) cell."""

    hamming_loss: float
    macro_f: float
    per_label_f: np.ndarray
    confusion: np.ndarray  # (q, 4) TP FP FN TN

    @classmethod
    def from_predictions(cls, Y_true, Y_pred) -> "MetricReport":
        macro, per_label = macro_f(Y_true, Y_pred)
        return cls(
            hamming_loss=hamming_loss(Y_true, Y_pred),
            macro_f=macro,
            per_label_f=per_label,
            confusion=label_confusion(Y_true, Y_pred),
        )


@dataclass
class DatasetStats:
    """Size and imbalance descriptors of a multi-label dataset."""

    n_instances: int
    n_features: int
    n_labels: int
    cardinality: float
    mean_ir: float


def dataset_stats(dataset) -> DatasetStats:
    """Instance/feature/label counts, label cardinality and mean imbalance ratio.

    IRLbl(j) = max_j' count(j') / count(j); MeanIR averages it over labels
    with at least one positive. Labels without positives are excluded with a
    warning.
    """
    Y = dataset.Y
    counts = Y.sum(axis=0).astype(np.float64)
    positive = counts > 0
    if not positive.all():
        missing = [dataset.label_names[j] for j in np.flatnonzero(~positive)]
        warnings.warn(
            f"labels without positive instances excluded from MeanIR: {missing}",
            stacklevel=2,
        )
    if positive.any():
        mean_ir = float(np.mean(counts.max() / counts[positive]))
    else:
        mean_ir = float("nan")
    return DatasetStats(
        n_instances=dataset.n_instances,
        n_features=dataset.n_features,
        n_labels=dataset.n_labels,
        cardinality=float(Y.sum() / Y.shape[0]),
        mean_ir=mean_ir,
    )
