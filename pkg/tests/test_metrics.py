"""Tests for metrics and dataset statistics."""

import numpy as np
import pytest

from mlkfhe import Dataset
from mlkfhe.metrics import (
    MetricReport,
    dataset_stats,
    hamming_loss,
    instance_hamming_losses,
    label_confusion,
    macro_f,
    per_instance_hamming,
)


class TestHammingLoss:
    def test_identical_is_zero(self, toy_3x2):
        Y, _ = toy_3x2
        assert hamming_loss(Y, Y) == 0.0

    def test_hand_counted_toy(self, toy_3x2):
        Y_true, Y_pred = toy_3x2
        assert hamming_loss(Y_true, Y_pred) == pytest.approx(2 / 6, abs=1e-15)

    def test_complement_is_one(self, toy_3x2):
        Y, _ = toy_3x2
        assert hamming_loss(Y, 1 - Y) == 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hamming_loss(np.zeros((2, 3), dtype=int), np.zeros((2, 4), dtype=int))


class TestPerInstanceHamming:
    def test_equal_rows_zero(self):
        assert per_instance_hamming([1, 0, 1], [1, 0, 1]) == 0.0

    def test_hand_counted_row(self):
        assert per_instance_hamming([1, 0, 1], [0, 0, 1]) == pytest.approx(1 / 3, abs=1e-15)

    def test_full_mismatch_one(self):
        assert per_instance_hamming([1, 0], [0, 1]) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            per_instance_hamming([1, 0], [1, 0, 1])

    def test_composition_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n, q = rng.integers(1, 15), rng.integers(1, 8)
            Yt = (rng.random((n, q)) < 0.5).astype(int)
            Yp = (rng.random((n, q)) < 0.5).astype(int)
            rowwise = [per_instance_hamming(Yt[i], Yp[i]) for i in range(n)]
            assert hamming_loss(Yt, Yp) == pytest.approx(np.mean(rowwise), abs=1e-12)
            np.testing.assert_allclose(instance_hamming_losses(Yt, Yp), rowwise)


class TestMacroF:
    def test_hand_counted_toy(self, toy_3x2):
        Y_true, Y_pred = toy_3x2
        macro, per_label = macro_f(Y_true, Y_pred)
        np.testing.assert_allclose(per_label, [0.8, 2 / 3], atol=1e-12)
        assert macro == pytest.approx((0.8 + 2 / 3) / 2, abs=1e-12)

    def test_perfect_prediction_is_one(self, toy_3x2):
        Y, _ = toy_3x2
        macro, _ = macro_f(Y, Y)
        assert macro == 1.0

    def test_all_negative_degenerate_rule(self):
        Y = np.zeros((4, 3), dtype=int)
        macro, per_label = macro_f(Y, Y)
        assert macro == 1.0
        np.testing.assert_array_equal(per_label, 1.0)

    def test_zero_tp_with_errors_scores_zero(self):
        Y_true = np.array([[1], [1], [0]])
        Y_pred = np.array([[0], [0], [1]])
        _, per_label = macro_f(Y_true, Y_pred)
        assert per_label[0] == 0.0

    def test_column_permutation_invariance(self):
        rng = np.random.default_rng(1)
        Yt = (rng.random((20, 5)) < 0.4).astype(int)
        Yp = (rng.random((20, 5)) < 0.4).astype(int)
        perm = rng.permutation(5)
        a, _ = macro_f(Yt, Yp)
        b, _ = macro_f(Yt[:, perm], Yp[:, perm])
        assert a == pytest.approx(b, abs=1e-15)

    def test_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            Yt = (rng.random((10, 4)) < 0.5).astype(int)
            Yp = (rng.random((10, 4)) < 0.5).astype(int)
            macro, per_label = macro_f(Yt, Yp)
            assert 0.0 <= macro <= 1.0
            assert np.all(per_label >= 0) and np.all(per_label <= 1)


class TestConfusionAndReport:
    def test_confusion_counts(self, toy_3x2):
        Y_true, Y_pred = toy_3x2
        conf = label_confusion(Y_true, Y_pred)
        np.testing.assert_array_equal(conf[0], [2, 1, 0, 0])  # TP FP FN TN
        np.testing.assert_array_equal(conf[1], [1, 0, 1, 1])

    def test_report_consistency(self, toy_3x2):
        Y_true, Y_pred = toy_3x2
        report = MetricReport.from_predictions(Y_true, Y_pred)
        conf = report.confusion
        total_errors = conf[:, 1].sum() + conf[:, 2].sum()
        assert report.hamming_loss == pytest.approx(
            total_errors / Y_true.size, abs=1e-15
        )
        assert report.macro_f == pytest.approx(report.per_label_f.mean(), abs=1e-15)


class TestDatasetStats:
    def _fixture(self):
        # Label counts 8, 4, 2, 2 over 10 instances: cardinality 1.6,
        # IRLbl = (1, 2, 4, 4), MeanIR = 2.75.
        Y = np.zeros((10, 4), dtype=np.int8)
        Y[0:8, 0] = 1
        Y[0:4, 1] = 1
        Y[4:6, 2] = 1
        Y[6:8, 3] = 1
        X = np.arange(20, dtype=float).reshape(10, 2)
        return Dataset(X=X, Y=Y, name="fixture")

    def test_hand_counted_fixture(self):
        stats = dataset_stats(self._fixture())
        assert stats.n_instances == 10
        assert stats.n_features == 2
        assert stats.n_labels == 4
        assert stats.cardinality == pytest.approx(1.6, abs=1e-12)
        assert stats.mean_ir == pytest.approx(2.75, abs=1e-12)

    def test_single_label_rows_cardinality_one(self):
        Y = np.eye(6, 3, dtype=np.int8)[np.arange(6) % 3]
        ds = Dataset(X=np.zeros((6, 1)), Y=Y)
        assert dataset_stats(ds).cardinality == pytest.approx(1.0)

    def test_balanced_labels_mean_ir_one(self):
        Y = np.ones((8, 3), dtype=np.int8)
        ds = Dataset(X=np.zeros((8, 1)), Y=Y)
        assert dataset_stats(ds).mean_ir == pytest.approx(1.0)

    def test_zero_count_label_excluded_with_warning(self):
        Y = np.zeros((6, 3), dtype=np.int8)
        Y[:, 0] = 1
        Y[0:3, 1] = 1
        ds = Dataset(X=np.zeros((6, 1)), Y=Y)
        with pytest.warns(UserWarning):
            stats = dataset_stats(ds)
        assert stats.mean_ir == pytest.approx((1.0 + 2.0) / 2, abs=1e-12)
