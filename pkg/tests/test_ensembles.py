"""Tests for the Kalman-fused training loop, prediction replay and bagging."""

import numpy as np
import pytest

from mlkfhe.components import ConstantModel, threshold_scores
from mlkfhe.ensembles import (
    BaggedModel,
    KfheModel,
    measurement_average,
    train_bagged,
    train_kfhe,
    weight_measurement,
)
from mlkfhe.kalman import measurement_update
from tests.conftest import planted_dataset, random_label_matrix


class StubFamily:
    """Yields predetermined constant-score components: index 0 is h_0."""

    name = "stub"

    def __init__(self, score_rows):
        self.score_rows = [np.asarray(row, dtype=float) for row in score_rows]
        self.calls = 0

    def draw_params(self, rng, n_labels):
        return {"index": self.calls}

    def fit(self, X, Y, sample_weight, params, base_spec, rng):
        scores = self.score_rows[self.calls]
        self.calls += 1
        return ConstantModel(scores=scores, n_features_in=X.shape[1])


def _toy(n=1, q=1, fill=1):
    X = np.zeros((n, 1))
    Y = np.full((n, q), fill, dtype=np.int8)
    return X, Y


class TestHandTraces:
    def test_perfect_measurement_trace(self):
        # One instance, one effective label, true label 1. h0 scores 0.0,
        # h1 scores 1.0: z = 0.5, thresholded to 1, so r = 0, k = 1,
        # estimate 0.5, variance 0.
        X = np.zeros((1, 1))
        Y = np.array([[1, 1]], dtype=np.int8)
        family = StubFamily([[0.0, 0.0], [1.0, 1.0]])
        model = train_kfhe(X, Y, 1, family, seed=0)
        rec = model.history[0]
        assert rec.noise == 0.0
        assert rec.gain == 1.0
        assert rec.variance == 0.0
        np.testing.assert_allclose(model.training_scores, 0.5, atol=0)

    def test_quarter_loss_trace(self):
        # Four labels, one mismatching after thresholding: r = 0.25,
        # k = 1/shape1.25 = 0.8, p = 0.2.
        X = np.zeros((1, 1))
        Y = np.ones((1, 4), dtype=np.int8)
        family = StubFamily([[0.0] * 4, [1.0, 1.0, 1.0, 0.0]])
        model = train_kfhe(X, Y, 1, family, seed=0)
        rec = model.history[0]
        assert rec.noise == pytest.approx(0.25, abs=1e-15)
        assert rec.gain == pytest.approx(0.8, abs=1e-12)
        assert rec.variance == pytest.approx(0.2, abs=1e-12)

    def test_total_loss_gives_half_gain(self):
        # A measurement wrong everywhere when p = 1: r = 1, k = 0.5.
        X = np.zeros((1, 1))
        Y = np.ones((1, 2), dtype=np.int8)
        family = StubFamily([[0.0, 0.0], [0.0, 0.0]])
        model = train_kfhe(X, Y, 1, family, seed=0)
        assert model.history[0].noise == 1.0
        assert model.history[0].gain == 0.5


class TestTrainingLoop:
    def test_single_component_convex_combination(self):
        ds = planted_dataset(30, 4, 3, 0, seed=1)
        model = train_kfhe(ds.X, ds.Y, 1, "cc", seed=2)
        assert model.gains.shape == (1,)
        h0 = model.components[0].predict_scores(ds.X)
        z = measurement_average(model.components[1].predict_scores(ds.X), h0)
        final = model.training_scores
        assert np.all(final >= np.minimum(h0, z) - 1e-12)
        assert np.all(final <= np.maximum(h0, z) + 1e-12)

    def test_deterministic_given_seed(self):
        ds = planted_dataset(25, 4, 3, 0, seed=3)
        a = train_kfhe(ds.X, ds.Y, 3, "homer", seed=7)
        b = train_kfhe(ds.X, ds.Y, 3, "homer", seed=7)
        np.testing.assert_array_equal(a.gains, b.gains)
        np.testing.assert_array_equal(a.training_scores, b.training_scores)
        np.testing.assert_array_equal(a.predict_scores(ds.X), b.predict_scores(ds.X))

    def test_weight_state_stays_probability_vector(self):
        ds = planted_dataset(30, 4, 4, 0, seed=4)
        model = train_kfhe(ds.X, ds.Y, 5, "cc", seed=1)
        for rec in model.history:
            assert rec.weight_sum == pytest.approx(1.0, abs=1e-9)
            assert rec.weight_min >= 0.0

    def test_variances_nonincreasing(self):
        ds = planted_dataset(30, 4, 4, 0, seed=5)
        model = train_kfhe(ds.X, ds.Y, 6, "homer", seed=2)
        variances = [1.0] + [rec.variance for rec in model.history]
        weight_variances = [1.0] + [rec.weight_variance for rec in model.history]
        assert all(b <= a + 1e-15 for a, b in zip(variances, variances[1:]))
        assert all(b <= a + 1e-15 for a, b in zip(weight_variances, weight_variances[1:]))

    def test_direct_weighting_mode_runs(self):
        ds = planted_dataset(25, 3, 3, 0, seed=6)
        model = train_kfhe(ds.X, ds.Y, 2, "cc", seed=0, weighting="direct")
        assert model.weighting == "direct"
        assert model.predict_scores(ds.X).shape == ds.Y.shape

    def test_invalid_arguments_rejected(self):
        ds = planted_dataset(10, 3, 2, 0, seed=7)
        with pytest.raises(ValueError):
            train_kfhe(ds.X, ds.Y, 0, "cc")
        with pytest.raises(ValueError):
            train_kfhe(ds.X, ds.Y, 1, "nope")
        with pytest.raises(ValueError):
            train_kfhe(ds.X, ds.Y, 1, "cc", weighting="osmosis")


class TestWeightMeasurement:
    def test_misclassified_instances_gain_weight_share(self):
        w = np.full(4, 0.25)
        losses = np.array([0.0, 0.5, 1.0, 0.0])
        z = weight_measurement(w, losses)
        assert z.sum() == pytest.approx(1.0, abs=1e-12)
        assert z[2] > z[1] > z[0]
        assert z[0] == z[3]

    def test_multiplier_monotone_in_loss(self):
        rng = np.random.default_rng(0)
        w = rng.random(10)
        w /= w.sum()
        losses = rng.random(10)
        z = weight_measurement(w, losses)
        multipliers = z / w
        order = np.argsort(losses)
        assert np.all(np.diff(multipliers[order]) >= -1e-12)

    def test_weights_concentrate_on_persistently_missed_instance(self):
        # Components that always get instance 0 wrong and the rest right:
        # the weight filter should push mass toward instance 0.
        n, q = 5, 2
        X = np.zeros((n, 1))
        Y = np.zeros((n, q), dtype=np.int8)
        Y[0] = 1

        class RowAwareModel:
            n_features_in = 1

            def predict_scores(self, Xq):
                out = Y.astype(float)[: Xq.shape[0]].copy()
                out[0] = 1.0 - out[0]
                return out

        class MissFirstFamily:
            name = "stub"

            def draw_params(self, rng, n_labels):
                return {}

            def fit(self, X_fit, Y_fit, sample_weight, params, base_spec, rng):
                return RowAwareModel()

        model = train_kfhe(X, Y, 4, MissFirstFamily(), seed=0)
        assert model.final_weights[0] > model.final_weights[1:].max()
        assert model.final_weights.sum() == pytest.approx(1.0, abs=1e-9)


class TestPredictionReplay:
    def test_replay_matches_training_state(self):
        for family in ("homer", "cc"):
            ds = planted_dataset(30, 4, 4, 0, seed=8)
            model = train_kfhe(ds.X, ds.Y, 4, family, seed=3)
            replay = model.predict_scores(ds.X)
            np.testing.assert_allclose(replay, model.training_scores, atol=1e-12)

    def test_independent_replay_oracle(self):
        # Re-run the fusion recursion directly from stored pieces.
        ds = planted_dataset(25, 3, 3, 0, seed=9)
        model = train_kfhe(ds.X, ds.Y, 3, "cc", seed=4)
        estimate = model.components[0].predict_scores(ds.X)
        for component, gain in zip(model.components[1:], model.gains):
            z = (component.predict_scores(ds.X) + estimate) / 2.0
            estimate = estimate + gain * (z - estimate)
        np.testing.assert_allclose(estimate, model.predict_scores(ds.X), atol=0)

    def test_empty_component_list_returns_h0(self):
        h0 = ConstantModel(scores=np.array([0.2, 0.9]), n_features_in=1)
        model = KfheModel(
            family="stub", components=[h0], gains=np.zeros(0), param_draws=[{}],
            seed=0, n_labels=2, n_features_in=1,
        )
        np.testing.assert_array_equal(
            model.predict_scores(np.zeros((3, 1))),
            h0.predict_scores(np.zeros((3, 1))),
        )

    def test_zero_gains_ignore_components(self):
        h0 = ConstantModel(scores=np.array([0.2, 0.9]), n_features_in=1)
        h1 = ConstantModel(scores=np.array([0.99, 0.01]), n_features_in=1)
        model = KfheModel(
            family="stub", components=[h0, h1], gains=np.zeros(1),
            param_draws=[{}, {}], seed=0, n_labels=2, n_features_in=1,
        )
        np.testing.assert_array_equal(
            model.predict_scores(np.zeros((2, 1))),
            h0.predict_scores(np.zeros((2, 1))),
        )

    def test_component_order_matters(self):
        h0 = ConstantModel(scores=np.array([0.5]), n_features_in=1)
        a = ConstantModel(scores=np.array([1.0]), n_features_in=1)
        b = ConstantModel(scores=np.array([0.0]), n_features_in=1)
        gains = np.array([0.9, 0.2])
        forward = KfheModel(family="stub", components=[h0, a, b], gains=gains,
                            param_draws=[{}] * 3, seed=0, n_labels=1, n_features_in=1)
        swapped = KfheModel(family="stub", components=[h0, b, a], gains=gains,
                            param_draws=[{}] * 3, seed=0, n_labels=1, n_features_in=1)
        x = np.zeros((1, 1))
        assert not np.allclose(forward.predict_scores(x), swapped.predict_scores(x))


class TestBagged:
    def test_component_count(self):
        ds = planted_dataset(20, 3, 2, 0, seed=10)
        model = train_bagged(ds.X, ds.Y, 1, "cc", seed=0)
        assert len(model.components) == 2

    def test_bootstrap_components_see_double_sized_multiset(self):
        sizes = []

        class RecordingFamily(StubFamily):
            def fit(self, X, Y, sample_weight, params, base_spec, rng):
                sizes.append(X.shape[0])
                return super().fit(X, Y, sample_weight, params, base_spec, rng)

        ds = planted_dataset(20, 3, 2, 0, seed=11)
        train_bagged(ds.X, ds.Y, 2, RecordingFamily([[0.5, 0.5]] * 3), seed=9)
        # h_0 on the full 20 rows, each bootstrap component on 2n = 40 rows
        # with duplicates (a 40-draw from 20 items repeats with certainty).
        assert sizes == [20, 40, 40]

    def test_resample_components_see_weighted_double_multiset(self):
        sizes = []

        class RecordingFamily(StubFamily):
            def fit(self, X, Y, sample_weight, params, base_spec, rng):
                sizes.append(X.shape[0])
                return super().fit(X, Y, sample_weight, params, base_spec, rng)

        ds = planted_dataset(20, 3, 2, 0, seed=11)
        train_kfhe(ds.X, ds.Y, 2, RecordingFamily([[0.5, 0.5]] * 3), seed=9)
        assert sizes == [20, 40, 40]

    def test_mean_of_stub_components(self):
        h0 = ConstantModel(scores=np.array([0.5]), n_features_in=1)
        h1 = ConstantModel(scores=np.array([0.2]), n_features_in=1)
        h2 = ConstantModel(scores=np.array([0.8]), n_features_in=1)
        model = BaggedModel(family="stub", components=[h0, h1, h2],
                            param_draws=[{}] * 3, seed=0, n_labels=1, n_features_in=1)
        np.testing.assert_allclose(model.predict_scores(np.zeros((1, 1))), 0.5, atol=1e-15)

    def test_identical_constant_components_pass_through(self):
        parts = [ConstantModel(scores=np.array([0.3, 0.7]), n_features_in=1)
                 for _ in range(3)]
        model = BaggedModel(family="stub", components=parts, param_draws=[{}] * 3,
                            seed=0, n_labels=2, n_features_in=1)
        np.testing.assert_allclose(
            model.predict_scores(np.zeros((2, 1))), [[0.3, 0.7]] * 2, atol=1e-15
        )

    def test_mean_bounded_by_component_range(self):
        ds = planted_dataset(25, 3, 3, 0, seed=12)
        model = train_bagged(ds.X, ds.Y, 3, "homer", seed=1)
        per_component = np.stack([c.predict_scores(ds.X) for c in model.components])
        mean = model.predict_scores(ds.X)
        assert np.all(mean >= per_component.min(axis=0) - 1e-12)
        assert np.all(mean <= per_component.max(axis=0) + 1e-12)

    def test_component_order_invariance(self):
        ds = planted_dataset(20, 3, 2, 0, seed=13)
        model = train_bagged(ds.X, ds.Y, 3, "cc", seed=2)
        shuffled = BaggedModel(
            family=model.family,
            components=[model.components[0]] + model.components[1:][::-1],
            param_draws=model.param_draws, seed=model.seed,
            n_labels=model.n_labels, n_features_in=model.n_features_in,
        )
        np.testing.assert_allclose(
            model.predict_scores(ds.X), shuffled.predict_scores(ds.X), atol=1e-12
        )

    def test_deterministic_given_seed(self):
        ds = planted_dataset(20, 3, 2, 0, seed=14)
        a = train_bagged(ds.X, ds.Y, 2, "homer", seed=5)
        b = train_bagged(ds.X, ds.Y, 2, "homer", seed=5)
        np.testing.assert_array_equal(a.predict_scores(ds.X), b.predict_scores(ds.X))


class TestEnsembleQuality:
    def test_fused_ensemble_tracks_training_labels(self):
        # On learnable data the fused training-set estimate should classify
        # clearly better than chance.
        ds = planted_dataset(60, 5, 3, 3, seed=15)
        model = train_kfhe(ds.X, ds.Y, 5, "cc", seed=6)
        predicted = threshold_scores(model.training_scores)
        accuracy = float((predicted == ds.Y).mean())
        assert accuracy > 0.8
