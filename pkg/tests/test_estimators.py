"""Tests for the sklearn-facing estimator layer."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mlkfhe import (
    BaggedEnsemble,
    BinaryRelevance,
    ClassifierChain,
    HomerClassifier,
    KfheEnsemble,
    PriorClassifier,
    make_algorithm,
)
from mlkfhe.estimators import ALGORITHMS
from tests.conftest import planted_dataset

ALL_CLASSES = [
    BinaryRelevance,
    ClassifierChain,
    HomerClassifier,
    KfheEnsemble,
    BaggedEnsemble,
    PriorClassifier,
]


@pytest.fixture(scope="module")
def small_data():
    ds = planted_dataset(40, 4, 2, 2, seed=0)
    return ds.X, ds.Y


class TestSklearnProtocol:
    @pytest.mark.parametrize("cls", ALL_CLASSES)
    def test_get_set_params_round_trip(self, cls):
        est = cls()
        params = est.get_params()
        est.set_params(**params)
        assert est.get_params() == params

    @pytest.mark.parametrize("cls", ALL_CLASSES)
    def test_clone(self, cls):
        est = cls(random_state=3)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    @pytest.mark.parametrize("cls", ALL_CLASSES)
    def test_predict_before_fit_raises(self, cls, small_data):
        X, _ = small_data
        with pytest.raises(NotFittedError):
            cls().predict(X)

    @pytest.mark.parametrize("cls", ALL_CLASSES)
    def test_fit_predict_shapes(self, cls, small_data):
        X, Y = small_data
        est = cls(random_state=1) if "random_state" in cls().get_params() else cls()
        est.fit(X, Y)
        scores = est.predict_scores(X)
        predicted = est.predict(X)
        assert scores.shape == Y.shape
        assert predicted.shape == Y.shape
        assert np.all(scores >= 0) and np.all(scores <= 1)
        assert set(np.unique(predicted)) <= {0, 1}
        assert est.n_features_in_ == X.shape[1]
        assert est.n_labels_ == Y.shape[1]

    @pytest.mark.parametrize("cls", ALL_CLASSES)
    def test_seed_reproducibility(self, cls, small_data):
        X, Y = small_data
        a = cls(random_state=7).fit(X, Y)
        b = cls(random_state=7).fit(X, Y)
        np.testing.assert_array_equal(a.predict_scores(X), b.predict_scores(X))


class TestBehaviours:
    def test_kfhe_exposes_filter_state(self, small_data):
        X, Y = small_data
        est = KfheEnsemble(family="cc", n_components=3, random_state=0).fit(X, Y)
        assert est.gains_.shape == (3,)
        assert np.all(est.gains_ >= 0) and np.all(est.gains_ <= 1)
        assert len(est.history_) == 3
        assert est.training_scores_.shape == Y.shape

    def test_homer_draws_missing_structure(self, small_data):
        X, Y = small_data
        est = HomerClassifier(random_state=5).fit(X, Y)
        assert est.clustering_ in ("random", "kmeans", "balanced")
        assert est.n_clusters_ >= 2
        fixed = HomerClassifier(clustering="kmeans", n_clusters=2, random_state=5).fit(X, Y)
        assert fixed.clustering_ == "kmeans"
        assert fixed.n_clusters_ == 2

    def test_chain_respects_explicit_order(self, small_data):
        X, Y = small_data
        order = [3, 2, 1, 0]
        est = ClassifierChain(order=order, random_state=0).fit(X, Y)
        np.testing.assert_array_equal(est.order_, order)

    def test_prior_classifier_scores_are_priors(self, small_data):
        X, Y = small_data
        est = PriorClassifier().fit(X, Y)
        np.testing.assert_allclose(
            est.predict_scores(X[:3]), np.tile(Y.mean(axis=0), (3, 1))
        )

    def test_feature_count_checked_at_predict(self, small_data):
        X, Y = small_data
        est = BinaryRelevance().fit(X, Y)
        with pytest.raises(ValueError):
            est.predict(np.zeros((2, X.shape[1] + 1)))


class TestRegistry:
    def test_all_names_construct_and_fit(self, small_data):
        X, Y = small_data
        for name in ALGORITHMS:
            est = make_algorithm(name, n_components=1, random_state=0)
            est.fit(X, Y)
            assert est.predict(X).shape == Y.shape

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            make_algorithm("adaboost")
