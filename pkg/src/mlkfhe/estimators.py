"""Scikit-learn style estimators wrapping the core models.

Every estimator follows the usual conventions: hyperparameters are stored
verbatim in __init__ (so get_params / set_params / clone work), all fitting
happens in fit(X, Y), and fitted state lives in trailing-underscore
attributes. Y is an (n, q) 0/1 indicator matrix; predict returns the same
shape thresholded at 0.5 (ties relevant) and predict_scores the raw [0, 1]
scores.

random_state defaults to 0 rather than None: reproducibility is part of the
package contract (serialized models, CLI runs and experiment tables must be
replayable bit for bit).
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .components import (
    ConstantModel,
    threshold_scores,
    train_binary_relevance,
    train_chain,
    train_homer,
)
from .clustering import CLUSTERING_METHODS
from .ensembles import train_bagged, train_kfhe
from .learners import BinaryLearnerSpec
from .rng import substream
from .validation import as_binary_matrix, as_float_matrix, check_same_rows


class MultiLabelClassifierBase(BaseEstimator, ClassifierMixin):
    """Shared predict plumbing for the fitted estimators."""

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                f"{type(self).__name__} is not fitted yet; call fit first"
            )

    def _validate_fit_inputs(self, X, Y):
        X = as_float_matrix(X)
        Y = as_binary_matrix(Y)
        check_same_rows(X, Y)
        self.n_features_in_ = X.shape[1]
        self.n_labels_ = Y.shape[1]
        return X, Y

    def _base_spec(self) -> BinaryLearnerSpec:
        learner = getattr(self, "learner", None)
        return learner if learner is not None else BinaryLearnerSpec()

    def predict_scores(self, X) -> np.ndarray:
        """Per-label scores in [0, 1], shape (n, q)."""
        self._check_fitted()
        return self.model_.predict_scores(X)

    def predict(self, X) -> np.ndarray:
        """0/1 label indicator matrix; scores of exactly 0.5 map to 1."""
        return threshold_scores(self.predict_scores(X))


class BinaryRelevance(MultiLabelClassifierBase):
    """Independent binary model per label.

    Parameters
    ----------
    learner : BinaryLearnerSpec or None
        Base learner settings; None means the defaults (linear kernel).
    random_state : int
        Seeds the per-label base learner substreams.
    """

    def __init__(self, learner=None, random_state=0):
        self.learner = learner
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        rng = substream(self.random_state, 0)
        self.model_ = train_binary_relevance(X, Y, None, self._base_spec(), rng)
        return self


class ClassifierChain(MultiLabelClassifierBase):
    """Binary models chained so earlier labels feed later ones.

    Parameters
    ----------
    order : sequence of int or None
        Chain order over label indices; None draws a random permutation from
        random_state.
    learner : BinaryLearnerSpec or None
        Base learner settings.
    random_state : int
    """

    def __init__(self, order=None, learner=None, random_state=0):
        self.order = order
        self.learner = learner
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        rng = substream(self.random_state, 0)
        order = self.order if self.order is not None else rng.permutation(Y.shape[1])
        self.model_ = train_chain(X, Y, None, order, self._base_spec(), rng)
        self.order_ = self.model_.order
        return self


class HomerClassifier(MultiLabelClassifierBase):
    """Hierarchy of meta-label classifiers over recursively clustered labels.

    Parameters
    ----------
    clustering : {'random', 'kmeans', 'balanced'} or None
        Label clustering method; None draws one at random.
    n_clusters : int or None
        Children per node; None draws from {2, ..., ceil(sqrt(q))}.
    learner : BinaryLearnerSpec or None
    random_state : int
    """

    def __init__(self, clustering=None, n_clusters=None, learner=None, random_state=0):
        self.clustering = clustering
        self.n_clusters = n_clusters
        self.learner = learner
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        rng = substream(self.random_state, 0)
        clustering = self.clustering
        if clustering is None:
            clustering = CLUSTERING_METHODS[rng.integers(len(CLUSTERING_METHODS))]
        n_clusters = self.n_clusters
        if n_clusters is None:
            k_max = max(2, math.ceil(math.sqrt(Y.shape[1])))
            n_clusters = int(rng.integers(2, k_max + 1))
        self.model_ = train_homer(
            X, Y, None, clustering, n_clusters, self._base_spec(), rng
        )
        self.clustering_ = clustering
        self.n_clusters_ = int(n_clusters)
        return self


class KfheEnsemble(MultiLabelClassifierBase):
    """Kalman-fused ensemble of HOMER or classifier-chain components.

    Components are trained sequentially on weighted resamples and fused with
    per-component Kalman gains; see the ensembles module for the filter
    details.

    Parameters
    ----------
    family : {'homer', 'cc'} or component family object
        What kind of component to draw and fit. A custom object with
        draw_params/fit is accepted (useful for stubbing in tests).
    n_components : int
        Number of fused components T on top of the initial model h_0.
    learner : BinaryLearnerSpec or None
        Base learner defaults; each component overrides the kernel with its
        own random draw.
    weighting : {'resample', 'direct'}
        How instance weights reach a component: a weighted bootstrap of size
        resample_factor * n (default) or direct per-instance weights.
    resample_factor : int
    random_state : int

    Attributes
    ----------
    gains_ : (n_components,) Kalman gains.
    history_ : per-iteration filter trace records.
    training_scores_ : final ensemble score matrix on the training set.
    """

    def __init__(self, family="homer", n_components=10, learner=None,
                 weighting="resample", resample_factor=2, random_state=0):
        self.family = family
        self.n_components = n_components
        self.learner = learner
        self.weighting = weighting
        self.resample_factor = resample_factor
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        self.model_ = train_kfhe(
            X, Y, self.n_components, self.family, self._base_spec(),
            seed=self.random_state, weighting=self.weighting,
            resample_factor=self.resample_factor,
        )
        self.gains_ = self.model_.gains
        self.history_ = self.model_.history
        self.training_scores_ = self.model_.training_scores
        return self


class BaggedEnsemble(MultiLabelClassifierBase):
    """Bagged ensemble of randomly configured HOMER or chain components.

    h_0 is trained on the full data; each further component on a uniform
    bootstrap of size resample_factor * n. Prediction averages all component
    scores.
    """

    def __init__(self, family="homer", n_components=10, learner=None,
                 resample_factor=2, random_state=0):
        self.family = family
        self.n_components = n_components
        self.learner = learner
        self.resample_factor = resample_factor
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        self.model_ = train_bagged(
            X, Y, self.n_components, self.family, self._base_spec(),
            seed=self.random_state, resample_factor=self.resample_factor,
        )
        return self


class PriorClassifier(MultiLabelClassifierBase):
    """Constant baseline scoring every label with its training prior."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = self._validate_fit_inputs(X, Y)
        self.model_ = ConstantModel(
            scores=Y.mean(axis=0).astype(np.float64),
            n_features_in=X.shape[1],
        )
        return self


# Registry used by the experiment driver and the CLI. Values are factories
# taking (n_components, learner, random_state).
ALGORITHMS = {
    "br": lambda T, learner, seed: BinaryRelevance(learner=learner, random_state=seed),
    "cc": lambda T, learner, seed: ClassifierChain(learner=learner, random_state=seed),
    "homer": lambda T, learner, seed: HomerClassifier(learner=learner, random_state=seed),
    "homer-k": lambda T, learner, seed: HomerClassifier(
        clustering="kmeans", learner=learner, random_state=seed),
    "homer-b": lambda T, learner, seed: HomerClassifier(
        clustering="balanced", learner=learner, random_state=seed),
    "kfhe-homer": lambda T, learner, seed: KfheEnsemble(
        family="homer", n_components=T, learner=learner, random_state=seed),
    "kfhe-cc": lambda T, learner, seed: KfheEnsemble(
        family="cc", n_components=T, learner=learner, random_state=seed),
    "e-homer": lambda T, learner, seed: BaggedEnsemble(
        family="homer", n_components=T, learner=learner, random_state=seed),
    "e-cc": lambda T, learner, seed: BaggedEnsemble(
        family="cc", n_components=T, learner=learner, random_state=seed),
    "dummy": lambda T, learner, seed: PriorClassifier(random_state=seed),
}


def make_algorithm(name: str, n_components: int = 10,
                   learner: BinaryLearnerSpec | None = None, random_state: int = 0):
    """Instantiate a registry algorithm by name."""
    try:
        factory = ALGORITHMS[name]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {name!r}; expected one of {sorted(ALGORITHMS)}"
        ) from None
    return factory(n_components, learner, random_state)
