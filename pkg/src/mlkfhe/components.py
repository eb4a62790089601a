"""Component multi-label classifiers: binary relevance, chains and HOMER.

All fitted models expose predict_scores(X) -> (n, q) array of per-label
scores in [0, 1], in the original label order. Label assignment everywhere in
this package thresholds scores at 0.5 with ties mapping to relevant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import cluster_labels
from .learners import (
    BinaryLearnerSpec,
    FittedBinaryModel,
    constant_binary_model,
    fit_binary,
    spec_with,
)
from .rng import child_seed
from .validation import (
    as_binary_matrix,
    as_float_matrix,
    check_n_features,
    check_same_rows,
)

THRESHOLD = 0.5


def threshold_scores(scores) -> np.ndarray:
    """Binarize scores at 0.5; a score of exactly 0.5 counts as relevant."""
    return (np.asarray(scores) >= THRESHOLD).astype(np.int8)


@dataclass(eq=False)
class ConstantModel:
    """Predicts a fixed score row regardless of input."""

    scores: np.ndarray  # (q,)
    n_features_in: int

    @property
    def n_labels(self) -> int:
        return self.scores.shape[0]

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in)
        return np.tile(self.scores.astype(np.float64), (X.shape[0], 1))

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))


@dataclass(eq=False)
class BinaryRelevanceModel:
    """One independent binary model per label."""

    models: list
    n_features_in: int

    @property
    def n_labels(self) -> int:
        return len(self.models)

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in)
        return np.column_stack([m.predict_scores(X) for m in self.models])

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))


def train_binary_relevance(X, Y, sample_weight, spec: BinaryLearnerSpec,
                           rng: np.random.Generator) -> BinaryRelevanceModel:
    X = as_float_matrix(X)
    Y = as_binary_matrix(Y)
    check_same_rows(X, Y)
    models = [
        fit_binary(X, Y[:, j], sample_weight, spec_with(spec, seed=child_seed(rng)))
        for j in range(Y.shape[1])
    ]
    return BinaryRelevanceModel(models=models, n_features_in=X.shape[1])


@dataclass(eq=False)
class ChainModel:
    """Binary models linked in a fixed label order.

    models[l] predicts label order[l] from the original features concatenated
    with the l earlier labels in chain order. Training feeds ground-truth
    earlier labels; prediction feeds its own thresholded outputs.
    """

    order: np.ndarray  # permutation of 0..q-1
    models: list
    n_features_in: int

    @property
    def n_labels(self) -> int:
        return self.order.shape[0]

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in)
        n = X.shape[0]
        q = self.n_labels
        scores = np.empty((n, q), dtype=np.float64)
        prefix_bits = np.empty((n, q), dtype=np.float64)
        for l, model in enumerate(self.models):
            feats = np.hstack([X, prefix_bits[:, :l]])
            s = model.predict_scores(feats)
            scores[:, self.order[l]] = s
            prefix_bits[:, l] = threshold_scores(s)
        return scores

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))


def train_chain(X, Y, sample_weight, order, spec: BinaryLearnerSpec,
                rng: np.random.Generator) -> ChainModel:
    X = as_float_matrix(X)
    Y = as_binary_matrix(Y)
    check_same_rows(X, Y)
    q = Y.shape[1]
    order = np.asarray(order, dtype=np.intp)
    if order.shape != (q,) or not np.array_equal(np.sort(order), np.arange(q)):
        raise ValueError("order must be a permutation of 0..q-1")
    models = []
    for l in range(q):
        feats = np.hstack([X, Y[:, order[:l]].astype(np.float64)])
        models.append(
            fit_binary(feats, Y[:, order[l]], sample_weight,
                       spec_with(spec, seed=child_seed(rng)))
        )
    return ChainModel(order=order, models=models, n_features_in=X.shape[1])


@dataclass(eq=False)
class HomerNode:
    """One node of a label hierarchy.

    children[i] covers the label subset scored by child_models[i], a binary
    meta classifier answering "does this instance carry any label of that
    child". Leaves hold exactly one label and no models.
    """

    label_indices: np.ndarray
    children: list = field(default_factory=list)
    child_models: list = field(default_factory=list)
    n_train: int = 0
    train_indices: np.ndarray | None = field(default=None, compare=False)

    @property
    def is_leaf(self) -> bool:
        return len(self.children) == 0


@dataclass(eq=False)
class HomerModel:
    """Hierarchy of meta-label classifiers over a recursively clustered label set."""

    root: HomerNode
    n_labels: int
    n_features_in: int
    clustering: str
    n_clusters: int

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in)
        n = X.shape[0]
        out = np.zeros((n, self.n_labels), dtype=np.float64)
        self._descend(self.root, X, np.ones(n), np.ones(n, dtype=bool), out)
        return out

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))

    def _descend(self, node, X, path_product, alive, out):
        # A label's score is the product of meta scores along its path,
        # truncated after (and including) the first score below 0.5.
        for child, model in zip(node.children, node.child_models):
            s = model.predict_scores(X)
            product = np.where(alive, path_product * s, path_product)
            if child.is_leaf:
                out[:, child.label_indices[0]] = product
            else:
                self._descend(child, X, product, alive & (s >= THRESHOLD), out)


def train_homer(X, Y, sample_weight, clustering: str, n_clusters: int,
                spec: BinaryLearnerSpec, rng: np.random.Generator,
                keep_indices: bool = True) -> HomerModel:
    """Build the hierarchy recursively.

    Each node keeps only the datapoints carrying at least one of its labels
    (the root keeps everything); a node with no datapoints gets constant
    negative meta classifiers and random label splits for structure.
    """
    X = as_float_matrix(X)
    Y = as_binary_matrix(Y)
    check_same_rows(X, Y)
    q = Y.shape[1]
    if q < 2:
        raise ValueError("HOMER requires at least 2 labels")
    if sample_weight is None:
        sample_weight = np.full(X.shape[0], 1.0 / X.shape[0])
    sample_weight = np.asarray(sample_weight, dtype=np.float64)

    def build(rows: np.ndarray, labels: np.ndarray) -> HomerNode:
        node = HomerNode(
            label_indices=labels,
            n_train=int(rows.shape[0]),
            train_indices=rows if keep_indices else None,
        )
        if labels.shape[0] == 1:
            return node
        method = clustering if rows.shape[0] > 0 else "random"
        groups = cluster_labels(Y[rows], labels, method, n_clusters, rng)
        for group in groups:
            if rows.shape[0] == 0:
                model = constant_binary_model(0.0, X.shape[1])
                child_rows = rows
            else:
                meta = Y[np.ix_(rows, group)].any(axis=1)
                node_weight = sample_weight[rows]
                if node_weight.sum() <= 0:
                    # all surviving rows carry zero weight: give them equal say
                    node_weight = np.full(rows.shape[0], 1.0 / rows.shape[0])
                model = fit_binary(
                    X[rows], meta.astype(np.int8), node_weight,
                    spec_with(spec, seed=child_seed(rng)),
                )
                child_rows = rows[meta]
            node.child_models.append(model)
            node.children.append(build(child_rows, group))
        return node

    root = build(np.arange(X.shape[0]), np.arange(q))
    return HomerModel(
        root=root,
        n_labels=q,
        n_features_in=X.shape[1],
        clustering=clustering,
        n_clusters=int(n_clusters),
    )


def iter_nodes(node: HomerNode):
    """Yield every node of a hierarchy in depth-first order."""
    yield node
    for child in node.children:
        yield from iter_nodes(child)
