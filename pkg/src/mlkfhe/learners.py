"""Weighted binary probabilistic base learners.

Every multi-label component in this package bottoms out in a weighted,
L2-regularized logistic model producing calibrated scores in [0, 1]. Two
kernels are supported: "linear" fits directly on the inputs, "radial" first
maps inputs through a seeded random-Fourier approximation of the kernel
exp(-gamma * ||x - x'||^2) and fits linearly on the mapped features.

Training is deterministic full-batch gradient descent. The step size is the
configured learning_rate divided by an upper bound on the loss curvature
(0.25 * weighted augmented row-norm sum + lambda), which makes the loss
monotone nonincreasing, and is further shrunk by 1 / (1 + lr_decay * epoch).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .validation import (
    as_binary_vector,
    as_float_matrix,
    as_weight_vector,
    check_n_features,
)

KERNELS = ("linear", "radial")


@dataclass(frozen=True)
class BinaryLearnerSpec:
    """Hyperparameters of one binary fit.

    rff_dim and rff_gamma only matter for the radial kernel; rff_gamma=None
    means 1 / n_features of the data the model is fitted on.
    """

    kernel: str = "linear"
    reg_lambda: float = 1e-3
    rff_dim: int = 256
    rff_gamma: float | None = None
    learning_rate: float = 1.0
    lr_decay: float = 0.0
    max_epochs: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.reg_lambda <= 0:
            raise ValueError("reg_lambda must be positive")
        if self.rff_dim < 1:
            raise ValueError("rff_dim must be a positive integer")
        if self.rff_gamma is not None and self.rff_gamma <= 0:
            raise ValueError("rff_gamma must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be a positive integer")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.lr_decay < 0:
            raise ValueError("lr_decay must be nonnegative")


@dataclass(eq=False)
class RadialFeatureMap:
    """Stored random-Fourier projection: z(x) = sqrt(2/D) cos(x W + b)."""

    weights: np.ndarray  # (n_features, rff_dim)
    offsets: np.ndarray  # (rff_dim,)
    gamma: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        d = self.weights.shape[1]
        return np.sqrt(2.0 / d) * np.cos(X @ self.weights + self.offsets)


def make_radial_map(n_features: int, rff_dim: int, gamma: float, seed: int) -> RadialFeatureMap:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    weights = rng.normal(0.0, np.sqrt(2.0 * gamma), size=(n_features, rff_dim))
    offsets = rng.uniform(0.0, 2.0 * np.pi, size=rff_dim)
    return RadialFeatureMap(weights=weights, offsets=offsets, gamma=float(gamma))


@dataclass(eq=False)
class FittedBinaryModel:
    """A fitted (possibly constant) binary scorer.

    constant is set for degenerate fits (single-class targets, empty nodes);
    it short-circuits prediction to that exact value.
    """

    weights: np.ndarray
    bias: float
    feature_map: RadialFeatureMap | None
    n_features_in: int
    constant: float | None = None
    final_loss: float = field(default=float("nan"), compare=False)

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in)
        if self.constant is not None:
            return np.full(X.shape[0], self.constant, dtype=np.float64)
        Z = self.feature_map.transform(X) if self.feature_map is not None else X
        return expit(Z @ self.weights + self.bias)

    def predict_score(self, x) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        return float(self.predict_scores(x.reshape(1, -1))[0])


def constant_binary_model(score: float, n_features_in: int) -> FittedBinaryModel:
    score = float(score)
    if not 0.0 <= score <= 1.0:
        raise ValueError("constant score must lie in [0, 1]")
    return FittedBinaryModel(
        weights=np.zeros(0),
        bias=0.0,
        feature_map=None,
        n_features_in=int(n_features_in),
        constant=score,
    )


def weighted_logistic_loss(weights, bias, Z, y, sample_weight, reg_lambda):
    """Loss and analytic gradient of the weighted regularized logistic loss.

    loss = sum_i c_i * log(1 + exp(-(2 y_i - 1) * (z_i . w + b)))
           + reg_lambda / 2 * ||w||^2

    with c the (already normalized) instance weights; the bias is not
    regularized. Returns (loss, grad_weights, grad_bias).
    """
    margins = Z @ weights + bias
    signed = (1.0 - 2.0 * y) * margins
    loss = float(sample_weight @ np.logaddexp(0.0, signed))
    loss += 0.5 * reg_lambda * float(weights @ weights)
    probs = expit(margins)
    g = sample_weight * (probs - y)
    grad_w = Z.T @ g + reg_lambda * weights
    grad_b = float(g.sum())
    return loss, grad_w, grad_b


def fit_binary(X, y, sample_weight=None, spec: BinaryLearnerSpec | None = None) -> FittedBinaryModel:
    """Fit a weighted binary model per spec. Deterministic for a fixed spec.

    Degenerate targets (one class only) yield a constant model emitting the
    weighted class prior. A zero total weight is an error.
    """
    if spec is None:
        spec = BinaryLearnerSpec()
    X = as_float_matrix(X)
    y = as_binary_vector(y)
    n, d = X.shape
    if y.shape[0] != n:
        raise ValueError(f"y has length {y.shape[0]}, expected {n}")
    if sample_weight is None:
        sample_weight = np.full(n, 1.0 / n)
    weights = as_weight_vector(sample_weight, n)
    c = weights / weights.sum()

    if np.all(y == y[0]):
        model = constant_binary_model(float(y[0]), d)
        model.final_loss = 0.0
        return model

    feature_map = None
    Z = X
    if spec.kernel == "radial":
        gamma = spec.rff_gamma if spec.rff_gamma is not None else 1.0 / d
        feature_map = make_radial_map(d, spec.rff_dim, gamma, spec.seed)
        Z = feature_map.transform(X)

    # Curvature bound over the bias-augmented design; 1/L steps descend.
    curvature = 0.25 * float(c @ (np.einsum("ij,ij->i", Z, Z) + 1.0)) + spec.reg_lambda
    base_step = spec.learning_rate / curvature

    w = np.zeros(Z.shape[1])
    b = 0.0
    prev_loss = np.inf
    loss = prev_loss
    for epoch in range(spec.max_epochs):
        loss, grad_w, grad_b = weighted_logistic_loss(w, b, Z, y, c, spec.reg_lambda)
        if abs(prev_loss - loss) < spec.tol:
            break
        step = base_step / (1.0 + spec.lr_decay * epoch)
        w = w - step * grad_w
        b = b - step * grad_b
        prev_loss = loss

    return FittedBinaryModel(
        weights=w,
        bias=float(b),
        feature_map=feature_map,
        n_features_in=d,
        final_loss=float(loss),
    )


def predict_score(model: FittedBinaryModel, x) -> float:
    """Score one instance with a fitted binary model."""
    return model.predict_score(x)


def predict_scores(model: FittedBinaryModel, X) -> np.ndarray:
    """Score a batch of instances with a fitted binary model."""
    return model.predict_scores(X)


def spec_with(spec: BinaryLearnerSpec, **overrides) -> BinaryLearnerSpec:
    """Return a copy of spec with the given fields replaced."""
    return replace(spec, **overrides)
