"""Kalman-fused and bagged ensembles of multi-label components.

Two filters run side by side during fused training. The model filter treats
the (n, q) score matrix of the growing ensemble as the state and each freshly
trained component as a noisy sensor: the measurement is the average of the
component's scores and the previous estimate, its noise is the Hamming loss
of that measurement thresholded at 0.5. The weight filter estimates the
per-instance sampling distribution the next component is trained from;
instances the current ensemble gets wrong have their weight inflated by
exp(per-instance Hamming loss) in the weight measurement.

Prediction replays the stored gains through the exact same measurement /
update functions, so predicting on the training set reproduces the training
state bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import CLUSTERING_METHODS
from .components import threshold_scores, train_chain, train_homer
from .kalman import kalman_gain, measurement_update, variance_update
from .learners import KERNELS, BinaryLearnerSpec, spec_with
from .metrics import hamming_loss, instance_hamming_losses
from .rng import substream
from .validation import as_binary_matrix, as_float_matrix, check_same_rows

logger = logging.getLogger(__name__)

FAMILY_HOMER = "homer"
FAMILY_CC = "cc"


class HomerFamily:
    """Draws and fits randomly configured HOMER components."""

    name = FAMILY_HOMER

    def draw_params(self, rng: np.random.Generator, n_labels: int) -> dict:
        k_max = max(2, math.ceil(math.sqrt(n_labels)))
        return {
            "clustering": CLUSTERING_METHODS[rng.integers(len(CLUSTERING_METHODS))],
            "n_clusters": int(rng.integers(2, k_max + 1)),
            "kernel": KERNELS[rng.integers(len(KERNELS))],
        }

    def fit(self, X, Y, sample_weight, params, base_spec, rng):
        spec = spec_with(base_spec, kernel=params["kernel"])
        return train_homer(
            X, Y, sample_weight, params["clustering"], params["n_clusters"],
            spec, rng, keep_indices=False,
        )


class ChainFamily:
    """Draws and fits randomly ordered classifier chains."""

    name = FAMILY_CC

    def draw_params(self, rng: np.random.Generator, n_labels: int) -> dict:
        return {
            "order": rng.permutation(n_labels),
            "kernel": KERNELS[rng.integers(len(KERNELS))],
        }

    def fit(self, X, Y, sample_weight, params, base_spec, rng):
        spec = spec_with(base_spec, kernel=params["kernel"])
        return train_chain(X, Y, sample_weight, params["order"], spec, rng)


_FAMILIES = {FAMILY_HOMER: HomerFamily, FAMILY_CC: ChainFamily}


def resolve_family(family):
    """Accept a family name or a family-like object (used to stub components)."""
    if isinstance(family, str):
        try:
            return _FAMILIES[family]()
        except KeyError:
            raise ValueError(
                f"unknown component family {family!r}; expected one of {sorted(_FAMILIES)}"
            ) from None
    if hasattr(family, "draw_params") and hasattr(family, "fit"):
        return family
    raise ValueError(f"not a component family: {family!r}")


def measurement_average(component_scores, prev_estimate):
    """The model-filter measurement: midpoint of component and ensemble scores."""
    return (component_scores + prev_estimate) / 2.0


def weight_measurement(weights, instance_losses):
    """The weight-filter measurement: inflate by exp(loss), renormalized to sum 1.

    Misclassified instances get multipliers at least as large as correctly
    classified ones, so the next resample concentrates on them.
    """
    z = weights * np.exp(instance_losses)
    total = z.sum()
    if total <= 0:
        raise ValueError("weight measurement collapsed to zero mass")
    return z / total


@dataclass
class IterationRecord:
    """Per-iteration filter trace, written to the training log."""

    t: int
    noise: float
    gain: float
    variance: float
    weight_gain: float
    weight_variance: float
    weight_sum: float
    weight_min: float


@dataclass(eq=False)
class KfheModel:
    """Trained Kalman-fused ensemble: components h_0..h_T and gains k_1..k_T."""

    family: str
    components: list
    gains: np.ndarray
    param_draws: list
    seed: int
    n_labels: int
    n_features_in: int
    weighting: str = "resample"
    resample_factor: int = 2
    history: list = field(default_factory=list, compare=False)
    training_scores: np.ndarray | None = field(default=None, compare=False)
    final_weights: np.ndarray | None = field(default=None, compare=False)

    @property
    def n_components(self) -> int:
        return len(self.components) - 1

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        estimate = self.components[0].predict_scores(X)
        for component, gain in zip(self.components[1:], self.gains):
            z = measurement_average(component.predict_scores(X), estimate)
            estimate = measurement_update(estimate, z, gain)
        return estimate

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))


def train_kfhe(X, Y, n_components, family, base_spec=None, seed=0,
               weighting="resample", resample_factor=2) -> KfheModel:
    """Sequentially train and fuse n_components components on top of h_0.

    h_0 is fitted on the full data with uniform weights; every later component
    is fitted on a weighted resample of size resample_factor * n drawn from
    the weight-filter estimate (or, with weighting="direct", on the full data
    with those weights passed straight to the base learner).
    """
    if n_components < 1:
        raise ValueError(f"n_components must be at least 1, got {n_components}")
    if weighting not in ("resample", "direct"):
        raise ValueError(f"weighting must be 'resample' or 'direct', got {weighting!r}")
    if resample_factor < 1:
        raise ValueError("resample_factor must be a positive integer")
    family = resolve_family(family)
    base_spec = base_spec if base_spec is not None else BinaryLearnerSpec()
    X = as_float_matrix(X)
    Y = as_binary_matrix(Y)
    check_same_rows(X, Y)
    n, q = Y.shape

    weights = np.full(n, 1.0 / n)
    p_w = 1.0
    rng0 = substream(seed, 0)
    draws = [family.draw_params(rng0, q)]
    components = [family.fit(X, Y, None, draws[0], base_spec, rng0)]
    estimate = components[0].predict_scores(X)
    p_y = 1.0

    gains = np.empty(n_components, dtype=np.float64)
    history = []
    for t in range(1, n_components + 1):
        rng_t = substream(seed, t)
        params = family.draw_params(rng_t, q)
        if weighting == "resample":
            idx = rng_t.choice(n, size=resample_factor * n, replace=True, p=weights)
            component = family.fit(X[idx], Y[idx], None, params, base_spec, rng_t)
        else:
            component = family.fit(X, Y, weights, params, base_spec, rng_t)

        z = measurement_average(component.predict_scores(X), estimate)
        noise = hamming_loss(Y, threshold_scores(z))
        gain = kalman_gain(p_y, noise)
        estimate = measurement_update(estimate, z, gain)
        p_y = variance_update(p_y, gain)

        losses = instance_hamming_losses(Y, threshold_scores(estimate))
        z_w = weight_measurement(weights, losses)
        weight_gain = kalman_gain(p_w, noise)
        weights = measurement_update(weights, z_w, weight_gain)
        p_w = variance_update(p_w, weight_gain)
        total = weights.sum()
        if total <= 0:
            logger.warning("degenerate weight vector at iteration %d, reset to uniform", t)
            weights = np.full(n, 1.0 / n)
        else:
            weights = weights / total

        components.append(component)
        draws.append(params)
        gains[t - 1] = gain
        history.append(IterationRecord(
            t=t, noise=noise, gain=gain, variance=p_y,
            weight_gain=weight_gain, weight_variance=p_w,
            weight_sum=float(weights.sum()), weight_min=float(weights.min()),
        ))

    return KfheModel(
        family=family.name,
        components=components,
        gains=gains,
        param_draws=draws,
        seed=int(seed),
        n_labels=q,
        n_features_in=X.shape[1],
        weighting=weighting,
        resample_factor=int(resample_factor),
        history=history,
        training_scores=estimate,
        final_weights=weights,
    )


@dataclass(eq=False)
class BaggedModel:
    """Bagged ensemble: mean of h_0..h_T component scores."""

    family: str
    components: list
    param_draws: list
    seed: int
    n_labels: int
    n_features_in: int
    resample_factor: int = 2

    @property
    def n_components(self) -> int:
        return len(self.components) - 1

    def predict_scores(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        total = self.components[0].predict_scores(X)
        for component in self.components[1:]:
            total = total + component.predict_scores(X)
        return total / len(self.components)

    def predict(self, X) -> np.ndarray:
        return threshold_scores(self.predict_scores(X))


def train_bagged(X, Y, n_components, family, base_spec=None, seed=0,
                 resample_factor=2) -> BaggedModel:
    """h_0 on the full data, then n_components fits on uniform bootstrap
    samples of size resample_factor * n, each with fresh hyperparameter draws."""
    if n_components < 1:
        raise ValueError(f"n_components must be at least 1, got {n_components}")
    if resample_factor < 1:
        raise ValueError("resample_factor must be a positive integer")
    family = resolve_family(family)
    base_spec = base_spec if base_spec is not None else BinaryLearnerSpec()
    X = as_float_matrix(X)
    Y = as_binary_matrix(Y)
    check_same_rows(X, Y)
    n, q = Y.shape

    rng0 = substream(seed, 0)
    draws = [family.draw_params(rng0, q)]
    components = [family.fit(X, Y, None, draws[0], base_spec, rng0)]
    for t in range(1, n_components + 1):
        rng_t = substream(seed, t)
        params = family.draw_params(rng_t, q)
        idx = rng_t.choice(n, size=resample_factor * n, replace=True)
        components.append(family.fit(X[idx], Y[idx], None, params, base_spec, rng_t))
        draws.append(params)

    return BaggedModel(
        family=family.name,
        components=components,
        param_draws=draws,
        seed=int(seed),
        n_labels=q,
        n_features_in=X.shape[1],
        resample_factor=int(resample_factor),
    )
