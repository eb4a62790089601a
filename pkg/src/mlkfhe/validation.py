"""Input validation helpers shared by the estimators and core routines."""

from __future__ import annotations

import numpy as np


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    if X.shape[0] < 1:
        raise ValueError(f"{name} must contain at least one row")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_binary_matrix(Y, name: str = "Y") -> np.ndarray:
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={Y.ndim}")
    vals = np.unique(Y)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValueError(f"{name} must contain only 0/1 entries, found {vals[:5]}")
    return Y.astype(np.int8)


def as_binary_vector(y, name: str = "y") -> np.ndarray:
    y = np.asarray(y).ravel()
    vals = np.unique(y)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValueError(f"{name} must contain only 0/1 entries, found {vals[:5]}")
    return y.astype(np.float64)


def as_weight_vector(w, n: int, name: str = "sample_weight") -> np.ndarray:
    """Nonnegative weights with positive total, as float64 of length n."""
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise ValueError(f"{name} has length {w.shape[0]}, expected {n}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"{name} must be finite and nonnegative")
    if w.sum() <= 0:
        raise ValueError(f"{name} must not be identically zero")
    return w


def check_same_rows(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape[0] != Y.shape[0]:
        raise ValueError(
            f"X and Y row counts differ: {X.shape[0]} vs {Y.shape[0]}"
        )


def check_n_features(X: np.ndarray, expected: int, name: str = "X") -> None:
    if X.shape[1] != expected:
        raise ValueError(
            f"{name} has {X.shape[1]} features, model expects {expected}"
        )
