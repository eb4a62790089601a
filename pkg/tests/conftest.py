"""Shared fixtures: synthetic dataset builders and small hand toys."""

from __future__ import annotations

import numpy as np
import pytest

from mlkfhe import Dataset


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {status} {name}", flush=True)


def planted_dataset(n, d, n_base, n_copy, seed, noise=0.05, copy_noise=0.05):
    """Linearly separable base labels plus noisy copies of them.

    The copies give chains something to exploit; the flip noise keeps single
    models imperfect. Returns a Dataset with q = n_base + n_copy labels.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    W = rng.normal(size=(d, n_base))
    W /= np.linalg.norm(W, axis=0)
    base = (X @ W > 0).astype(np.int8)
    flip = rng.random(base.shape) < noise
    base = np.where(flip, 1 - base, base)
    columns = [base]
    if n_copy:
        src = base[:, :n_copy]
        flip = rng.random(src.shape) < copy_noise
        columns.append(np.where(flip, 1 - src, src))
    Y = np.hstack(columns).astype(np.int8)
    return Dataset(X=X, Y=Y, name=f"planted{seed}")


def random_label_matrix(n, q, seed, density=0.35):
    rng = np.random.default_rng(seed)
    Y = (rng.random((n, q)) < density).astype(np.int8)
    # Guarantee the matrix is usable: at least one positive per label.
    for j in range(q):
        if Y[:, j].sum() == 0:
            Y[rng.integers(n), j] = 1
    return Y


@pytest.fixture
def separable_pair():
    """Two points separable by their first coordinate."""
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1, 0])
    return X, y


@pytest.fixture
def xor_points():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    return X, y


@pytest.fixture
def toy_3x2():
    """The fixed 3-instance, 2-label metric toy."""
    Y_true = np.array([[1, 0], [0, 1], [1, 1]])
    Y_pred = np.array([[1, 0], [1, 1], [1, 0]])
    return Y_true, Y_pred


@pytest.fixture
def chain_copy_toy():
    """Features are pure noise; label 2 copies label 1 exactly.

    Only the chained ground-truth prefix makes label 2 learnable.
    """
    rng = np.random.default_rng(42)
    n = 60
    X = rng.normal(size=(n, 3))
    y1 = (rng.random(n) < 0.5).astype(np.int8)
    Y = np.column_stack([y1, y1])
    return X, Y


@pytest.fixture
def separable_multilabel():
    """Every label cleanly decided by one feature's sign; easy everywhere."""
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 3))
    Y = (X > 0).astype(np.int8)
    return X, Y
