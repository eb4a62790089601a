"""Fold assignment: iterative multi-label stratification and a random baseline.

The stratifier greedily processes the scarcest label first: among labels with
unassigned positive instances, pick the one with the fewest remaining, then
place each of its unassigned instances into the fold with the greatest
remaining demand for that label. With equal fold proportions, demand ordering
reduces to integer bookkeeping (fewest positives of that label already in the
fold), ties break on the greatest remaining fold capacity (fewest instances
so far), then by a seeded uniform choice. Instances without any positive
label are dealt out by remaining capacity at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_binary_matrix


@dataclass
class FoldAssignment:
    """Fold index per instance for one repetition of cross-validation."""

    fold_of: np.ndarray
    n_folds: int
    seed: int | None = None
    repetition: int = 0

    def split(self, fold: int):
        """(train_indices, test_indices) for one held-out fold."""
        test = np.flatnonzero(self.fold_of == fold)
        train = np.flatnonzero(self.fold_of != fold)
        return train, test

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.n_folds)


def _as_generator(random_state) -> np.random.Generator:
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def _rng_pick(candidates: np.ndarray, rng: np.random.Generator) -> int:
    """Pick among tied candidates; consumes randomness only for real ties."""
    if candidates.shape[0] == 1:
        return int(candidates[0])
    return int(candidates[rng.integers(candidates.shape[0])])


def iterative_stratification(Y, n_folds: int, random_state=0,
                             repetition: int = 0) -> FoldAssignment:
    Y = as_binary_matrix(Y)
    n, q = Y.shape
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_folds > n:
        raise ValueError(f"cannot split {n} instances into {n_folds} folds")
    rng = _as_generator(random_state)
    seed = random_state if isinstance(random_state, (int, np.integer)) else None

    fold_of = np.full(n, -1, dtype=np.intp)
    assigned_label = np.zeros((n_folds, q), dtype=np.intp)  # positives per fold/label
    fold_size = np.zeros(n_folds, dtype=np.intp)

    while True:
        unassigned = fold_of < 0
        remaining = Y[unassigned].sum(axis=0)
        if remaining.sum() == 0:
            break
        active = np.flatnonzero(remaining > 0)
        scarcest = active[remaining[active] == remaining[active].min()]
        label = _rng_pick(scarcest, rng)
        for i in np.flatnonzero(unassigned & (Y[:, label] == 1)):
            best = np.flatnonzero(assigned_label[:, label] == assigned_label[:, label].min())
            if best.shape[0] > 1:
                sizes = fold_size[best]
                best = best[sizes == sizes.min()]
            fold = _rng_pick(best, rng)
            fold_of[i] = fold
            assigned_label[fold] += Y[i]
            fold_size[fold] += 1

    for i in np.flatnonzero(fold_of < 0):
        best = np.flatnonzero(fold_size == fold_size.min())
        fold = _rng_pick(best, rng)
        fold_of[i] = fold
        fold_size[fold] += 1

    # Degenerate guard: label-driven assignment can in principle starve a
    # fold; move one instance over from the largest fold.
    while (fold_size == 0).any():
        empty = int(np.flatnonzero(fold_size == 0)[0])
        donor = int(fold_size.argmax())
        victim = int(np.flatnonzero(fold_of == donor)[0])
        fold_of[victim] = empty
        fold_size[donor] -= 1
        fold_size[empty] += 1

    return FoldAssignment(fold_of=fold_of, n_folds=int(n_folds),
                          seed=seed, repetition=repetition)


def random_folds(n: int, n_folds: int, random_state=0,
                 repetition: int = 0) -> FoldAssignment:
    """Seeded uniform split into folds whose sizes differ by at most one."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_folds > n:
        raise ValueError(f"cannot split {n} instances into {n_folds} folds")
    rng = _as_generator(random_state)
    seed = random_state if isinstance(random_state, (int, np.integer)) else None
    fold_of = np.empty(n, dtype=np.intp)
    fold_of[rng.permutation(n)] = np.arange(n) % n_folds
    return FoldAssignment(fold_of=fold_of, n_folds=int(n_folds),
                          seed=seed, repetition=repetition)


def label_proportion_deviation(Y, assignment: FoldAssignment) -> float:
    """Mean absolute difference between per-fold and global label proportions."""
    Y = as_binary_matrix(Y)
    global_prop = Y.mean(axis=0)
    deviations = []
    for fold in range(assignment.n_folds):
        members = assignment.fold_of == fold
        if not members.any():
            continue
        deviations.append(np.abs(Y[members].mean(axis=0) - global_prop))
    return float(np.mean(deviations))
