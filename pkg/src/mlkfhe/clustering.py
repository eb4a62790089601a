"""Label-space partitioning used to build label hierarchies.

Labels are clustered by their indicator columns: label j is represented by
the n-dimensional 0/1 vector of which datapoints carry it, and distances are
Euclidean in that space.
"""

from __future__ import annotations

import numpy as np

CLUSTERING_METHODS = ("random", "kmeans", "balanced")

_MAX_ITER = 100


def cluster_labels(Y, label_indices, method: str, n_clusters: int, rng: np.random.Generator):
    """Partition a label subset into min(n_clusters, len(labels)) nonempty groups.

    Y is the (n, q) label matrix of the data available at the caller's node;
    label_indices selects the columns to partition. Returns a list of integer
    arrays over the original label index space, in cluster order.
    """
    label_indices = np.asarray(label_indices, dtype=np.intp)
    m = label_indices.shape[0]
    if m == 0:
        raise ValueError("cannot cluster an empty label set")
    if n_clusters < 2:
        raise ValueError(f"n_clusters must be at least 2, got {n_clusters}")
    if method not in CLUSTERING_METHODS:
        raise ValueError(f"unknown clustering method {method!r}")
    k = min(int(n_clusters), m)
    if k == m:
        return [label_indices[i : i + 1] for i in range(m)]

    if method == "random":
        assign = _random_assignment(m, k, rng)
    else:
        Y = np.asarray(Y)
        columns = Y[:, label_indices].T.astype(np.float64)
        if method == "kmeans":
            assign = _kmeans_assignment(columns, k, rng)
        else:
            assign = _balanced_assignment(columns, k, rng)
    return [label_indices[assign == c] for c in range(k)]


def _random_assignment(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffle labels and deal them into k near-equal contiguous chunks."""
    perm = rng.permutation(m)
    sizes = np.full(k, m // k)
    sizes[: m % k] += 1
    assign = np.empty(m, dtype=np.intp)
    start = 0
    for c, size in enumerate(sizes):
        assign[perm[start : start + size]] = c
        start += size
    return assign


def _distances_sq(columns: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = columns[:, None, :] - centroids[None, :, :]
    return np.einsum("ikj,ikj->ik", diff, diff)


def _init_centroids(columns: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.choice(columns.shape[0], size=k, replace=False)
    return columns[np.sort(idx)].copy()


def _update_centroids(columns, assign, k, centroids):
    new = centroids.copy()
    for c in range(k):
        members = assign == c
        if members.any():
            new[c] = columns[members].mean(axis=0)
    return new


def _kmeans_assignment(columns: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Lloyd iterations; empty clusters steal the point farthest from its centroid."""
    centroids = _init_centroids(columns, k, rng)
    assign = np.full(columns.shape[0], -1, dtype=np.intp)
    for _ in range(_MAX_ITER):
        d2 = _distances_sq(columns, centroids)
        new_assign = d2.argmin(axis=1)
        counts = np.bincount(new_assign, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            movable = counts[new_assign] > 1
            donor = np.flatnonzero(movable)[
                d2[movable, new_assign[movable]].argmax()
            ]
            counts[new_assign[donor]] -= 1
            new_assign[donor] = empty
            counts[empty] += 1
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centroids = _update_centroids(columns, assign, k, centroids)
    return assign


def _balanced_assignment(columns: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Capacity-constrained k-means keeping group sizes within 1 of each other.

    Exactly (m mod k) groups may hold ceil(m/k) labels, the rest floor(m/k).
    Each iteration assigns labels greedily in decreasing order of how much
    they lose by not taking their nearest centroid (distance gap).
    """
    m = columns.shape[0]
    low = m // k
    hi_quota = m % k
    centroids = _init_centroids(columns, k, rng)
    assign = np.full(m, -1, dtype=np.intp)
    for _ in range(_MAX_ITER):
        d2 = _distances_sq(columns, centroids)
        order_d2 = np.sort(d2, axis=1)
        gap = order_d2[:, 1] - order_d2[:, 0] if k > 1 else np.zeros(m)
        item_order = np.argsort(-gap, kind="stable")
        counts = np.zeros(k, dtype=np.intp)
        hi_used = 0
        new_assign = np.empty(m, dtype=np.intp)
        for i in item_order:
            for c in np.argsort(d2[i], kind="stable"):
                if counts[c] < low or (counts[c] == low and hi_used < hi_quota):
                    if counts[c] == low:
                        hi_used += 1
                    counts[c] += 1
                    new_assign[i] = c
                    break
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centroids = _update_centroids(columns, assign, k, centroids)
    return assign
