"""k-means++ seeding followed by a few Lloyd iterations, used to start EM."""

from __future__ import annotations

import numpy as np


def _sq_dist(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # n x k squared euclidean distances
    d = (x * x).sum(1)[:, None] - 2.0 * x @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dist(x, centers[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point coincides with a chosen centre
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centers[i] = x[idx]
        closest = np.minimum(closest, _sq_dist(x, centers[i : i + 1])[:, 0])
    return centers


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, n_iter: int = 10) -> np.ndarray:
    """Return 0-based hard labels with every one of the ``k`` clusters non-empty.

    Requires ``n >= k``.
    """
    n = x.shape[0]
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    centers = kmeans_plusplus(x, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(n_iter):
        d = _sq_dist(x, centers)
        new = d.argmin(axis=1)
        new = _fill_empty(new, d, k)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)
    else:
        labels = _fill_empty(_sq_dist(x, centers).argmin(axis=1), _sq_dist(x, centers), k)
    return labels


def _fill_empty(labels: np.ndarray, d: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        # steal the point worst served by its current centre from a cluster that can spare it
        own = d[np.arange(len(labels)), labels]
        donors = np.bincount(labels, minlength=k)[labels] > 1
        if not donors.any():
            break
        i = int(np.argmax(np.where(donors, own, -np.inf)))
        labels[i] = j
    return labels
