"""Hot numeric kernels behind clustering and silhouette scoring.

Each kernel has a numba @njit implementation and a pure-numpy fallback.
The numba path is the default when numba is importable; setting the
environment variable ``INFLUENCEKIT_NO_NUMBA`` to a non-empty value other
than "0" forces the numpy path.  Both paths agree to floating-point
round-off; accumulation is 64-bit in point-index order on the numba path.

``benchmarks/bench_kernels.py`` compares the two paths head to head.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but degrade anyway
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


_ENV_FLAG = "INFLUENCEKIT_NO_NUMBA"


def use_numba() -> bool:
    """True when the JIT path is active for this call."""
    flag = os.environ.get(_ENV_FLAG, "")
    if flag and flag != "0":
        return False
    return HAVE_NUMBA


# --- nearest centroid assignment ---

def nearest_centroids_np(points: np.ndarray, centroids: np.ndarray):
    """Label every point with its nearest centroid (ties -> lowest index).

    Returns (labels int64 (n,), squared distance to that centroid (n,)).
    """
    # |x-c|^2 expansion keeps memory at n*k instead of n*k*d.
    x2 = np.einsum("ij,ij->i", points, points)
    c2 = np.einsum("ij,ij->i", centroids, centroids)
    d2 = x2[:, None] + c2[None, :] - 2.0 * (points @ centroids.T)
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(points.shape[0]), labels]


@njit(cache=True)
def nearest_centroids_nb(points, centroids):  # pragma: no cover - jitted
    n, d = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    for i in range(n):
        best = 0
        best_d2 = np.inf
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                acc += diff * diff
            if acc < best_d2:
                best_d2 = acc
                best = c
        labels[i] = best
        dists[i] = best_d2
    return labels, dists


def nearest_centroids(points: np.ndarray, centroids: np.ndarray):
    if use_numba():
        return nearest_centroids_nb(points, centroids)
    return nearest_centroids_np(points, centroids)


# --- centroid update ---

def cluster_sums_np(points: np.ndarray, labels: np.ndarray, k: int):
    """Per-cluster coordinate sums and member counts."""
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


@njit(cache=True)
def cluster_sums_nb(points, labels, k):  # pragma: no cover - jitted
    n, d = points.shape
    sums = np.zeros((k, d), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += points[i, j]
    return sums, counts


def cluster_sums(points: np.ndarray, labels: np.ndarray, k: int):
    if use_numba():
        return cluster_sums_nb(points, labels, k)
    return cluster_sums_np(points, labels, k)


# --- squared distance to one point (k-means++ seeding) ---

def sqdist_to_point_np(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center[None, :]
    return np.einsum("ij,ij->i", diff, diff)


@njit(cache=True)
def sqdist_to_point_nb(points, center):  # pragma: no cover - jitted
    n, d = points.shape
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(d):
            diff = points[i, j] - center[j]
            acc += diff * diff
        out[i] = acc
    return out


def sqdist_to_point(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    if use_numba():
        return sqdist_to_point_nb(points, center)
    return sqdist_to_point_np(points, center)


# --- silhouette helper: summed distances from each point to each cluster ---

def cluster_distance_sums_np(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """(n, k) matrix of summed Euclidean distances from point i to cluster c.

    The zero self-distance is included in a point's own cluster; callers
    divide by (size - 1) for the intra-cluster mean, so it cancels out.
    Row-chunked to bound the n x n distance block at ~32 MB.
    """
    n = points.shape[0]
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    x2 = np.einsum("ij,ij->i", points, points)
    out = np.empty((n, k))
    chunk = max(1, (4 << 20) // max(n, 1))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = x2[start:stop, None] + x2[None, :] - 2.0 * (points[start:stop] @ points.T)
        np.maximum(d2, 0.0, out=d2)
        # the expansion leaves round-off on the diagonal; self-distance is 0
        d2[np.arange(stop - start), np.arange(start, stop)] = 0.0
        out[start:stop] = np.sqrt(d2) @ onehot
    return out


@njit(cache=True)
def cluster_distance_sums_nb(points, labels, k):  # pragma: no cover - jitted
    n, d = points.shape
    out = np.zeros((n, k), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for m in range(d):
                diff = points[i, m] - points[j, m]
                acc += diff * diff
            out[i, labels[j]] += np.sqrt(acc)
    return out


def cluster_distance_sums(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    if use_numba():
        return cluster_distance_sums_nb(points, labels, k)
    return cluster_distance_sums_np(points, labels, k)
