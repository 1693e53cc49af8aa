"""Source-dataset question diversity: k-means, silhouette, cluster entropy.

The diversity score of a dataset is silhouette + normalized entropy of the
cluster proportions, computed over one embedding per record.  Clustering is
deterministic for a fixed (points, k, seed): k-means++ seeding draws from a
PCG64 generator keyed by the seed, Lloyd iterations run until the maximum
centroid shift drops below 1e-6 or 100 iterations, and ties are broken by
lowest index throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyInput, InconsistentAssignment
from .ingest import FieldKind, SampleSet

MAX_ITER = 100
SHIFT_TOL = 1e-6


class FieldPolicy(str, enum.Enum):
    """How the per-record clustering vector is built from field embeddings."""

    QUESTION_ONLY = "question"
    MEAN_OF_FIELDS = "mean"


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray  # (n,) int64, values in [0, k)
    centroids: np.ndarray  # (k, dim)
    sizes: np.ndarray  # (k,) int64, all >= 1 after finalization


@dataclass(frozen=True)
class DiversityScore:
    silhouette: float
    entropy: float

    @property
    def total(self) -> float:
        return self.silhouette + self.entropy


def _seed_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; stops early once every distinct point is a centroid.

    Exhausting the distinct points is exactly the k = min(k, #distinct)
    clamp: total squared distance hits zero iff all remaining points
    duplicate a chosen centroid.
    """
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = kernels.sqdist_to_point(points, points[chosen[0]])
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            break
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
        idx = min(idx, n - 1)
        if d2[idx] <= 0.0:
            # cumsum round-off can land on a zero-weight duplicate; take the
            # next point that is genuinely new
            idx = int(np.flatnonzero(d2 > 0.0)[0])
        chosen.append(idx)
        np.minimum(d2, kernels.sqdist_to_point(points, points[idx]), out=d2)
    return points[np.array(chosen)].copy()


def _repair_empty(
    labels: np.ndarray,
    centroids: np.ndarray,
    sums: np.ndarray,
    counts: np.ndarray,
    dists: np.ndarray,
    points: np.ndarray,
) -> None:
    """Turn the point farthest from its centroid into each empty cluster's centroid."""
    for c in range(counts.shape[0]):
        if counts[c] > 0:
            continue
        p = int(np.argmax(dists))
        old = int(labels[p])
        labels[p] = c
        counts[old] -= 1
        counts[c] += 1
        sums[old] -= points[p]
        sums[c] += points[p]
        centroids[c] = points[p]
        dists[p] = 0.0


def kmeans(points: np.ndarray, k: int, seed: int) -> ClusterAssignment:
    """Deterministic Lloyd k-means with k-means++ seeding.

    k is clamped to the number of distinct points; no finalized cluster is
    empty.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptyInput("kmeans requires a non-empty (n, dim) array")
    if k < 1:
        raise EmptyInput(f"k must be >= 1, got {k}")
    n = points.shape[0]

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    centroids = _seed_centroids(points, min(k, n), rng)
    k_eff = centroids.shape[0]

    if k_eff == 1:
        labels = np.zeros(n, dtype=np.int64)
        centroid = np.mean(points, axis=0, keepdims=True)
        return ClusterAssignment(1, labels, centroid, np.array([n], dtype=np.int64))

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(MAX_ITER):
        labels, dists = kernels.nearest_centroids(points, centroids)
        sums, counts = kernels.cluster_sums(points, labels, k_eff)
        new_centroids = centroids.copy()
        _repair_empty(labels, new_centroids, sums, counts, dists, points)
        nonempty = counts > 0
        new_centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < SHIFT_TOL:
            break

    # Final labeling against the converged centroids, re-repairing if the
    # last update emptied a cluster.
    for _ in range(k_eff):
        labels, dists = kernels.nearest_centroids(points, centroids)
        sums, counts = kernels.cluster_sums(points, labels, k_eff)
        if np.all(counts > 0):
            break
        _repair_empty(labels, centroids, sums, counts, dists, points)
    else:
        labels, _ = kernels.nearest_centroids(points, centroids)
        counts = np.bincount(labels, minlength=k_eff).astype(np.int64)
        keep = np.flatnonzero(counts > 0)
        remap = np.full(k_eff, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        labels = remap[labels]
        centroids = centroids[keep]
        counts = counts[keep]
        k_eff = keep.size

    return ClusterAssignment(k_eff, labels, centroids, counts.astype(np.int64))


def silhouette(points: np.ndarray, assignment: ClusterAssignment) -> float:
    """Mean per-point (b - a) / max(a, b) with Euclidean distances.

    a is the mean distance to the point's own cluster (excluding itself), b
    the minimum mean distance to any other cluster.  Singleton clusters and
    k = 1 contribute the neutral value 0.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if assignment.labels.shape[0] != n:
        raise InconsistentAssignment(
            f"{assignment.labels.shape[0]} labels for {n} points"
        )
    if int(assignment.sizes.sum()) != n or np.any(assignment.labels >= assignment.k):
        raise InconsistentAssignment("labels and sizes do not describe these points")
    if assignment.k == 1:
        return 0.0

    sums = kernels.cluster_distance_sums(points, assignment.labels, assignment.k)
    sizes = assignment.sizes
    labels = assignment.labels
    rows = np.arange(n)

    own_sizes = sizes[labels]
    not_single = own_sizes > 1
    a = np.zeros(n)
    a[not_single] = sums[rows, labels][not_single] / (own_sizes[not_single] - 1)

    mean_to = sums / sizes[None, :]
    mean_to[rows, labels] = np.inf
    b = np.min(mean_to, axis=1)

    denom = np.maximum(a, b)
    s = np.zeros(n)
    valid = not_single & (denom > 0.0)
    s[valid] = (b[valid] - a[valid]) / denom[valid]
    return float(np.mean(s))


def normalized_entropy(assignment: ClusterAssignment) -> float:
    """Shannon entropy of cluster proportions divided by log k, in [0, 1].

    Returns 0 for k = 1 and exactly 1 when all cluster sizes are equal.
    """
    k = assignment.k
    if k == 1:
        return 0.0
    sizes = assignment.sizes
    if np.all(sizes == sizes[0]):
        return 1.0
    props = sizes / sizes.sum()
    h = -float(np.sum(props * np.log(props))) / math.log(k)
    return min(max(h, 0.0), 1.0)


def clustering_vectors(sample_set: SampleSet, field_policy: FieldPolicy) -> np.ndarray:
    """Per-record vectors to cluster, built from unit-normalized embeddings."""
    if field_policy is FieldPolicy.QUESTION_ONLY:
        return sample_set.normalized_matrix(FieldKind.QUESTION)
    stack = (
        sample_set.normalized_matrix(FieldKind.QUESTION)
        + sample_set.normalized_matrix(FieldKind.ANSWER)
        + sample_set.normalized_matrix(FieldKind.IMAGE)
    )
    return stack / 3.0


def diversity_score(
    sample_set: SampleSet,
    k: int,
    seed: int,
    field_policy: FieldPolicy = FieldPolicy.QUESTION_ONLY,
) -> DiversityScore:
    """Silhouette plus normalized entropy of the clustered record embeddings."""
    points = clustering_vectors(sample_set, field_policy)
    assignment = kmeans(points, k, seed)
    return DiversityScore(
        silhouette=silhouette(points, assignment),
        entropy=normalized_entropy(assignment),
    )
