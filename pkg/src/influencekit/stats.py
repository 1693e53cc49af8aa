"""Dataset perplexity and cross-dataset expected cosine similarity.

Perplexity is the exponentiated negative mean answer-token log-probability,
averaged per sample first and then across samples.  Similarity between two
datasets is the expected cosine between independently drawn items, which by
bilinearity equals the dot product of the per-dataset centroids of the
unit-normalized embeddings; the literal all-pairs average is kept as a
quadratic-cost test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyDataset
from .ingest import FieldKind, SampleRecord, SampleSet


@dataclass(frozen=True)
class SimilarityTriple:
    q_sim: float
    a_sim: float
    i_sim: float


def sample_mean_logprob(record: SampleRecord) -> float:
    """Arithmetic mean of one record's answer-token log-probabilities."""
    return float(np.mean(record.ans_logprobs))


def dataset_perplexity(sample_set: SampleSet) -> float:
    """exp(-mean over records of the per-record mean token log-probability)."""
    if len(sample_set) == 0:
        raise EmptyDataset(f"{sample_set.dataset_id}: empty sample set")
    return math.exp(-float(np.mean(sample_set.record_mean_logprobs())))


def record_perplexity(record: SampleRecord) -> float:
    """Perplexity of a single record, used by the instance-level score."""
    return math.exp(-sample_mean_logprob(record))


def normalized_field(record: SampleRecord, field_kind: FieldKind) -> np.ndarray:
    """The record's field embedding scaled to unit Euclidean norm."""
    vec = record.embedding(field_kind)
    return vec / np.linalg.norm(vec)


def field_centroid(sample_set: SampleSet, field_kind: FieldKind) -> np.ndarray:
    """Mean of the unit-normalized field embeddings; norm lies in [0, 1]."""
    if len(sample_set) == 0:
        raise EmptyDataset(f"{sample_set.dataset_id}: empty sample set")
    return np.mean(sample_set.normalized_matrix(field_kind), axis=0)


def expected_cosine(a: SampleSet, b: SampleSet, field_kind: FieldKind) -> float:
    """Expected cosine similarity between items drawn independently from a and b.

    Computed as the dot product of the two field centroids, which is exact
    because cosine of unit vectors is bilinear in its arguments.
    """
    if a.embedding_dim != b.embedding_dim:
        raise DimensionMismatch(
            f"embedding dims differ: {a.dataset_id}={a.embedding_dim}, "
            f"{b.dataset_id}={b.embedding_dim}"
        )
    return float(np.dot(field_centroid(a, field_kind), field_centroid(b, field_kind)))


def pairwise_expected_cosine_oracle(a: SampleSet, b: SampleSet, field_kind: FieldKind) -> float:
    """Literal all-pairs mean cosine; quadratic cost, kept as a test oracle."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyDataset("oracle requires non-empty sets")
    na = a.normalized_matrix(field_kind)
    nb = b.normalized_matrix(field_kind)
    return float(np.mean(na @ nb.T))


def similarity_triple(source: SampleSet, target: SampleSet) -> SimilarityTriple:
    """Question, answer, and image similarities, each computed separately."""
    return SimilarityTriple(
        q_sim=expected_cosine(source, target, FieldKind.QUESTION),
        a_sim=expected_cosine(source, target, FieldKind.ANSWER),
        i_sim=expected_cosine(source, target, FieldKind.IMAGE),
    )
