"""The influence score: composition of similarity, perplexity, and diversity.

A source dataset's predicted influence on a target is

    q_sim * a_sim * i_sim * ppl(source) * (silhouette + entropy) / ppl(target)

with the similarities taken between the datasets' unit-embedding centroids.
The product form zeroes the score whenever any single factor vanishes.  The
instance-level variant scores one record against a target summary and drops
the diversity factor.  Any factor can be ablated (replaced by 1) for
sensitivity studies.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence, Set
from dataclasses import dataclass

import numpy as np

from .diversity import DiversityScore, FieldPolicy, diversity_score
from .errors import DimensionMismatch, UnknownDatasetId
from .ingest import FORMAT_VERSION, FieldKind, SampleRecord, SampleSet
from .stats import dataset_perplexity, field_centroid, normalized_field, record_perplexity


class Factor(str, enum.Enum):
    QSIM = "qsim"
    ASIM = "asim"
    ISIM = "isim"
    PPL = "ppl"
    DIVERSITY = "div"


def config_fingerprint(k: int, seed: int, field_policy: FieldPolicy) -> str:
    return f"fmt={FORMAT_VERSION};k={k};seed={seed};policy={field_policy.value}"


@dataclass(frozen=True)
class DatasetSummary:
    """Per-dataset aggregates sufficient to score any (source, target) pair."""

    dataset_id: str
    n: int
    centroids: dict  # FieldKind -> (dim,) array
    perplexity: float
    diversity: DiversityScore
    config_fingerprint: str

    @property
    def embedding_dim(self) -> int:
        return int(self.centroids[FieldKind.QUESTION].shape[0])

    def to_json_obj(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "config_fingerprint": self.config_fingerprint,
            "dataset_id": self.dataset_id,
            "n": self.n,
            "perplexity": self.perplexity,
            "diversity": {
                "silhouette": self.diversity.silhouette,
                "entropy": self.diversity.entropy,
                "total": self.diversity.total,
            },
            "centroids": {
                kind.value: [float(x) for x in self.centroids[kind]] for kind in FieldKind
            },
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DatasetSummary":
        centroids = {
            kind: np.asarray(obj["centroids"][kind.value], dtype=np.float64)
            for kind in FieldKind
        }
        dims = {v.shape[0] for v in centroids.values()}
        if len(dims) != 1:
            raise DimensionMismatch(
                f"summary {obj.get('dataset_id')!r} has mixed centroid dims {sorted(dims)}"
            )
        return cls(
            dataset_id=obj["dataset_id"],
            n=int(obj["n"]),
            centroids=centroids,
            perplexity=float(obj["perplexity"]),
            diversity=DiversityScore(
                silhouette=float(obj["diversity"]["silhouette"]),
                entropy=float(obj["diversity"]["entropy"]),
            ),
            config_fingerprint=obj["config_fingerprint"],
        )


@dataclass(frozen=True)
class InfluenceMatrix:
    sources: tuple[str, ...]
    targets: tuple[str, ...]
    scores: np.ndarray  # (len(sources), len(targets))

    def score(self, source_id: str, target_id: str) -> float:
        try:
            i = self.sources.index(source_id)
            j = self.targets.index(target_id)
        except ValueError as exc:
            raise UnknownDatasetId(str(exc)) from exc
        return float(self.scores[i, j])

    def column(self, target_id: str) -> dict[str, float]:
        try:
            j = self.targets.index(target_id)
        except ValueError as exc:
            raise UnknownDatasetId(f"target {target_id!r} not in matrix") from exc
        return {s: float(self.scores[i, j]) for i, s in enumerate(self.sources)}


def summarize(
    sample_set: SampleSet,
    k: int,
    seed: int,
    field_policy: FieldPolicy = FieldPolicy.QUESTION_ONLY,
) -> DatasetSummary:
    """Aggregate one dataset into centroids, perplexity, and diversity."""
    centroids = {kind: field_centroid(sample_set, kind) for kind in FieldKind}
    return DatasetSummary(
        dataset_id=sample_set.dataset_id,
        n=len(sample_set),
        centroids=centroids,
        perplexity=dataset_perplexity(sample_set),
        diversity=diversity_score(sample_set, k, seed, field_policy),
        config_fingerprint=config_fingerprint(k, seed, field_policy),
    )


def _check_dims(a: DatasetSummary, b: DatasetSummary) -> None:
    if a.embedding_dim != b.embedding_dim:
        raise DimensionMismatch(
            f"centroid dims differ: {a.dataset_id}={a.embedding_dim}, "
            f"{b.dataset_id}={b.embedding_dim}"
        )


def ablated_score(
    source: DatasetSummary,
    target: DatasetSummary,
    drop: Set[Factor] = frozenset(),
) -> float:
    """Influence score with every dropped factor replaced by 1.

    Dropping PPL removes the whole ppl(source)/ppl(target) ratio.
    """
    _check_dims(source, target)
    score = 1.0
    if Factor.QSIM not in drop:
        score *= float(np.dot(source.centroids[FieldKind.QUESTION], target.centroids[FieldKind.QUESTION]))
    if Factor.ASIM not in drop:
        score *= float(np.dot(source.centroids[FieldKind.ANSWER], target.centroids[FieldKind.ANSWER]))
    if Factor.ISIM not in drop:
        score *= float(np.dot(source.centroids[FieldKind.IMAGE], target.centroids[FieldKind.IMAGE]))
    if Factor.PPL not in drop:
        score *= source.perplexity
        score /= target.perplexity
    if Factor.DIVERSITY not in drop:
        score *= source.diversity.total
    return score


def influence_score(source: DatasetSummary, target: DatasetSummary) -> float:
    """Predicted influence of fine-tuning on source for the target benchmark."""
    return ablated_score(source, target, frozenset())


def instance_score(record: SampleRecord, target: DatasetSummary) -> float:
    """Per-record influence on a target; the diversity factor is omitted."""
    dim = target.embedding_dim
    if record.q_emb.shape[0] != dim:
        raise DimensionMismatch(
            f"record {record.id!r} dim {record.q_emb.shape[0]} vs target {dim}"
        )
    score = 1.0
    for kind in (FieldKind.QUESTION, FieldKind.ANSWER, FieldKind.IMAGE):
        score *= float(np.dot(normalized_field(record, kind), target.centroids[kind]))
    score *= record_perplexity(record)
    score /= target.perplexity
    return score


def influence_matrix(
    summaries: Iterable[DatasetSummary],
    sources: Sequence[str],
    targets: Sequence[str],
    drop: Set[Factor] = frozenset(),
) -> InfluenceMatrix:
    """Score every (source, target) pair, diagonal included."""
    by_id = {s.dataset_id: s for s in summaries}
    for ds_id in list(sources) + list(targets):
        if ds_id not in by_id:
            raise UnknownDatasetId(f"no summary for dataset {ds_id!r}")
    scores = np.empty((len(sources), len(targets)))
    for i, s in enumerate(sources):
        for j, t in enumerate(targets):
            scores[i, j] = ablated_score(by_id[s], by_id[t], drop)
    return InfluenceMatrix(tuple(sources), tuple(targets), scores)
